#include "irlkit/models.hpp"

#include "irlkit/kernels.hpp"
#include "irlkit/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace irl {

namespace {

void require_positive(prec_t x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

void require_positive_probs(const StochasticPolicy& pi) {
    for (prec_t p : pi.probs())
        if (!(p > 0.0)) throw std::invalid_argument("policy has a zero or negative probability");
}

StochasticPolicy softmax_rows(const numvec& q, std::size_t ns, std::size_t na, prec_t scale) {
    numvec probs(ns * na);
    for (std::size_t s = 0; s < ns; ++s)
        kernels::softmax({q.data() + s * na, na}, scale, {probs.data() + s * na, na});
    return StochasticPolicy(ns, na, std::move(probs));
}

} // namespace

StochasticPolicy boltzmann_policy(const Mdp& mdp, const RewardTable& r, prec_t beta,
                                  const SolverOptions& opts) {
    require_positive(beta, "beta");
    const OptimalBundle b = optimal_values(mdp, r, opts);
    // A* rather than Q*: same softmax, smaller arguments.
    return softmax_rows(b.a_star, b.n_states, b.n_actions, 1.0 / beta);
}

StochasticPolicy mce_policy(const Mdp& mdp, const RewardTable& r, prec_t alpha,
                            const SolverOptions& opts) {
    require_positive(alpha, "alpha");
    return soft_policy(soft_optimal_values(mdp, r, alpha, opts));
}

ActionSetPolicy optimal_set_policy(const Mdp& mdp, const RewardTable& r, const SolverOptions& opts) {
    return optimal_values(mdp, r, opts).opt_sets;
}

// *************************************************************************************
// **** F-variants
// *************************************************************************************

std::string FVariantSpec::name() const {
    std::ostringstream out;
    if (const auto* m = std::get_if<MixtureVariant>(&kind))
        out << "mixture(lambda=" << m->lambda << ",beta1=" << m->beta1 << ",beta2=" << m->beta2 << ")";
    else if (const auto* t = std::get_if<TemperedRankVariant>(&kind))
        out << "tempered-rank(beta=" << t->beta << ",p=" << t->power << ")";
    return out.str();
}

bool certify_argmax(const StochasticPolicy& pi, const ActionSetPolicy& opt_sets, prec_t rel_tol,
                    std::string* reason) {
    const auto fail = [&](const std::string& why) {
        if (reason) *reason = why;
        return false;
    };
    if (opt_sets.n_states() != pi.n_states()) return fail("state count mismatch");
    if (!pi.strictly_positive()) return fail("policy is not strictly positive");
    for (std::size_t s = 0; s < pi.n_states(); ++s) {
        const prec_t* row = pi.row(s);
        const prec_t top = *std::max_element(row, row + pi.n_actions());
        prec_t lowest_opt = top;
        for (std::size_t a : opt_sets[s]) {
            if (row[a] < top * (1 - rel_tol))
                return fail("optimal action " + std::to_string(a) + " is not maximal in state " +
                            std::to_string(s));
            lowest_opt = std::min(lowest_opt, row[a]);
        }
        for (std::size_t a = 0; a < pi.n_actions(); ++a)
            if (!opt_sets.contains(s, a) && !(row[a] < lowest_opt))
                return fail("non-optimal action " + std::to_string(a) +
                            " is not dominated in state " + std::to_string(s));
    }
    return true;
}

StochasticPolicy fvariant_policy(const Mdp& mdp, const RewardTable& r, const FVariantSpec& spec,
                                 const SolverOptions& opts) {
    const OptimalBundle b = optimal_values(mdp, r, opts);
    const std::size_t ns = b.n_states, na = b.n_actions;
    StochasticPolicy pi;
    prec_t beta_max = 0;
    if (const auto* m = std::get_if<MixtureVariant>(&spec.kind)) {
        if (!(m->lambda > 0.0 && m->lambda < 1.0))
            throw std::invalid_argument("mixture lambda must lie in (0, 1)");
        require_positive(m->beta1, "beta1");
        require_positive(m->beta2, "beta2");
        const StochasticPolicy p1 = softmax_rows(b.a_star, ns, na, 1.0 / m->beta1);
        const StochasticPolicy p2 = softmax_rows(b.a_star, ns, na, 1.0 / m->beta2);
        numvec probs(ns * na);
        for (std::size_t i = 0; i < probs.size(); ++i)
            probs[i] = m->lambda * p1.probs()[i] + (1 - m->lambda) * p2.probs()[i];
        pi = StochasticPolicy(ns, na, std::move(probs));
        beta_max = std::max(m->beta1, m->beta2);
    } else if (const auto* t = std::get_if<TemperedRankVariant>(&spec.kind)) {
        require_positive(t->beta, "beta");
        require_positive(t->power, "power");
        pi = softmax_rows(b.a_star, ns, na, 1.0 / (t->beta * t->power));
        beta_max = t->beta * t->power;
    }
    // Tied optimal actions differ by at most tie_tol in A*, hence by a factor
    // exp(beta * tie_tol) in probability.
    const prec_t rel_tol = std::expm1(beta_max * opts.tie_tol) + 1e-12;
    std::string reason;
    if (!certify_argmax(pi, b.opt_sets, rel_tol, &reason))
        throw CertificationError(spec.name() + ": " + reason);
    return pi;
}

// *************************************************************************************
// **** Model values
// *************************************************************************************

std::string BehaviouralModel::name() const {
    std::ostringstream out;
    if (const auto* m = std::get_if<BoltzmannModel>(&kind)) out << "boltzmann(beta=" << m->beta << ")";
    else if (const auto* m = std::get_if<MceModel>(&kind)) out << "mce(alpha=" << m->alpha << ")";
    else if (std::holds_alternative<OptimalSetModel>(kind)) out << "optimal-set";
    else if (const auto* m = std::get_if<FVariantModel>(&kind)) out << m->spec.name();
    return out.str();
}

StochasticPolicy model_policy(const BehaviouralModel& model, const Mdp& mdp, const RewardTable& r,
                              const SolverOptions& opts) {
    if (const auto* m = std::get_if<BoltzmannModel>(&model.kind))
        return boltzmann_policy(mdp, r, m->beta, opts);
    if (const auto* m = std::get_if<MceModel>(&model.kind)) return mce_policy(mdp, r, m->alpha, opts);
    if (const auto* m = std::get_if<FVariantModel>(&model.kind))
        return fvariant_policy(mdp, r, m->spec, opts);
    const ActionSetPolicy sets = optimal_set_policy(mdp, r, opts);
    const std::size_t na = mdp.n_actions();
    numvec probs(mdp.n_states() * na, 0.0);
    for (std::size_t s = 0; s < mdp.n_states(); ++s)
        for (std::size_t a : sets[s]) probs[s * na + a] = 1.0 / prec_t(sets[s].size());
    return StochasticPolicy(mdp.n_states(), na, std::move(probs));
}

// *************************************************************************************
// **** Inversion
// *************************************************************************************

RewardTable invert_boltzmann(const StochasticPolicy& pi, prec_t beta, const Mdp& mdp) {
    require_positive(beta, "beta");
    check_compatible(mdp, pi);
    require_positive_probs(pi);
    const std::size_t ns = mdp.n_states(), na = mdp.n_actions();
    numvec q(ns * na);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::log(pi.probs()[i]) / beta;
    numvec vmax(ns);
    for (std::size_t s = 0; s < ns; ++s) vmax[s] = *std::max_element(&q[s * na], &q[s * na] + na);

    RewardTable out = RewardTable::zeros(ns, na);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t sn = 0; sn < ns; ++sn)
                out.at(s, a, sn) = q[s * na + a] - mdp.discount() * vmax[sn];
    return out;
}

RewardTable invert_mce(const StochasticPolicy& pi, prec_t alpha) {
    require_positive(alpha, "alpha");
    require_positive_probs(pi);
    numvec sa(pi.probs().size());
    for (std::size_t i = 0; i < sa.size(); ++i) sa[i] = alpha * std::log(pi.probs()[i]);
    return RewardTable::from_sa(pi.n_states(), pi.n_actions(), sa);
}

} // namespace irl
