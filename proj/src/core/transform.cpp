#include "irlkit/transform.hpp"

#include "irlkit/kernels.hpp"
#include "irlkit/mdp.hpp"
#include "irlkit/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace irl {

// *************************************************************************************
// **** Constructors
// *************************************************************************************

TransformSpec TransformSpec::ps(numvec phi, bool zero_initial) {
    return {PotentialShaping{PotentialFn{std::move(phi), zero_initial}}};
}
TransformSpec TransformSpec::sr(RewardTable replacement) {
    return {SRedistribution{std::move(replacement)}};
}
TransformSpec TransformSpec::ls(prec_t c) { return {LinearScaling{c}}; }
TransformSpec TransformSpec::cs(prec_t k) { return {ConstantShift{k}}; }
TransformSpec TransformSpec::op(numvec psi, numvec slack) {
    return {OptimalityPreserving{std::move(psi), std::move(slack)}};
}
TransformSpec TransformSpec::seq(std::vector<TransformSpec> steps) {
    return {Sequence{std::move(steps)}};
}

// *************************************************************************************
// **** Application
// *************************************************************************************

namespace {

prec_t linf(const numvec& x) {
    prec_t m = 0.0;
    for (prec_t v : x) m = std::max(m, std::abs(v));
    return m;
}

RewardTable apply_shaping(const numvec& phi, const RewardTable& r, const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    if (phi.size() != ns) throw TransformError("potential has the wrong number of states");
    RewardTable out = lift_reward(r);
    const prec_t gamma = mdp.discount();
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a)
            for (std::size_t sn = 0; sn < ns; ++sn) out.at(s, a, sn) += gamma * phi[sn] - phi[s];
    return out;
}

RewardTable apply_redistribution(const RewardTable& replacement, const RewardTable& r,
                                 const Mdp& mdp) {
    check_compatible(mdp, replacement);
    const RewardVector before = reward_vector(r, mdp);
    const RewardVector after = reward_vector(replacement, mdp);
    const prec_t scale = std::max({prec_t(1.0), linf(before.r), linf(after.r)});
    for (std::size_t i = 0; i < before.r.size(); ++i)
        if (std::abs(before.r[i] - after.r[i]) > 1e-10 * scale)
            throw TransformError("S'-redistribution replacement changes the expected reward of (" +
                                 mdp.state_name(i / mdp.n_actions()) + "," +
                                 mdp.action_name(i % mdp.n_actions()) + ")");
    return lift_reward(replacement);
}

RewardTable apply_optimality_preserving(const OptimalityPreserving& op, const RewardTable& r,
                                        const Mdp& mdp, const SolverOptions& opts) {
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    if (op.psi.size() != ns || op.slack.size() != ns * na)
        throw TransformError("optimality-preserving parameters have the wrong shape");
    const OptimalBundle opt = optimal_values(mdp, r, opts);
    const prec_t gamma = mdp.discount();
    RewardTable out = RewardTable::zeros(ns, na);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            prec_t slack = 0.0;
            if (!opt.opt_sets.contains(s, a)) {
                slack = op.slack[s * na + a];
                if (!(slack < 0.0))
                    throw TransformError("slack must be strictly negative on non-optimal pair (" +
                                         mdp.state_name(s) + "," + mdp.action_name(a) + ")");
            }
            for (std::size_t sn = 0; sn < ns; ++sn)
                out.at(s, a, sn) = op.psi[s] - gamma * op.psi[sn] + slack;
        }
    return out;
}

} // namespace

RewardTable apply(const TransformSpec& t, const RewardTable& r, const Mdp& mdp,
                  const SolverOptions& opts) {
    check_compatible(mdp, r);
    return std::visit(
        [&](const auto& kind) -> RewardTable {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, PotentialShaping>) {
                return apply_shaping(kind.potential.phi, r, mdp);
            } else if constexpr (std::is_same_v<K, SRedistribution>) {
                return apply_redistribution(kind.replacement, r, mdp);
            } else if constexpr (std::is_same_v<K, LinearScaling>) {
                if (!(kind.c > 0.0)) throw TransformError("linear scaling needs c > 0");
                RewardTable out = lift_reward(r);
                for (prec_t& v : out.mutable_values()) v *= kind.c;
                return out;
            } else if constexpr (std::is_same_v<K, ConstantShift>) {
                RewardTable out = lift_reward(r);
                for (prec_t& v : out.mutable_values()) v += kind.k;
                return out;
            } else if constexpr (std::is_same_v<K, OptimalityPreserving>) {
                return apply_optimality_preserving(kind, r, mdp, opts);
            } else {
                RewardTable out = lift_reward(r);
                for (const auto& step : kind.steps) out = apply(step, out, mdp, opts);
                return out;
            }
        },
        t.kind);
}

// *************************************************************************************
// **** Samplers
// *************************************************************************************

TransformSpec sample_potential_shaping(const Mdp& mdp, prec_t bounds, bool zero_initial,
                                       std::uint64_t seed) {
    if (bounds < 0.0) throw std::invalid_argument("potential bounds must be non-negative");
    Rng rng(seed);
    const std::size_t ns = mdp.n_states();
    numvec phi(ns);
    for (auto& p : phi) p = rng.uniform(-bounds, bounds);
    if (zero_initial) {
        // Orthogonal projection onto {phi : mu0 . phi = 0}.
        const numvec& mu0 = mdp.initial();
        const prec_t along = kernels::dot(mu0, phi) / kernels::dot(mu0, mu0);
        for (std::size_t s = 0; s < ns; ++s) phi[s] -= along * mu0[s];
    }
    return TransformSpec::ps(std::move(phi), zero_initial);
}

TransformSpec sample_s_redistribution(const Mdp& mdp, const RewardTable& r, prec_t magnitude,
                                      std::uint64_t seed) {
    check_compatible(mdp, r);
    if (magnitude < 0.0) throw std::invalid_argument("redistribution magnitude must be non-negative");
    Rng rng(seed);
    const std::size_t ns = mdp.n_states();
    RewardTable out = lift_reward(r);
    numvec delta(ns);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const prec_t* tau = mdp.row(s, a);
            for (std::size_t sn = 0; sn < ns; ++sn)
                delta[sn] = tau[sn] > 0.0 ? rng.uniform(-magnitude, magnitude)
                                          : rng.uniform(-10.0 * magnitude, 10.0 * magnitude);
            // Centre the on-support part so its tau-expectation vanishes.
            const prec_t mean = kernels::dot({tau, ns}, delta);
            for (std::size_t sn = 0; sn < ns; ++sn)
                if (tau[sn] > 0.0) delta[sn] -= mean;
            for (std::size_t sn = 0; sn < ns; ++sn) out.at(s, a, sn) += delta[sn];
        }
    return TransformSpec::sr(std::move(out));
}

TransformSpec sample_optimality_preserving(const Mdp& mdp, const RewardTable& r, prec_t bounds,
                                           std::uint64_t seed, const SolverOptions& opts) {
    if (!(bounds > 0.0)) throw std::invalid_argument("OP bounds must be positive");
    const OptimalBundle opt = optimal_values(mdp, r, opts);
    Rng rng(seed);
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    numvec psi(ns);
    for (auto& p : psi) p = rng.uniform(-bounds, bounds);
    numvec slack(ns * na, 0.0);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            const prec_t draw = rng.uniform(1e-3 * bounds, bounds);
            if (!opt.opt_sets.contains(s, a)) slack[s * na + a] = -draw;
        }
    return TransformSpec::op(std::move(psi), std::move(slack));
}

// *************************************************************************************
// **** Certificates
// *************************************************************************************

namespace {

Eigen::MatrixXd shaping_matrix_dense(const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    Eigen::MatrixXd m(ns * na, ns);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t sn = 0; sn < ns; ++sn)
                m(s * na + a, sn) = mdp.discount() * mdp.tau(s, a, sn) - (sn == s ? 1.0 : 0.0);
    return m;
}

Eigen::VectorXd as_vector(const RewardVector& rv) {
    return Eigen::Map<const Eigen::VectorXd>(rv.r.data(), Eigen::Index(rv.r.size()));
}

struct LeastSquares {
    Eigen::VectorXd x;
    prec_t residual;
};

LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
    return {x, (a * x - b).lpNorm<Eigen::Infinity>()};
}

PotentialFn to_potential(const Eigen::VectorXd& x, Eigen::Index offset, std::size_t ns,
                         bool zero_initial) {
    PotentialFn p;
    p.phi.assign(x.data() + offset, x.data() + offset + Eigen::Index(ns));
    p.zero_initial_expectation = zero_initial;
    return p;
}

} // namespace

std::vector<numvec> shaping_matrix(const Mdp& mdp) {
    const Eigen::MatrixXd m = shaping_matrix_dense(mdp);
    std::vector<numvec> out(std::size_t(m.rows()), numvec(std::size_t(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[std::size_t(i)][std::size_t(j)] = m(i, j);
    return out;
}

bool is_j_constant(const RewardTable& r, const Mdp& mdp) {
    const Eigen::VectorXd rv = as_vector(reward_vector(r, mdp));
    const prec_t tol = decomposition_tolerance * std::max<prec_t>(1.0, rv.lpNorm<Eigen::Infinity>());
    return least_squares(shaping_matrix_dense(mdp), rv).residual <= tol;
}

std::optional<Decomposition> decompose_ord(const RewardTable& r1, const RewardTable& r2,
                                           const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    const Eigen::VectorXd v1 = as_vector(reward_vector(r1, mdp));
    const Eigen::VectorXd v2 = as_vector(reward_vector(r2, mdp));
    const Eigen::MatrixXd m = shaping_matrix_dense(mdp);
    const prec_t tol = decomposition_tolerance *
                       std::max({prec_t(1.0), v1.lpNorm<Eigen::Infinity>(), v2.lpNorm<Eigen::Infinity>()});

    const LeastSquares fit1 = least_squares(m, v1);
    if (fit1.residual <= tol) {
        // R1 is J-constant: every policy ties, so R2 must be J-constant too.
        const LeastSquares fit2 = least_squares(m, v2);
        if (fit2.residual > tol) return std::nullopt;
        Decomposition d;
        d.c = 1.0;
        d.phi = to_potential(fit2.x - fit1.x, 0, ns, false);
        d.residual = (v1 + m * (fit2.x - fit1.x) - v2).lpNorm<Eigen::Infinity>();
        d.degenerate = true;
        return d;
    }

    Eigen::MatrixXd a(m.rows(), m.cols() + 1);
    a.col(0) = v1;
    a.rightCols(m.cols()) = m;
    const LeastSquares fit = least_squares(a, v2);
    const prec_t c = fit.x[0];
    // c must be positive by more than the noise: the part of R2 outside span(M)
    // is c times the part of R1 outside it.
    if (fit.residual > tol || !(c * fit1.residual > tol)) return std::nullopt;
    Decomposition d;
    d.c = c;
    d.phi = to_potential(fit.x, 1, ns, false);
    d.residual = fit.residual;
    return d;
}

std::optional<Decomposition> decompose_j(const RewardTable& r1, const RewardTable& r2,
                                         const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    const Eigen::VectorXd v1 = as_vector(reward_vector(r1, mdp));
    const Eigen::VectorXd v2 = as_vector(reward_vector(r2, mdp));
    const Eigen::MatrixXd m = shaping_matrix_dense(mdp);
    const prec_t tol = decomposition_tolerance *
                       std::max({prec_t(1.0), v1.lpNorm<Eigen::Infinity>(), v2.lpNorm<Eigen::Infinity>()});

    // M has full column rank for gamma < 1, so the unconstrained fit is the
    // unique candidate; the initial-expectation constraint is checked on it.
    const LeastSquares fit = least_squares(m, v2 - v1);
    const Eigen::Map<const Eigen::VectorXd> mu0(mdp.initial().data(), Eigen::Index(ns));
    const prec_t initial = std::abs(mu0.dot(fit.x));
    const prec_t residual = std::max(fit.residual, initial);
    if (residual > tol) return std::nullopt;
    Decomposition d;
    d.c = 1.0;
    d.phi = to_potential(fit.x, 0, ns, true);
    d.residual = residual;
    return d;
}

std::optional<Decomposition> fit_shaping_scaling(const RewardTable& r1, const RewardTable& r2,
                                                 prec_t discount) {
    if (r1.n_states() != r2.n_states() || r1.n_actions() != r2.n_actions())
        throw StructuralError("rewards have different shapes");
    const std::size_t ns = r1.n_states();
    const std::size_t na = r1.n_actions();
    const std::size_t rows = ns * na * ns;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(Eigen::Index(rows), Eigen::Index(ns + 1));
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t act = 0; act < na; ++act)
            for (std::size_t sn = 0; sn < ns; ++sn) {
                const auto row = Eigen::Index((s * na + act) * ns + sn);
                a(row, 0) = r1(s, act, sn);
                a(row, Eigen::Index(1 + sn)) += discount;
                a(row, Eigen::Index(1 + s)) -= 1.0;
                b[row] = r2(s, act, sn);
            }
    const prec_t tol = decomposition_tolerance * std::max({prec_t(1.0), r1.max_abs(), r2.max_abs()});
    const LeastSquares fit = least_squares(a, b);
    if (fit.residual > tol || !(fit.x[0] > 0.0)) return std::nullopt;
    Decomposition d;
    d.c = fit.x[0];
    d.phi = to_potential(fit.x, 1, ns, false);
    d.residual = fit.residual;
    return d;
}

RewardTable shaping_on_sa_domain(const PotentialFn& phi, const RewardTable& r, const Mdp& mdp) {
    check_compatible(mdp, r);
    if (r.domain() != RewardDomain::SA)
        throw TransformError("shaping_on_sa_domain needs an SA-domain reward");
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    if (phi.phi.size() != ns) throw TransformError("potential has the wrong number of states");
    numvec sa(ns * na);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a)
            sa[s * na + a] = r(s, a, 0) + mdp.discount() * kernels::dot({mdp.row(s, a), ns}, phi.phi) -
                             phi.phi[s];
    return RewardTable::from_sa(ns, na, sa);
}

} // namespace irl
