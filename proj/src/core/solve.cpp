#include "irlkit/solve.hpp"

#include "irlkit/kernels.hpp"
#include "irlkit/mdp.hpp"
#include "irlkit/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace irl {

namespace {

prec_t reward_scale(const RewardTable& r) { return std::max<prec_t>(1.0, r.max_abs()); }

/// T^pi as a dense |S| x |S| matrix.
Eigen::MatrixXd policy_transition(const Mdp& mdp, const StochasticPolicy& pi) {
    const std::size_t ns = mdp.n_states();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ns, ns);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const prec_t p = pi(s, a);
            if (p == 0.0) continue;
            const prec_t* row = mdp.row(s, a);
            for (std::size_t sn = 0; sn < ns; ++sn) t(s, sn) += p * row[sn];
        }
    return t;
}

/// Q(s,a) = E[R(s,a,S') + gamma V(S')] for every pair.
numvec backup_all(const Mdp& mdp, const RewardTable& r, const numvec& v) {
    const std::size_t ns = mdp.n_states();
    const auto& k = kernels::active();
    numvec q(mdp.n_pairs());
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a)
            q[s * mdp.n_actions() + a] =
                k.backup(mdp.row(s, a), r.row(s, a), v.data(), mdp.discount(), ns);
    return q;
}

numvec row_max(const numvec& q, std::size_t ns, std::size_t na) {
    const auto& k = kernels::active();
    numvec v(ns);
    for (std::size_t s = 0; s < ns; ++s) v[s] = k.max(q.data() + s * na, na);
    return v;
}

prec_t sup_distance(const numvec& x, const numvec& y) {
    prec_t d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

/// Exact V^pi; throws SolverError on a non-finite or inaccurate solution.
numvec solve_values(const Mdp& mdp, const RewardTable& r, const StochasticPolicy& pi,
                    const RewardVector& rv) {
    const std::size_t ns = mdp.n_states();
    const prec_t gamma = mdp.discount();
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns) - gamma * policy_transition(mdp, pi);
    Eigen::VectorXd rhs(ns);
    for (std::size_t s = 0; s < ns; ++s)
        rhs[s] = kernels::dot({pi.row(s), mdp.n_actions()}, {rv.r.data() + s * mdp.n_actions(), mdp.n_actions()});
    Eigen::VectorXd v = system.partialPivLu().solve(rhs);
    if (!v.allFinite()) throw SolverError("policy evaluation produced non-finite values");
    const prec_t residual = (system * v - rhs).lpNorm<Eigen::Infinity>();
    if (residual > 1e-8 * reward_scale(r) / (1.0 - gamma))
        throw SolverError("policy evaluation residual " + std::to_string(residual) +
                          " exceeds the accuracy bound");
    return numvec(v.data(), v.data() + ns);
}

} // namespace

// *************************************************************************************
// **** Reward vectors and policy evaluation
// *************************************************************************************

RewardVector reward_vector(const RewardTable& r, const Mdp& mdp) {
    check_compatible(mdp, r);
    const std::size_t ns = mdp.n_states();
    const auto& k = kernels::active();
    RewardVector out{ns, mdp.n_actions(), numvec(mdp.n_pairs())};
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a)
            out.r[s * mdp.n_actions() + a] = k.dot(mdp.row(s, a), r.row(s, a), ns);
    return out;
}

ValueBundle policy_evaluate(const Mdp& mdp, const RewardTable& r, const StochasticPolicy& pi) {
    check_compatible(mdp, r);
    check_compatible(mdp, pi);
    if (!(mdp.discount() < 1.0)) throw std::invalid_argument("policy evaluation needs gamma < 1");

    ValueBundle out;
    const RewardVector rv = reward_vector(r, mdp);
    out.v = solve_values(mdp, r, pi, rv);
    out.q = backup_all(mdp, r, out.v);
    out.j = kernels::dot(mdp.initial(), out.v);
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        const prec_t expected =
            kernels::dot({pi.row(s), mdp.n_actions()}, {out.q.data() + s * mdp.n_actions(), mdp.n_actions()});
        out.residual = std::max(out.residual, std::abs(expected - out.v[s]));
    }
    return out;
}

// *************************************************************************************
// **** Optimal values
// *************************************************************************************

OptimalBundle optimal_values(const Mdp& mdp, const RewardTable& r, const SolverOptions& opts) {
    check_compatible(mdp, r);
    if (!(mdp.discount() < 1.0)) throw std::invalid_argument("value iteration needs gamma < 1");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    const prec_t threshold = opts.tol * reward_scale(r);

    numvec v(ns, 0.0);
    numvec q;
    prec_t residual = std::numeric_limits<prec_t>::infinity();
    std::uint64_t iterations = 0;
    while (residual > threshold) {
        if (iterations >= opts.max_iterations)
            throw ConvergenceError("value iteration did not converge, residual " +
                                       std::to_string(residual),
                                   residual);
        q = backup_all(mdp, r, v);
        numvec next = row_max(q, ns, na);
        residual = sup_distance(next, v);
        v = std::move(next);
        ++iterations;
    }

    // Policy-iteration polish: exact evaluation of the greedy policy until it is stable.
    q = backup_all(mdp, r, v);
    const RewardVector rv = reward_vector(r, mdp);
    indvec greedy(ns);
    auto improve = [&](const numvec& qv, indvec& actions) {
        bool changed = false;
        for (std::size_t s = 0; s < ns; ++s) {
            const prec_t* row = qv.data() + s * na;
            std::size_t best = actions[s];
            for (std::size_t a = 0; a < na; ++a)
                if (row[a] > row[best] + 1e-15 * std::max<prec_t>(1.0, std::abs(row[best])))
                    best = a;
            if (best != actions[s]) {
                actions[s] = best;
                changed = true;
            }
        }
        return changed;
    };
    for (std::size_t s = 0; s < ns; ++s)
        greedy[s] = std::size_t(std::max_element(q.begin() + s * na, q.begin() + (s + 1) * na) -
                                (q.begin() + s * na));
    for (int step = 0; step < 100; ++step) {
        numvec v_pi = solve_values(mdp, r, StochasticPolicy::deterministic(na, greedy), rv);
        numvec q_pi = backup_all(mdp, r, v_pi);
        const prec_t polished = sup_distance(row_max(q_pi, ns, na), v_pi);
        if (polished <= residual) {
            v = std::move(v_pi);
            q = std::move(q_pi);
            residual = polished;
        }
        if (!improve(q, greedy)) break;
    }

    OptimalBundle out;
    out.n_states = ns;
    out.n_actions = na;
    out.q_star = q;
    out.v_star = row_max(q, ns, na);
    out.residual = sup_distance(out.v_star, v);
    out.iterations = iterations;
    out.a_star.resize(q.size());
    std::vector<indvec> sets(ns);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            const prec_t adv = q[s * na + a] - out.v_star[s];
            out.a_star[s * na + a] = adv;
            if (adv >= -opts.tie_tol) sets[s].push_back(a);
        }
    out.opt_sets = ActionSetPolicy(std::move(sets));
    return out;
}

StochasticPolicy greedy_policy(const OptimalBundle& bundle) {
    indvec actions(bundle.n_states);
    for (std::size_t s = 0; s < bundle.n_states; ++s) actions[s] = bundle.opt_sets[s].front();
    return StochasticPolicy::deterministic(bundle.n_actions, actions);
}

prec_t advantage_gap(const OptimalBundle& bundle) {
    prec_t gap = std::numeric_limits<prec_t>::infinity();
    if (bundle.n_actions < 2) return gap;
    for (std::size_t s = 0; s < bundle.n_states; ++s) {
        numvec row(bundle.q_star.begin() + s * bundle.n_actions,
                   bundle.q_star.begin() + (s + 1) * bundle.n_actions);
        std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
        gap = std::min(gap, row[0] - row[1]);
    }
    return gap;
}

// *************************************************************************************
// **** Soft values
// *************************************************************************************

SoftBundle soft_optimal_values(const Mdp& mdp, const RewardTable& r, prec_t alpha,
                               const SolverOptions& opts) {
    check_compatible(mdp, r);
    if (!(mdp.discount() < 1.0)) throw std::invalid_argument("soft value iteration needs gamma < 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("entropy weight alpha must be positive");

    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    const prec_t threshold = opts.tol * reward_scale(r);

    SoftBundle out;
    out.n_states = ns;
    out.n_actions = na;
    out.alpha = alpha;
    numvec v(ns, 0.0);
    numvec q;
    prec_t residual = std::numeric_limits<prec_t>::infinity();
    std::uint64_t iterations = 0;
    while (residual > threshold) {
        if (iterations >= opts.max_iterations)
            throw ConvergenceError("soft value iteration did not converge, residual " +
                                       std::to_string(residual),
                                   residual);
        q = backup_all(mdp, r, v);
        numvec next(ns);
        for (std::size_t s = 0; s < ns; ++s)
            next[s] = kernels::log_sum_exp({q.data() + s * na, na}, alpha);
        residual = sup_distance(next, v);
        v = std::move(next);
        ++iterations;
    }
    out.q_soft = backup_all(mdp, r, v);
    out.v_soft = std::move(v);
    out.iterations = iterations;
    out.residual = soft_fixed_point_residual(mdp, r, out);
    return out;
}

StochasticPolicy soft_policy(const SoftBundle& bundle) {
    const std::size_t na = bundle.n_actions;
    numvec probs(bundle.n_states * na);
    for (std::size_t s = 0; s < bundle.n_states; ++s)
        kernels::softmax({bundle.q_soft.data() + s * na, na}, bundle.alpha,
                         {probs.data() + s * na, na});
    return StochasticPolicy(bundle.n_states, na, std::move(probs));
}

prec_t soft_fixed_point_residual(const Mdp& mdp, const RewardTable& r, const SoftBundle& bundle) {
    const std::size_t na = mdp.n_actions();
    const numvec q = backup_all(mdp, r, bundle.v_soft);
    prec_t residual = sup_distance(q, bundle.q_soft);
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        const prec_t v = kernels::log_sum_exp({bundle.q_soft.data() + s * na, na}, bundle.alpha);
        residual = std::max(residual, std::abs(v - bundle.v_soft[s]));
    }
    return residual;
}

// *************************************************************************************
// **** Occupancy and controllability
// *************************************************************************************

prec_t OccupancyVector::total() const {
    prec_t t = 0.0;
    for (prec_t x : d) t += x;
    return t;
}

prec_t OccupancyVector::dot(const RewardVector& r) const { return kernels::dot(d, r.r); }

OccupancyVector occupancy(const Mdp& mdp, const StochasticPolicy& pi) {
    check_compatible(mdp, pi);
    if (!(mdp.discount() < 1.0)) throw std::invalid_argument("occupancy needs gamma < 1");
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();

    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns) -
                             mdp.discount() * policy_transition(mdp, pi).transpose();
    Eigen::VectorXd mu0 = Eigen::Map<const Eigen::VectorXd>(mdp.initial().data(), ns);
    Eigen::VectorXd w = system.partialPivLu().solve(mu0);
    if (!w.allFinite()) throw SolverError("occupancy solve produced non-finite values");

    OccupancyVector out{ns, na, numvec(ns * na), numvec(w.data(), w.data() + ns)};
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) out.d[s * na + a] = out.w[s] * pi(s, a);
    return out;
}

numvec entry_measure(const Mdp& mdp, const StochasticPolicy& pi) {
    numvec w = occupancy(mdp, pi).w;
    for (std::size_t s = 0; s < w.size(); ++s) w[s] -= mdp.initial()[s];
    return w;
}

Controllability controllable_states(const Mdp& mdp, std::uint64_t cap, std::size_t sample_pairs) {
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    numvec lo(ns, std::numeric_limits<prec_t>::infinity());
    numvec hi(ns, -std::numeric_limits<prec_t>::infinity());
    auto visit = [&](const indvec& actions) {
        const numvec e = entry_measure(mdp, StochasticPolicy::deterministic(na, actions));
        for (std::size_t s = 0; s < ns; ++s) {
            lo[s] = std::min(lo[s], e[s]);
            hi[s] = std::max(hi[s], e[s]);
        }
    };

    Controllability out;
    const std::uint64_t count = deterministic_policy_count(ns, na);
    if (count <= cap) {
        for (std::uint64_t i = 0; i < count; ++i) visit(deterministic_policy_actions(i, ns, na));
    } else {
        out.sampled = true;
        Rng rng(0x5eed'c0de);
        indvec actions(ns);
        for (std::size_t k = 0; k < 2 * sample_pairs; ++k) {
            for (auto& a : actions) a = std::size_t(rng.index(na));
            visit(actions);
        }
    }
    for (std::size_t s = 0; s < ns; ++s)
        if (hi[s] - lo[s] > 1e-9) out.states.push_back(s);
    return out;
}

// *************************************************************************************
// **** Monte-Carlo oracle
// *************************************************************************************

namespace {

std::size_t draw(Rng& rng, const prec_t* probs, std::size_t n) {
    const prec_t u = rng.uniform();
    prec_t acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

} // namespace

MonteCarloEstimate mc_return(const Mdp& mdp, const RewardTable& r, const StochasticPolicy& pi,
                             std::size_t horizon, std::size_t n, std::uint64_t seed) {
    check_compatible(mdp, r);
    check_compatible(mdp, pi);
    if (n == 0) throw std::invalid_argument("mc_return needs at least one episode");
    Rng rng(seed);
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    prec_t sum = 0.0;
    prec_t sum_sq = 0.0;
    for (std::size_t episode = 0; episode < n; ++episode) {
        std::size_t s = draw(rng, mdp.initial().data(), ns);
        prec_t g = 0.0;
        prec_t discount = 1.0;
        for (std::size_t t = 0; t < horizon; ++t) {
            const std::size_t a = draw(rng, pi.row(s), na);
            const std::size_t sn = draw(rng, mdp.row(s, a), ns);
            g += discount * r(s, a, sn);
            discount *= mdp.discount();
            s = sn;
        }
        sum += g;
        sum_sq += g * g;
    }
    MonteCarloEstimate out;
    out.mean = sum / prec_t(n);
    if (n > 1) {
        const prec_t var = std::max<prec_t>(0.0, (sum_sq - prec_t(n) * out.mean * out.mean) / prec_t(n - 1));
        out.std_error = std::sqrt(var / prec_t(n));
    }
    return out;
}

prec_t truncation_bound(const Mdp& mdp, const RewardTable& r, std::size_t horizon) {
    return std::pow(mdp.discount(), prec_t(horizon)) * r.max_abs() / (1.0 - mdp.discount());
}

} // namespace irl
