#pragma once

// Exact and iterative solvers: policy evaluation, optimal and soft-optimal
// values, occupancy measures, controllability and a Monte-Carlo return oracle.

#include "irlkit/types.hpp"

#include <cstdint>

namespace irl {

struct SolverOptions {
    /// Sup-norm Bellman residual target, relative to max(1, max |R|).
    prec_t tol = 1e-10;
    /// Actions with advantage >= -tie_tol are counted as optimal.
    prec_t tie_tol = 1e-8;
    std::uint64_t max_iterations = 1'000'000;
};

/// Expected immediate reward per (s, a), row-major [s][a].
struct RewardVector {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec r;

    prec_t operator()(std::size_t s, std::size_t a) const { return r[s * n_actions + a]; }
};

struct ValueBundle {
    numvec v;      ///< V[s]
    numvec q;      ///< Q[s][a], row-major
    prec_t j = 0;  ///< sum_s mu0[s] V[s]
    prec_t residual = 0;
};

struct OptimalBundle {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec q_star;
    numvec v_star;
    numvec a_star;
    ActionSetPolicy opt_sets;
    prec_t residual = 0;
    std::uint64_t iterations = 0;

    prec_t q(std::size_t s, std::size_t a) const { return q_star[s * n_actions + a]; }
    prec_t advantage(std::size_t s, std::size_t a) const { return a_star[s * n_actions + a]; }
};

struct SoftBundle {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec q_soft;
    numvec v_soft;
    prec_t alpha = 1;
    prec_t residual = 0;
    std::uint64_t iterations = 0;
};

/// Discounted state-action visitation d[s,a] and its state marginal w[s].
struct OccupancyVector {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec d;
    numvec w;

    prec_t operator()(std::size_t s, std::size_t a) const { return d[s * n_actions + a]; }
    prec_t total() const;
    prec_t dot(const RewardVector& r) const;
};

struct Controllability {
    indvec states;
    /// True when the deterministic-policy enumeration exceeded its cap and the
    /// result comes from random policy pairs instead.
    bool sampled = false;
};

struct MonteCarloEstimate {
    prec_t mean = 0;
    prec_t std_error = 0;
};

/// Sum over s' of tau[s][a][s'] * R(s, a, s').
RewardVector reward_vector(const RewardTable& r, const Mdp& mdp);

/**
 * Exact V^pi, Q^pi and J(pi) by a dense solve of (I - gamma T^pi) V = R^pi.
 *
 * Throws SolverError when the solve fails or leaves a Bellman residual above
 * 1e-8 * max(1, max |R|) / (1 - gamma).
 */
ValueBundle policy_evaluate(const Mdp& mdp, const RewardTable& r, const StochasticPolicy& pi);

/**
 * Optimal Q*, V*, A* and the per-state sets of optimal actions.
 *
 * Runs value iteration until the sup-norm Bellman-optimality residual is at
 * most opts.tol * max(1, max |R|), then polishes the greedy policy with exact
 * policy-iteration steps so that Q* carries linear-solve accuracy. The set of
 * optimal actions in s is {a : A*(s, a) >= -opts.tie_tol}.
 *
 * Throws ConvergenceError when the iteration cap is hit.
 */
OptimalBundle optimal_values(const Mdp& mdp, const RewardTable& r, const SolverOptions& opts = {});

/// One deterministic optimal policy: the lowest-index optimal action per state.
StochasticPolicy greedy_policy(const OptimalBundle& bundle);

/// Smallest per-state gap between the best and the second-best Q* value
/// (infinity for single-action MDPs).
prec_t advantage_gap(const OptimalBundle& bundle);

/**
 * Soft value iteration: q(s,a) = E[R + gamma v(S')], v(s) = alpha log sum_a exp(q(s,a)/alpha).
 *
 * The log-sum-exp subtracts the per-state maximum, so alpha down to 1e-6 is safe.
 */
SoftBundle soft_optimal_values(const Mdp& mdp, const RewardTable& r, prec_t alpha,
                               const SolverOptions& opts = {});

/// pi(a|s) proportional to exp(q_soft(s,a) / alpha).
StochasticPolicy soft_policy(const SoftBundle& bundle);

/// Max over (s) of |v(s) - alpha log sum exp(q(s,.)/alpha)| and of the one-step backup of q.
prec_t soft_fixed_point_residual(const Mdp& mdp, const RewardTable& r, const SoftBundle& bundle);

/// d[s,a] = w[s] pi(a|s) with w solving w = mu0 + gamma (T^pi)^T w.
OccupancyVector occupancy(const Mdp& mdp, const StochasticPolicy& pi);

/// Discounted probability of entering each state from t = 1 on: w - mu0.
numvec entry_measure(const Mdp& mdp, const StochasticPolicy& pi);

/**
 * States whose entry measure differs between two policies by more than 1e-9.
 *
 * Enumerates deterministic policies when there are at most `cap` of them;
 * otherwise compares `sample_pairs` random deterministic policy pairs and sets
 * the `sampled` flag.
 */
Controllability controllable_states(const Mdp& mdp, std::uint64_t cap = 4096,
                                    std::size_t sample_pairs = 512);

/// Mean and standard error of the return truncated at `horizon`, over `n`
/// episodes drawn from the stream `seed`.
MonteCarloEstimate mc_return(const Mdp& mdp, const RewardTable& r, const StochasticPolicy& pi,
                             std::size_t horizon, std::size_t n, std::uint64_t seed);

/// gamma^horizon * max|R| / (1 - gamma): bound on the truncation bias of mc_return.
prec_t truncation_bound(const Mdp& mdp, const RewardTable& r, std::size_t horizon);

} // namespace irl
