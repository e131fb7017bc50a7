#pragma once

// Validation and structural queries over the MDP data model.

#include "irlkit/types.hpp"

#include <cstdint>
#include <vector>

namespace irl {

/// Probability tolerance used when validating inputs.
inline constexpr prec_t probability_tolerance = 1e-9;

/// Default bound on n_actions^n_states for brute-force policy enumeration.
inline constexpr std::uint64_t default_enumeration_cap = 65536;

/**
 * Checks every invariant of an MDP and lists all violations.
 *
 * Rules: "row-sum" and "negative-prob" for transition rows, "mu0-sum" and
 * "mu0-negative" for the initial distribution, "non-finite" for NaN/inf,
 * "discount-range" unless 0 < gamma < 1, and "unreachable-state" for states
 * not reachable from supp(mu0) on the support graph of tau.
 *
 * Throws StructuralError when the flat tensors do not have the declared shape.
 */
ValidationReport validate_mdp(const Mdp& mdp);

/// States reachable from supp(mu0) through positive-probability transitions of
/// any action.
std::vector<bool> reachable_states(const Mdp& mdp);

/// True iff tau(s, a, .) = tau(s, a', .) for all s, a, a' within 1e-12 (L-inf).
bool is_trivial_transition(const Mdp& mdp);

/// n_actions^n_states, or nullopt-like saturation to UINT64_MAX on overflow.
std::uint64_t deterministic_policy_count(std::size_t n_states, std::size_t n_actions);

/**
 * All deterministic policies as one-hot stochastic policies, in lexicographic
 * order of (action at s0, action at s1, ...), with s0 most significant.
 *
 * Throws CapacityError when n_actions^n_states exceeds cap.
 */
std::vector<StochasticPolicy> enumerate_deterministic_policies(
    const Mdp& mdp, std::uint64_t cap = default_enumeration_cap);

/// Action choice per state for the i-th policy of enumerate_deterministic_policies.
indvec deterministic_policy_actions(std::uint64_t index, std::size_t n_states,
                                    std::size_t n_actions);

/// Embeds an SA- or S-domain reward in the SAS domain; SAS input is copied.
RewardTable lift_reward(const RewardTable& reward);

/// Throws StructuralError if the reward's state/action counts differ from the MDP's.
void check_compatible(const Mdp& mdp, const RewardTable& reward);
void check_compatible(const Mdp& mdp, const StochasticPolicy& policy);

} // namespace irl
