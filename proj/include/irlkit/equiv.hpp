#pragma once

// Deciders for reward equivalence in a fixed MDP: same optimal policies (OPT),
// same ordering of all policies (ORD) and identical evaluation functions (JEQ).

#include "irlkit/mdp.hpp"
#include "irlkit/solve.hpp"
#include "irlkit/transform.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace irl {

enum class Relation { OPT, ORD, JEQ };

const char* to_string(Relation relation);
Relation parse_relation(const std::string& text);

/// Evidence that two rewards are not equivalent.
struct Witness {
    /// OPT: first state whose optimal action sets differ.
    std::optional<std::size_t> state;
    /// ORD: two policies ordered differently by the rewards. JEQ: one policy
    /// with different J.
    std::vector<StochasticPolicy> policies;
    /// J of each policy under r1 and r2.
    numvec j1;
    numvec j2;
    std::string note;
};

struct EquivVerdict {
    bool equivalent = false;
    Relation relation = Relation::OPT;
    std::optional<Decomposition> certificate;
    std::optional<Witness> witness;
    /// Set when the brute-force cross-check ran.
    bool cross_checked = false;
};

struct EquivOptions {
    SolverOptions solver;
    /// Deterministic-policy enumeration bound for the brute-force cross-check.
    std::uint64_t cap = default_enumeration_cap;
    bool cross_check = true;
};

/// J of every deterministic policy in enumeration order, plus tie-grouped ranks.
struct OrderSignature {
    numvec j;
    /// rank[i] = tie group of policy i; 0 is the best group.
    indvec rank;
    std::size_t n_groups = 0;
};

/// Tolerance used to group equal J values.
inline constexpr prec_t signature_tie_tolerance = 1e-9;

OrderSignature order_signature(const RewardTable& r, const Mdp& mdp,
                               std::uint64_t cap = default_enumeration_cap);

/**
 * True iff the two J vectors are related by b = k a + m with k > 0, or both are
 * constant.
 *
 * J is linear in the occupancy measure and every occupancy is a convex
 * combination of deterministic ones, so this is equivalent to both rewards
 * ordering every (stochastic) policy the same way. Equal rankings of the
 * deterministic policies alone are necessary but not sufficient.
 */
bool signatures_order_equivalent(const OrderSignature& a, const OrderSignature& b);

/// True iff the J vectors agree entrywise within 1e-8 relative.
bool signatures_j_equal(const OrderSignature& a, const OrderSignature& b);

/// True iff the tie-grouped rankings coincide.
bool same_ranking(const OrderSignature& a, const OrderSignature& b);

EquivVerdict opt_equivalent(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                            const EquivOptions& opts = {});

/**
 * ORD decision via the linear certificate (decompose_ord). Within the cap the
 * verdict is cross-checked against signatures_order_equivalent; a disagreement
 * throws ConsistencyError.
 */
EquivVerdict ord_equivalent(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                            const EquivOptions& opts = {});

/// JEQ decision via decompose_j, cross-checked like ord_equivalent.
EquivVerdict j_equal(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                     const EquivOptions& opts = {});

EquivVerdict decide(Relation relation, const RewardTable& r1, const RewardTable& r2,
                    const Mdp& mdp, const EquivOptions& opts = {});

/**
 * P refines Q: every class of P (items with equal p-label) lies inside one
 * class of Q. Throws std::invalid_argument on length mismatch.
 */
template <class P, class Q>
bool refines(const std::vector<P>& p_labels, const std::vector<Q>& q_labels) {
    if (p_labels.size() != q_labels.size())
        throw std::invalid_argument("label sequences differ in length");
    std::map<P, Q> image;
    for (std::size_t i = 0; i < p_labels.size(); ++i) {
        auto [it, inserted] = image.emplace(p_labels[i], q_labels[i]);
        if (!inserted && !(it->second == q_labels[i])) return false;
    }
    return true;
}

/// Policy whose occupancy measure is d (states with zero visitation act uniformly).
StochasticPolicy policy_from_occupancy(const OccupancyVector& d);

} // namespace irl
