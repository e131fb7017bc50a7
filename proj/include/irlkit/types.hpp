#pragma once

// Core data model: finite MDPs, reward tables, policies and validation reports.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace irl {

using prec_t = double;
using numvec = std::vector<prec_t>;
using indvec = std::vector<std::size_t>;

// *************************************************************************************
// **** Errors
// *************************************************************************************

/// Input tensors do not have the declared shape.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An enumeration or search would exceed its configured capacity.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver did not reach the requested residual within its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, prec_t residual)
        : std::runtime_error(what), residual_(residual) {}
    prec_t residual() const { return residual_; }

private:
    prec_t residual_;
};

/// A linear solve failed or returned a result that does not satisfy its system.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two independent routes disagreed. Signals a bug or a tolerance breach.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Random instance generation exhausted its rejection budget.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// *************************************************************************************
// **** MDP
// *************************************************************************************

/**
 * Finite MDP without a reward: states, actions, transition tensor, initial
 * distribution and discount.
 *
 * The transition tensor is stored row-major as tau[(s * n_actions + a) * n_states + s'],
 * so every (s, a) row is a contiguous span of n_states probabilities.
 */
class Mdp {
public:
    Mdp() = default;

    /// Takes ownership of flat tensors. Shape is checked, probabilities are not
    /// (see validate_mdp).
    Mdp(std::size_t n_states, std::size_t n_actions, numvec transition, numvec initial,
        prec_t discount);

    /// Builds from nested [s][a][s'] arrays; throws StructuralError on ragged input.
    static Mdp from_nested(const std::vector<std::vector<numvec>>& transition,
                           numvec initial, prec_t discount);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t n_pairs() const { return n_states_ * n_actions_; }
    prec_t discount() const { return discount_; }
    const numvec& initial() const { return initial_; }
    const numvec& transition() const { return transition_; }

    prec_t tau(std::size_t s, std::size_t a, std::size_t s_next) const {
        return transition_[(s * n_actions_ + a) * n_states_ + s_next];
    }

    /// Successor distribution of (s, a); length n_states.
    const prec_t* row(std::size_t s, std::size_t a) const {
        return transition_.data() + (s * n_actions_ + a) * n_states_;
    }

    Mdp with_discount(prec_t discount) const;
    Mdp with_transition(numvec transition) const;
    Mdp with_initial(numvec initial) const;

    /// Optional human-readable labels; empty when absent.
    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;

    std::string state_name(std::size_t s) const;
    std::string action_name(std::size_t a) const;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    numvec transition_;
    numvec initial_;
    prec_t discount_ = 0.0;
};

// *************************************************************************************
// **** Rewards
// *************************************************************************************

/// Restriction of a reward to a sub-domain of S x A x S.
enum class RewardDomain { SAS, SA, S };

const char* to_string(RewardDomain domain);
RewardDomain parse_domain(const std::string& text);

/**
 * Reward R(s, a, s') stored as a full tensor with a domain tag.
 *
 * A table tagged SA is constant over s'; a table tagged S is constant over
 * (a, s'). The tag is a claim about the values, checked by check_domain().
 */
class RewardTable {
public:
    RewardTable() = default;
    RewardTable(std::size_t n_states, std::size_t n_actions, numvec values,
                RewardDomain domain = RewardDomain::SAS);

    static RewardTable zeros(std::size_t n_states, std::size_t n_actions,
                             RewardDomain domain = RewardDomain::SAS);
    static RewardTable from_sa(std::size_t n_states, std::size_t n_actions,
                               const numvec& sa_values);
    static RewardTable from_s(std::size_t n_states, std::size_t n_actions,
                              const numvec& s_values);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    RewardDomain domain() const { return domain_; }
    const numvec& values() const { return values_; }
    numvec& mutable_values() { return values_; }

    prec_t operator()(std::size_t s, std::size_t a, std::size_t s_next) const {
        return values_[(s * n_actions_ + a) * n_states_ + s_next];
    }
    prec_t& at(std::size_t s, std::size_t a, std::size_t s_next) {
        return values_[(s * n_actions_ + a) * n_states_ + s_next];
    }
    const prec_t* row(std::size_t s, std::size_t a) const {
        return values_.data() + (s * n_actions_ + a) * n_states_;
    }

    /// Largest absolute entry.
    prec_t max_abs() const;

    /// True iff the values respect the domain tag exactly and are all finite.
    bool check_domain() const;

    RewardTable with_domain(RewardDomain domain) const;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    numvec values_;
    RewardDomain domain_ = RewardDomain::SAS;
};

// *************************************************************************************
// **** Policies
// *************************************************************************************

/// Probability threshold for membership in the full-support policy set.
inline constexpr prec_t full_support_floor = 1e-12;

/// Stationary stochastic policy pi(a|s), row-major [s][a].
class StochasticPolicy {
public:
    StochasticPolicy() = default;
    StochasticPolicy(std::size_t n_states, std::size_t n_actions, numvec probs);

    static StochasticPolicy uniform(std::size_t n_states, std::size_t n_actions);
    static StochasticPolicy deterministic(std::size_t n_actions, const indvec& actions);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    const numvec& probs() const { return probs_; }

    prec_t operator()(std::size_t s, std::size_t a) const {
        return probs_[s * n_actions_ + a];
    }
    const prec_t* row(std::size_t s) const { return probs_.data() + s * n_actions_; }

    /// Every entry at least full_support_floor.
    bool full_support() const;
    /// Every entry strictly positive.
    bool strictly_positive() const;
    /// Rows are probability vectors within tol.
    bool is_stochastic(prec_t tol = 1e-9) const;

    prec_t linf_distance(const StochasticPolicy& other) const;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    numvec probs_;
};

/// Per-state non-empty sets of actions, each sorted ascending.
class ActionSetPolicy {
public:
    ActionSetPolicy() = default;
    explicit ActionSetPolicy(std::vector<indvec> sets);

    std::size_t n_states() const { return sets_.size(); }
    const indvec& operator[](std::size_t s) const { return sets_[s]; }
    const std::vector<indvec>& sets() const { return sets_; }

    bool contains(std::size_t s, std::size_t a) const;

    /// First state whose sets differ, if any.
    std::optional<std::size_t> first_difference(const ActionSetPolicy& other) const;

    bool operator==(const ActionSetPolicy& other) const { return sets_ == other.sets_; }

private:
    std::vector<indvec> sets_;
};

// *************************************************************************************
// **** Validation
// *************************************************************************************

struct Violation {
    std::string rule;
    std::string location;
    prec_t magnitude = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

} // namespace irl
