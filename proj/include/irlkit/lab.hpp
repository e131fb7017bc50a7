#pragma once

// Seeded instance generators, the claim registry and the constructive
// counterexample searches for misspecified discount and transition functions.

#include "irlkit/equiv.hpp"
#include "irlkit/models.hpp"
#include "irlkit/solve.hpp"
#include "irlkit/transform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace irl {

// *************************************************************************************
// **** Generators
// *************************************************************************************

struct SizeRange {
    std::size_t min = 2;
    std::size_t max = 5;
};

struct MdpGenOptions {
    SizeRange states{2, 5};
    SizeRange actions{2, 3};
    /// Discount drawn uniformly from [lo, hi] unless fixed_discount is set.
    prec_t discount_lo = 0.5;
    prec_t discount_hi = 0.9;
    std::optional<prec_t> fixed_discount;
    /// Probability that an off-diagonal transition entry is forced to zero.
    prec_t sparsity = 0.0;
    /// Every action shares one successor distribution per state.
    bool trivial = false;
    std::size_t budget = 1000;
};

/// Random valid MDP. Rows are Dirichlet(1) draws (normalized exponentials); mu0
/// is one-hot at s0 with probability 1/2, Dirichlet otherwise. Unreachable
/// draws are rejected; throws GenerationError when the budget runs out.
Mdp random_mdp(std::size_t n_states, std::size_t n_actions, std::uint64_t seed,
               const MdpGenOptions& opts = {});

/// As above with sizes drawn from opts.states / opts.actions.
Mdp random_mdp(std::uint64_t seed, const MdpGenOptions& opts = {});

/// Minimum per-state gap between the best and second-best Q* enforced on rewards.
inline constexpr prec_t advantage_gap_floor = 1e-4;

/**
 * Reward with entries uniform in [-bound, bound] (on the requested domain),
 * redrawn until advantage_gap(optimal_values) >= gap_floor. Throws
 * GenerationError when the budget runs out.
 */
RewardTable random_reward(const Mdp& mdp, RewardDomain domain, prec_t bound, std::uint64_t seed,
                          prec_t gap_floor = advantage_gap_floor, std::size_t budget = 1000);

/// Full-support policy with Dirichlet(1) rows, floored at 1e-3 and renormalized.
StochasticPolicy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed);

// *************************************************************************************
// **** Counterexamples
// *************************************************************************************

/// What has to hold for the pair to count as a misspecification instance.
enum class Premise {
    /// r1 and r2 produce the same Boltzmann(beta) policy under model_mdp.
    BoltzmannMatch,
    /// r1 and r2 have the same expected reward per (s, a) under model_mdp.
    RewardVectorMatch,
    /// Boltzmann(beta) of r1 reproduces observed_policy, which Boltzmann(beta) of r2 does not.
    ObservedBoltzmann,
    /// The optimal sets of r1 equal observed_sets, which differ from those of r2.
    ObservedOptimalSets,
};

const char* to_string(Premise premise);
Premise parse_premise(const std::string& text);

/**
 * A pair of rewards that the behavioural model cannot tell apart (premise)
 * but that are not equivalent under `relation` in `mdp`.
 */
struct CounterexampleRecord {
    Mdp mdp;
    RewardTable r1;
    RewardTable r2;
    Relation relation = Relation::OPT;
    Premise premise = Premise::BoltzmannMatch;
    std::optional<Mdp> model_mdp;
    prec_t beta = 1;
    std::optional<StochasticPolicy> observed_policy;
    std::optional<ActionSetPolicy> observed_sets;
    /// State where the optimal sets differ (OPT) when known.
    std::optional<std::size_t> state;
    /// Construction parameters, in insertion order.
    std::vector<std::pair<std::string, prec_t>> parameters;

    prec_t parameter(const std::string& name) const;
};

/// Replays the deciders on the payload; returns false with a reason when the
/// premise or the violation does not reproduce.
bool verify_record(const CounterexampleRecord& record, std::string* reason = nullptr);

struct GammaSearchOptions {
    /// Shaping magnitudes tried in order; empty means +-{1, 10, 100, 1000} * reward_bound.
    numvec x_grid;
    /// After the grid, magnitudes keep growing by 10x up to this bound.
    prec_t x_cap = 1e9;
    prec_t reward_bound = 1;
    /// The lemma excludes gamma1 = gamma2; set to run the search anyway (controls).
    bool allow_equal_discounts = false;
};

/**
 * Shapes a random gap-floored base reward r1 with Phi = X at one controllable
 * state (potential shaping under gamma1) and looks for X such that r1 and r2
 * have different optimal sets under gamma2.
 *
 * The record holds X, the state, p = mu0(state), and for the two witness
 * policies (optimal under r1 and under r2 at gamma2) the discounted entry
 * count n2 of the state and the value difference delta = J2 - J1 under gamma2.
 *
 * Throws std::invalid_argument for discounts outside (0, 1) or, unless
 * allowed, gamma1 = gamma2.
 */
std::optional<CounterexampleRecord> gamma_counterexample(const Mdp& mdp, prec_t gamma1,
                                                         prec_t gamma2, std::uint64_t seed,
                                                         const GammaSearchOptions& opts = {});

/**
 * Perturbs a random base reward along directions with zero expectation under
 * tau1 (S'-redistribution) and growing magnitude, until the optimal sets under
 * tau2 differ. Per differing row, uses entries with tau1 = 0 < tau2 when they
 * exist and the projection of the tau2 row orthogonal to the tau1 row otherwise.
 */
std::optional<CounterexampleRecord> tau_counterexample(const Mdp& mdp1, const numvec& tau2,
                                                       std::uint64_t seed, prec_t reward_bound = 1);

/// True iff some row admits a tau1-expectation-free direction that changes the
/// tau2 expectation.
bool sr_kernel_moves_tau2(const Mdp& mdp1, const numvec& tau2);

// *************************************************************************************
// **** Claim registry
// *************************************************************************************

struct ExperimentConfig {
    std::string claim_id;
    /// Trials per group; 0 selects the claim's default.
    std::size_t trials = 0;
    std::uint64_t seed = 1;
    MdpGenOptions generator;
    prec_t reward_bound = 1;
    SolverOptions solver;
    std::uint64_t cap = default_enumeration_cap;
    /// Attempts for existential ("not robust") searches.
    std::size_t negative_budget = 1000;
    std::optional<prec_t> gamma1;
    std::optional<prec_t> gamma2;
    std::optional<prec_t> beta1;
    std::optional<prec_t> beta2;
    std::optional<prec_t> alpha1;
    std::optional<prec_t> alpha2;
};

enum class TrialStatus { Pass, Fail, Skip };

const char* to_string(TrialStatus status);

struct TrialOutcome {
    /// "positive", "negative", "control" or "probe".
    std::string group;
    std::size_t index = 0;
    TrialStatus status = TrialStatus::Pass;
    std::string note;
    std::vector<std::pair<std::string, prec_t>> metrics;
};

struct TrialReport {
    std::string claim_id;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::vector<TrialOutcome> outcomes;
    std::size_t counterexamples = 0;
    std::optional<CounterexampleRecord> counterexample;
    double wall_clock_ms = 0;

    bool ok() const { return failed == 0; }
};

/// Registered claim identifiers, in registry order.
const std::vector<std::string>& claim_ids();

bool is_registered(const std::string& claim_id);

/// Runs one claim. Throws std::invalid_argument for unknown ids.
TrialReport verify_claim(const ExperimentConfig& config);

/// The built-in EX-TRANSFER pair over two states and two actions.
std::pair<RewardTable, RewardTable> ex_transfer_rewards();

} // namespace irl
