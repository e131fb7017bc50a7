#pragma once

// Behavioural models (reward -> policy) and exact policy -> reward inversions.

#include "irlkit/solve.hpp"
#include "irlkit/types.hpp"

#include <string>
#include <variant>

namespace irl {

/// pi(a|s) proportional to exp(beta Q*(s,a)), computed with max subtraction.
///
/// Every entry is positive as long as beta times the largest per-state Q* gap
/// stays below ~708; beyond that exp underflows and the certificate in
/// fvariant_policy would reject the result.
StochasticPolicy boltzmann_policy(const Mdp& mdp, const RewardTable& r, prec_t beta,
                                  const SolverOptions& opts = {});

/// Soft-optimal policy pi(a|s) proportional to exp(q_soft(s,a) / alpha).
StochasticPolicy mce_policy(const Mdp& mdp, const RewardTable& r, prec_t alpha,
                            const SolverOptions& opts = {});

/// Per-state sets of optimal actions.
ActionSetPolicy optimal_set_policy(const Mdp& mdp, const RewardTable& r,
                                   const SolverOptions& opts = {});

// *************************************************************************************
// **** F-variants: full-support, argmax-preserving models
// *************************************************************************************

/// lambda * Boltzmann(beta1) + (1 - lambda) * Boltzmann(beta2).
struct MixtureVariant {
    prec_t lambda = 0.5;
    prec_t beta1 = 1;
    prec_t beta2 = 2;
};

/// pi(a|s) proportional to exp(beta A*(s,a))^power.
struct TemperedRankVariant {
    prec_t beta = 1;
    prec_t power = 2;
};

struct FVariantSpec {
    std::variant<MixtureVariant, TemperedRankVariant> kind;

    std::string name() const;
};

/// A synthesized policy failed the full-support or argmax check.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Policy of an F-variant, certified before it is returned: every entry is
 * strictly positive, every optimal action has (up to tie noise) the largest
 * probability in its state, and every non-optimal action has strictly less
 * probability than all optimal ones.
 *
 * Throws std::invalid_argument on bad parameters and CertificationError when
 * the check fails.
 */
StochasticPolicy fvariant_policy(const Mdp& mdp, const RewardTable& r, const FVariantSpec& spec,
                                 const SolverOptions& opts = {});

/// The check used by fvariant_policy. `rel_tol` bounds the relative spread of
/// probabilities among tied optimal actions.
bool certify_argmax(const StochasticPolicy& pi, const ActionSetPolicy& opt_sets, prec_t rel_tol,
                    std::string* reason = nullptr);

// *************************************************************************************
// **** Behavioural models as values
// *************************************************************************************

struct BoltzmannModel {
    prec_t beta = 1;
};
struct MceModel {
    prec_t alpha = 1;
};
struct OptimalSetModel {};
struct FVariantModel {
    FVariantSpec spec;
};

struct BehaviouralModel {
    std::variant<BoltzmannModel, MceModel, OptimalSetModel, FVariantModel> kind;

    std::string name() const;
};

/// Policy of a stochastic model. OptimalSet yields the uniform policy over the
/// optimal actions.
StochasticPolicy model_policy(const BehaviouralModel& model, const Mdp& mdp, const RewardTable& r,
                              const SolverOptions& opts = {});

// *************************************************************************************
// **** Inversion
// *************************************************************************************

/**
 * A reward whose Boltzmann(beta) policy is pi: Q(s,a) = log pi(a|s) / beta and
 * R(s,a,s') = Q(s,a) - gamma max_a' Q(s',a'). Q is then its own optimal
 * Q-function. Any per-state shift of Q gives another preimage; the shift is 0.
 *
 * Throws std::invalid_argument if some probability is not strictly positive.
 */
RewardTable invert_boltzmann(const StochasticPolicy& pi, prec_t beta, const Mdp& mdp);

/// SA-domain reward alpha log pi(a|s); its soft values are v = 0 under any
/// transition function, so its MCE(alpha) policy is pi.
RewardTable invert_mce(const StochasticPolicy& pi, prec_t alpha);

} // namespace irl
