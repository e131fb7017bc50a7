#pragma once

// Reward-transformation algebra: potential shaping, S'-redistribution,
// positive linear scaling, constant shift, optimality-preserving rewrites and
// their sequences, with seeded samplers and linear certificate solvers.

#include "irlkit/solve.hpp"
#include "irlkit/types.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace irl {

/// A transformation was rejected (non-positive scale, SR replacement with the
/// wrong expectations, OP slack that is not strictly negative, ...).
class TransformError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PotentialFn {
    numvec phi;
    /// Set when sum_s mu0[s] phi[s] = 0 was enforced at construction.
    bool zero_initial_expectation = false;
};

struct PotentialShaping {
    PotentialFn potential;
};

/// Replaces the reward by `replacement`, which must have the same expected
/// reward per (s, a) under tau as the input.
struct SRedistribution {
    RewardTable replacement;
};

struct LinearScaling {
    prec_t c = 1;
};

struct ConstantShift {
    prec_t k = 0;
};

/**
 * Optimality-preserving rewrite around a new value profile psi.
 *
 * The output satisfies E[R2(s,a,S') + gamma psi(S')] = psi(s) + slack(s,a)
 * where slack is zero on the optimal actions of the input reward and strictly
 * negative elsewhere. `slack` is a full [s][a] table; entries on optimal pairs
 * are ignored.
 */
struct OptimalityPreserving {
    numvec psi;
    numvec slack;
};

struct TransformSpec;

struct Sequence {
    std::vector<TransformSpec> steps;
};

struct TransformSpec {
    std::variant<PotentialShaping, SRedistribution, LinearScaling, ConstantShift,
                 OptimalityPreserving, Sequence>
        kind;

    static TransformSpec ps(numvec phi, bool zero_initial = false);
    static TransformSpec sr(RewardTable replacement);
    static TransformSpec ls(prec_t c);
    static TransformSpec cs(prec_t k);
    static TransformSpec op(numvec psi, numvec slack);
    static TransformSpec seq(std::vector<TransformSpec> steps);
};

/// Certificate that R2 = SR(PS_phi(c * R1)).
struct Decomposition {
    prec_t c = 1;
    PotentialFn phi;
    /// L-inf residual of the fitted linear system over (s, a).
    prec_t residual = 0;
    /// R1 was J-constant, so c is not identifiable and is reported as 1.
    bool degenerate = false;
};

/// Acceptance threshold for decomposition residuals, relative to max(1, reward scale).
inline constexpr prec_t decomposition_tolerance = 1e-6;

/**
 * Applies `t` to `r`. Sequences apply left to right; the output is SAS-domain.
 *
 * Throws TransformError for LS with c <= 0, SR replacements whose expected
 * rewards differ from the input's by more than 1e-10 (relative), and OP slack
 * tables that are not strictly negative on non-optimal pairs.
 */
RewardTable apply(const TransformSpec& t, const RewardTable& r, const Mdp& mdp,
                  const SolverOptions& opts = {});

/// Phi uniform in [-bounds, bounds]; projected onto sum mu0 Phi = 0 if zero_initial.
TransformSpec sample_potential_shaping(const Mdp& mdp, prec_t bounds, bool zero_initial,
                                       std::uint64_t seed);

/**
 * Random S'-redistribution of `r` under the MDP's tau.
 *
 * On the support of tau(s, a) the perturbation has zero tau-expectation and
 * entries drawn from [-magnitude, magnitude] before centering; entries with
 * zero transition probability move by up to 10 * magnitude.
 */
TransformSpec sample_s_redistribution(const Mdp& mdp, const RewardTable& r, prec_t magnitude,
                                      std::uint64_t seed);

/// psi uniform in [-bounds, bounds], slack on non-optimal pairs uniform in
/// [-bounds, -1e-3 * bounds].
TransformSpec sample_optimality_preserving(const Mdp& mdp, const RewardTable& r, prec_t bounds,
                                           std::uint64_t seed, const SolverOptions& opts = {});

/// The matrix M[(s,a)][s'] = gamma tau[s][a][s'] - [s' = s], so PS_phi adds M phi
/// to the reward vector.
std::vector<numvec> shaping_matrix(const Mdp& mdp);

/**
 * Fits R2_vec = c R1_vec + M phi by least squares over (c, phi).
 *
 * Returns the certificate when the residual is within decomposition_tolerance
 * and c > 0. If R1_vec lies in the column span of M (J is constant across
 * policies), accepts iff R2_vec does too, with c = 1 and the degenerate flag.
 */
std::optional<Decomposition> decompose_ord(const RewardTable& r1, const RewardTable& r2,
                                           const Mdp& mdp);

/// Fits R2_vec = R1_vec + M phi with sum mu0 phi = 0.
std::optional<Decomposition> decompose_j(const RewardTable& r1, const RewardTable& r2,
                                         const Mdp& mdp);

/// Entrywise fit R2(s,a,s') = c R1(s,a,s') + gamma phi(s') - phi(s) with c > 0
/// over every transition, independent of tau (no S'-redistribution allowed).
std::optional<Decomposition> fit_shaping_scaling(const RewardTable& r1, const RewardTable& r2,
                                                 prec_t discount);

/// True iff the reward vector lies in the column span of the shaping matrix,
/// i.e. every policy has the same J.
bool is_j_constant(const RewardTable& r, const Mdp& mdp);

/// r'(s,a) = r(s,a) + gamma E[phi(S')] - phi(s) on an SA-domain reward; stays SA.
RewardTable shaping_on_sa_domain(const PotentialFn& phi, const RewardTable& r, const Mdp& mdp);

} // namespace irl
