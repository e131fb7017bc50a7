// Seeded invariants. Every generator below derives its draws from the case
// index, so a failure reproduces by its CAPTURE'd seed.

#include "oracle.hpp"

#include "irlkit/equiv.hpp"
#include "irlkit/lab.hpp"
#include "irlkit/models.hpp"
#include "irlkit/random.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace irl;

namespace {

constexpr std::uint64_t kRoot = 0x9e11ULL;

struct Case {
    Mdp mdp;
    RewardTable r;
    StochasticPolicy pi;
    Rng rng;
};

Case draw(std::uint64_t i, RewardDomain domain = RewardDomain::SAS) {
    const std::uint64_t s = substream_seed(kRoot, i);
    Mdp m = random_mdp(substream_seed(s, 0));
    RewardTable r = random_reward(m, domain, 1.0, substream_seed(s, 1));
    StochasticPolicy pi = random_policy(m.n_states(), m.n_actions(), substream_seed(s, 2));
    return {std::move(m), std::move(r), std::move(pi), Rng(substream_seed(s, 3))};
}

double linf(const numvec& a, const numvec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

numvec potential(const TransformSpec& t) { return std::get<PotentialShaping>(t.kind).potential.phi; }

} // namespace

TEST_CASE("valid MDPs have stochastic rows and reachable states") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const Mdp& m = c.mdp;
        REQUIRE(validate_mdp(m).ok());
        for (std::size_t s = 0; s < m.n_states(); ++s)
            for (std::size_t a = 0; a < m.n_actions(); ++a) {
                double sum = 0;
                for (std::size_t t = 0; t < m.n_states(); ++t) {
                    CHECK(m.tau(s, a, t) >= 0);
                    sum += m.tau(s, a, t);
                }
                CHECK(std::abs(sum - 1) <= 1e-9);
            }
        for (bool seen : reachable_states(m)) CHECK(seen);
    }
}

TEST_CASE("lift_reward preserves expected rewards exactly") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i, i % 2 ? RewardDomain::SA : RewardDomain::S);
        CHECK(oracle::expected_reward(c.mdp, lift_reward(c.r)) == oracle::expected_reward(c.mdp, c.r));
        CHECK(lift_reward(c.r).with_domain(c.r.domain()).check_domain());
    }
}

TEST_CASE("enumerated policies are one-hot and distinct") {
    for (std::uint64_t i = 0; i < 50; ++i) {
        Case c = draw(i);
        const auto pols = enumerate_deterministic_policies(c.mdp);
        CHECK(pols.size() == deterministic_policy_count(c.mdp.n_states(), c.mdp.n_actions()));
        std::set<numvec> seen;
        for (const auto& p : pols) {
            for (std::size_t s = 0; s < p.n_states(); ++s) {
                std::size_t ones = 0;
                for (std::size_t a = 0; a < p.n_actions(); ++a) {
                    CHECK((p(s, a) == 0.0 || p(s, a) == 1.0));
                    ones += p(s, a) == 1.0;
                }
                CHECK(ones == 1);
            }
            seen.insert(p.probs());
        }
        CHECK(seen.size() == pols.size());
    }
}

TEST_CASE("occupancy identities") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        CAPTURE(i);
        const auto d = occupancy(c.mdp, c.pi);
        CHECK(std::abs(d.total() - 1 / (1 - c.mdp.discount())) <= 1e-9);
        CHECK(std::abs(d.dot(reward_vector(c.r, c.mdp)) - policy_evaluate(c.mdp, c.r, c.pi).j) <= 1e-8);
        CHECK(linf(d.d, oracle::occupancy(c.mdp, c.pi)) <= 1e-9);
    }
}

TEST_CASE("occupancy is injective on full-support policies") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i);
        const auto q = random_policy(c.mdp.n_states(), c.mdp.n_actions(), substream_seed(i, 99));
        REQUIRE(q.linf_distance(c.pi) > 0);
        CHECK(linf(occupancy(c.mdp, c.pi).d, occupancy(c.mdp, q).d) > 1e-9);
    }
}

TEST_CASE("optimal sets match the enumeration oracle") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        CAPTURE(i);
        CHECK(optimal_values(c.mdp, c.r).opt_sets == ActionSetPolicy(oracle::optimum(c.mdp, c.r).opt_sets));
    }
}

TEST_CASE("soft values reach their fixed point") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i);
        const double alpha = c.rng.log_uniform(1e-3, 10);
        const auto sb = soft_optimal_values(c.mdp, c.r, alpha);
        CHECK(soft_fixed_point_residual(c.mdp, c.r, sb) <= 1e-8);
        const auto pi = soft_policy(sb);
        for (std::size_t s = 0; s < pi.n_states(); ++s) {
            double sum = 0;
            for (std::size_t a = 0; a < pi.n_actions(); ++a) sum += pi(s, a);
            CHECK(std::abs(sum - 1) <= 1e-12);
        }
    }
}

TEST_CASE("controllable states exist iff the transition function is non-trivial") {
    MdpGenOptions trivial;
    trivial.trivial = true;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const Mdp m = i % 2 ? random_mdp(substream_seed(kRoot, i), trivial) : draw(i).mdp;
        CHECK(controllable_states(m).states.empty() == is_trivial_transition(m));
    }
}

TEST_CASE("shaping shifts values by the potential") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const numvec phi = potential(sample_potential_shaping(c.mdp, 5, false, i));
        const RewardTable r2 = apply(TransformSpec::ps(phi), c.r, c.mdp);
        const auto v1 = policy_evaluate(c.mdp, c.r, c.pi), v2 = policy_evaluate(c.mdp, r2, c.pi);
        double mu_phi = 0;
        for (std::size_t s = 0; s < phi.size(); ++s) {
            CHECK(std::abs(v2.v[s] - (v1.v[s] - phi[s])) <= 1e-8);
            mu_phi += c.mdp.initial()[s] * phi[s];
        }
        CHECK(std::abs(v2.j - (v1.j - mu_phi)) <= 1e-8);
    }
}

TEST_CASE("redistribution keeps expected rewards and J") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const RewardTable r2 = apply(sample_s_redistribution(c.mdp, c.r, 3, i), c.r, c.mdp);
        CHECK(linf(reward_vector(r2, c.mdp).r, reward_vector(c.r, c.mdp).r) <= 1e-10);
        CHECK(std::abs(policy_evaluate(c.mdp, r2, c.pi).j - policy_evaluate(c.mdp, c.r, c.pi).j) <= 1e-9);
    }
}

TEST_CASE("scaling scales advantages") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const double k = c.rng.log_uniform(0.1, 10);
        const auto b1 = optimal_values(c.mdp, c.r);
        const auto b2 = optimal_values(c.mdp, apply(TransformSpec::ls(k), c.r, c.mdp));
        numvec scaled = b1.a_star;
        for (auto& x : scaled) x *= k;
        CHECK(linf(b2.a_star, scaled) <= 1e-8 * k);
        CHECK(b1.opt_sets == b2.opt_sets);
    }
}

TEST_CASE("optimality-preserving samples keep optimal sets") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const RewardTable r2 = apply(sample_optimality_preserving(c.mdp, c.r, c.rng.log_uniform(0.1, 10), i), c.r, c.mdp);
        CHECK(oracle::optimum(c.mdp, r2).opt_sets == oracle::optimum(c.mdp, c.r).opt_sets);
    }
}

TEST_CASE("decompose_ord round trips and rejects reordered pairs") {
    std::size_t negatives = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        CAPTURE(i);
        const double k = c.rng.log_uniform(0.1, 10);
        const RewardTable mid = apply(
            TransformSpec::seq({TransformSpec::ls(k), sample_potential_shaping(c.mdp, 5, false, i)}), c.r, c.mdp);
        const RewardTable r2 = apply(sample_s_redistribution(c.mdp, mid, 1, i), mid, c.mdp);
        const auto d = decompose_ord(c.r, r2, c.mdp);
        REQUIRE(d);
        CHECK(std::abs(d->c - k) <= 1e-6 * k);

        const RewardTable other = random_reward(c.mdp, RewardDomain::SAS, 1, substream_seed(i, 77));
        const auto j1 = oracle::j_signature(c.mdp, c.r), j2 = oracle::j_signature(c.mdp, other);
        bool same_order = true;
        for (std::size_t p = 0; p < j1.size() && same_order; ++p)
            for (std::size_t q = 0; q < j1.size(); ++q)
                if ((j1[p] > j1[q] + 1e-9) != (j2[p] > j2[q] + 1e-9)) {
                    same_order = false;
                    break;
                }
        if (!same_order) {
            ++negatives;
            CHECK_FALSE(decompose_ord(c.r, other, c.mdp));
        }
    }
    CHECK(negatives >= 150);
}

TEST_CASE("relation implications") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        CAPTURE(i);
        // Mix equivalent and non-equivalent partners.
        RewardTable r2;
        switch (i % 4) {
        case 0: r2 = apply(sample_s_redistribution(c.mdp, c.r, 1, i), c.r, c.mdp); break;
        case 1: r2 = apply(TransformSpec::seq({TransformSpec::ls(2), sample_potential_shaping(c.mdp, 1, false, i)}), c.r, c.mdp); break;
        case 2: r2 = apply(sample_optimality_preserving(c.mdp, c.r, 1, i), c.r, c.mdp); break;
        default: r2 = random_reward(c.mdp, RewardDomain::SAS, 1, i); break;
        }
        const bool opt = opt_equivalent(c.r, r2, c.mdp).equivalent;
        const bool ord = ord_equivalent(c.r, r2, c.mdp).equivalent;
        const bool jeq = j_equal(c.r, r2, c.mdp).equivalent;
        if (ord) CHECK(opt);
        if (jeq) CHECK(ord);
        if (i % 4 == 0) CHECK(jeq);
        if (i % 4 == 1) CHECK((ord && !jeq));
        if (i % 4 == 2) CHECK(opt);
        CHECK((optimal_set_policy(c.mdp, c.r) == optimal_set_policy(c.mdp, r2)) == opt);
    }
}

TEST_CASE("opt_equivalent is an equivalence relation") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i);
        const RewardTable a = c.r;
        const RewardTable b = apply(sample_optimality_preserving(c.mdp, a, 1, i), a, c.mdp);
        const RewardTable d = i % 2 ? apply(sample_optimality_preserving(c.mdp, b, 1, i + 1), b, c.mdp)
                                    : random_reward(c.mdp, RewardDomain::SAS, 1, i);
        const auto eq = [&](const RewardTable& x, const RewardTable& y) { return opt_equivalent(x, y, c.mdp).equivalent; };
        CHECK(eq(a, a));
        CHECK(eq(a, b) == eq(b, a));
        CHECK(eq(b, d) == eq(d, b));
        if (eq(a, b) && eq(b, d)) CHECK(eq(a, d));
    }
}

TEST_CASE("Boltzmann policies ignore shaping and redistribution") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const double beta = c.rng.log_uniform(0.1, 10);
        const auto pi = boltzmann_policy(c.mdp, c.r, beta);
        const RewardTable shaped = apply(sample_potential_shaping(c.mdp, 5, false, i), c.r, c.mdp);
        const RewardTable moved = apply(sample_s_redistribution(c.mdp, c.r, 2, i), c.r, c.mdp);
        CHECK(boltzmann_policy(c.mdp, shaped, beta).linf_distance(pi) <= 1e-8);
        CHECK(boltzmann_policy(c.mdp, moved, beta).linf_distance(pi) <= 1e-8);
        const double k = c.rng.log_uniform(0.1, 10);
        CHECK(boltzmann_policy(c.mdp, apply(TransformSpec::ls(k), c.r, c.mdp), beta / k).linf_distance(pi) <= 1e-8);
        CHECK(pi.strictly_positive());
        CHECK(certify_argmax(pi, optimal_set_policy(c.mdp, c.r), 1e-9));
    }
}

TEST_CASE("MCE policies ignore shaping and redistribution") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i);
        const double alpha = c.rng.log_uniform(0.1, 10);
        const auto pi = mce_policy(c.mdp, c.r, alpha);
        const RewardTable shaped = apply(sample_potential_shaping(c.mdp, 5, false, i), c.r, c.mdp);
        const RewardTable moved = apply(sample_s_redistribution(c.mdp, c.r, 2, i), c.r, c.mdp);
        CHECK(mce_policy(c.mdp, shaped, alpha).linf_distance(pi) <= 1e-8);
        CHECK(mce_policy(c.mdp, moved, alpha).linf_distance(pi) <= 1e-8);
        const double k = c.rng.log_uniform(0.1, 10);
        CHECK(mce_policy(c.mdp, apply(TransformSpec::ls(k), c.r, c.mdp), k * alpha).linf_distance(pi) <= 1e-8);
        CHECK(pi.strictly_positive());
    }
}

TEST_CASE("F-variant policies are full-support and argmax-preserving") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Case c = draw(i);
        const FVariantSpec spec = i % 2 ? FVariantSpec{MixtureVariant{c.rng.uniform(0.05, 0.95), c.rng.log_uniform(0.1, 10),
                                                                      c.rng.log_uniform(0.1, 10)}}
                                        : FVariantSpec{TemperedRankVariant{c.rng.log_uniform(0.1, 10), c.rng.uniform(0.25, 3)}};
        const auto pi = fvariant_policy(c.mdp, c.r, spec);
        CHECK(pi.strictly_positive());
        const auto sets = optimal_set_policy(c.mdp, c.r);
        for (std::size_t s = 0; s < pi.n_states(); ++s) {
            std::size_t best = 0;
            for (std::size_t a = 1; a < pi.n_actions(); ++a)
                if (pi(s, a) > pi(s, best)) best = a;
            CHECK(sets.contains(s, best));
        }
    }
}

TEST_CASE("inversions round trip") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Case c = draw(i);
        const double beta = c.rng.log_uniform(0.1, 10), alpha = c.rng.log_uniform(0.1, 10);
        CHECK(boltzmann_policy(c.mdp, invert_boltzmann(c.pi, beta, c.mdp), beta).linf_distance(c.pi) <= 1e-8);
        CHECK(mce_policy(c.mdp, invert_mce(c.pi, alpha), alpha).linf_distance(c.pi) <= 1e-8);
    }
}

TEST_CASE("random counterexample records replay") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        Case c = draw(i);
        if (auto rec = gamma_counterexample(c.mdp, 0.6, 0.85, i)) CHECK(verify_record(*rec));
        const Mdp other = random_mdp(c.mdp.n_states(), c.mdp.n_actions(), substream_seed(i, 5));
        if (auto rec = tau_counterexample(c.mdp, other.transition(), i)) CHECK(verify_record(*rec));
    }
}
