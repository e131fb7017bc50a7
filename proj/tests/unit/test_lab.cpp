#include "fixtures.hpp"
#include "oracle.hpp"

#include "irlkit/io.hpp"
#include "irlkit/lab.hpp"

#include <doctest.h>

#include <cmath>

using namespace irl;

TEST_CASE("generators are deterministic and valid") {
    const Mdp a = random_mdp(2, 2, 7), b = random_mdp(2, 2, 7);
    CHECK(a.transition() == b.transition());
    CHECK(a.initial() == b.initial());
    CHECK(a.discount() == b.discount());
    CHECK(random_mdp(2, 2, 8).transition() != a.transition());
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Mdp m = random_mdp(seed);
        CHECK(validate_mdp(m).ok());
        CHECK(m.n_states() >= 2);
        CHECK(m.n_states() <= 5);
        CHECK(m.n_actions() <= 3);
        CHECK(m.discount() >= 0.5);
        CHECK(m.discount() <= 0.9);
        const RewardTable r = random_reward(m, RewardDomain::SAS, 2.0, seed);
        CHECK(r.max_abs() <= 2.0);
        CHECK(advantage_gap(optimal_values(m, r)) >= advantage_gap_floor);
    }
    MdpGenOptions o;
    o.sparsity = 0.9;
    o.fixed_discount = 0.75;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Mdp m = random_mdp(seed, o);
        CHECK(validate_mdp(m).ok());
        CHECK(m.discount() == 0.75);
    }
    const auto pi = random_policy(4, 3, 1);
    CHECK(pi.is_stochastic());
    for (double p : pi.probs()) CHECK(p >= 1e-3 / 1.003 - 1e-15);
    CHECK(random_reward(a, RewardDomain::SA, 1, 3).check_domain());
    CHECK_THROWS_AS(random_reward(a, RewardDomain::SAS, 1, 3, 100.0, 5), GenerationError);
}

TEST_CASE("gamma counterexample on the chain") {
    const Mdp chain = fixtures::chain();
    const auto rec = gamma_counterexample(chain, 0.5, 0.9, 1);
    REQUIRE(rec);
    CHECK(verify_record(*rec));
    const auto o1 = oracle::optimum(chain.with_discount(0.9), rec->r1);
    const auto o2 = oracle::optimum(chain.with_discount(0.9), rec->r2);
    CHECK(o1.opt_sets != o2.opt_sets);
    CHECK(rec->parameter("gamma1") == 0.5);
    CHECK(rec->parameter("p") == chain.initial()[std::size_t(rec->parameter("state"))]);
    CHECK_THROWS_AS(gamma_counterexample(chain, 0.5, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(gamma_counterexample(chain, 0.5, 1.0, 1), std::invalid_argument);
}

TEST_CASE("gamma counterexample value identity") {
    // Delta = J2(r2) - J2(r1) under gamma2 for Phi = X at s equals
    // X * (gamma1 - gamma2) * n2 - p X with n2 = (w(s) - p) / gamma2.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Mdp m = random_mdp(seed);
        const auto rec = gamma_counterexample(m, 0.5, 0.9, seed);
        REQUIRE(rec);
        const double x = rec->parameter("X"), p = rec->parameter("p");
        for (const char* tag : {"1", "2"}) {
            const double n2 = rec->parameter(std::string("n2_pi") + tag);
            const double delta = rec->parameter(std::string("delta_pi") + tag);
            CHECK(delta == doctest::Approx(x * n2 * (0.5 - 0.9) - p * x).epsilon(1e-9).scale(1));
        }
    }
}

TEST_CASE("gamma counterexample monotone in X") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Mdp m = random_mdp(seed);
        const auto rec = gamma_counterexample(m, 0.5, 0.9, seed);
        REQUIRE(rec);
        const double x = rec->parameter("X");
        GammaSearchOptions o;
        o.x_grid = {2 * x};
        o.x_cap = std::abs(2 * x);
        const auto twice = gamma_counterexample(m, 0.5, 0.9, seed, o);
        REQUIRE(twice);
        CHECK(twice->parameter("X") == 2 * x);
    }
}

TEST_CASE("gamma controls") {
    MdpGenOptions trivial;
    trivial.trivial = true;
    GammaSearchOptions equal;
    equal.allow_equal_discounts = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CHECK_FALSE(gamma_counterexample(random_mdp(seed, trivial), 0.5, 0.9, seed));
        CHECK_FALSE(gamma_counterexample(random_mdp(seed), 0.7, 0.7, seed, equal));
    }
}

TEST_CASE("tau counterexamples") {
    // Uniform two-successor row tilted under tau2.
    const Mdp m1 = Mdp::from_nested({{{0.5, 0.5}, {1, 0}}, {{0, 1}, {1, 0}}}, {1, 0}, 0.9);
    numvec tau2 = m1.transition();
    tau2[0] = 0.9;
    tau2[1] = 0.1;
    CHECK(sr_kernel_moves_tau2(m1, tau2));
    const auto rec = tau_counterexample(m1, tau2, 3);
    REQUIRE(rec);
    CHECK(verify_record(*rec));
    CHECK(oracle::optimum(m1.with_transition(tau2), rec->r1).opt_sets !=
          oracle::optimum(m1.with_transition(tau2), rec->r2).opt_sets);
    CHECK(rec->parameter("support_direction") == 0.0);
    CHECK_FALSE(tau_counterexample(m1, m1.transition(), 3));

    // Deterministic tau1: only new support entries of tau2 help.
    const Mdp chain = fixtures::chain();
    numvec same = chain.transition();
    CHECK_FALSE(sr_kernel_moves_tau2(chain, same));
    numvec more = same;
    more[6] = 0.3;  // (s1, a1) reaches s0 and now s1
    more[7] = 0.7;
    const auto det = tau_counterexample(chain, more, 5);
    REQUIRE(det);
    CHECK(det->parameter("support_direction") == 1.0);
}

TEST_CASE("records reject tampering") {
    const auto rec = gamma_counterexample(fixtures::chain(), 0.5, 0.9, 1);
    REQUIRE(rec);
    CounterexampleRecord bad = *rec;
    bad.r2 = bad.r1;
    std::string why;
    CHECK_FALSE(verify_record(bad, &why));
    CHECK_FALSE(why.empty());
    CounterexampleRecord wrong_state = *rec;
    wrong_state.state = 1 - *rec->state;
    CHECK_FALSE(verify_record(wrong_state));
}

TEST_CASE("registry") {
    CHECK(claim_ids().size() == 13);
    CHECK(is_registered("ORD-CHAR"));
    CHECK_FALSE(is_registered("ord-char"));
    ExperimentConfig cfg;
    cfg.claim_id = "NOPE";
    CHECK_THROWS_AS(verify_claim(cfg), std::invalid_argument);
}

TEST_CASE("reports are deterministic and counts add up") {
    for (const auto& id : claim_ids()) {
        ExperimentConfig cfg;
        cfg.claim_id = id;
        cfg.trials = 3;
        cfg.seed = 42;
        const TrialReport a = verify_claim(cfg);
        const TrialReport b = verify_claim(cfg);
        CAPTURE(id);
        CHECK(a.passed + a.failed + a.skipped == a.trials);
        CHECK(a.outcomes.size() == a.trials);
        CHECK(io::to_json(a, false).dump() == io::to_json(b, false).dump());
        CHECK(a.ok());
    }
}

TEST_CASE("claim-specific controls") {
    ExperimentConfig cfg;
    cfg.claim_id = "LEM-GAMMA";
    cfg.trials = 5;
    cfg.gamma1 = 0.8;
    cfg.gamma2 = 0.8;
    const TrialReport r = verify_claim(cfg);
    CHECK(r.ok());
    CHECK(r.counterexamples == 0);

    cfg.claim_id = "MCE-ORD";
    cfg.gamma1.reset();
    cfg.gamma2.reset();
    cfg.alpha1 = 1.5;
    cfg.alpha2 = 1.5;
    CHECK(verify_claim(cfg).skipped == 5);

    // A probe that cannot succeed is a failure, not a silent pass.
    cfg = {};
    cfg.claim_id = "BOLTZ-OPT";
    cfg.trials = 1;
    cfg.negative_budget = 0;
    const TrialReport p = verify_claim(cfg);
    CHECK_FALSE(p.ok());
}

TEST_CASE("ex-transfer rewards") {
    const auto [r1, r2] = ex_transfer_rewards();
    CHECK(r1(0, 0, 0) == 1.0);
    CHECK(r1(0, 0, 1) == 0.5);
    CHECK(r2(0, 0, 0) == 0.5);
    CHECK(r2(0, 0, 1) == 1.0);
    double rest = 0;
    for (std::size_t i = 2; i < r1.values().size(); ++i) rest += std::abs(r1.values()[i]) + std::abs(r2.values()[i]);
    CHECK(rest == 0.0);
}
