#include "fixtures.hpp"

#include "irlkit/equiv.hpp"
#include "irlkit/lab.hpp"
#include "irlkit/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace irl;

TEST_CASE("boltzmann on the chain") {
    const Mdp m = fixtures::chain();
    const RewardTable r = fixtures::chain_reward();
    const auto pi = boltzmann_policy(m, r, 1.0);
    CHECK(pi(0, 1) == doctest::Approx(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0))).epsilon(1e-12));
    CHECK(pi(0, 1) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(pi.full_support());

    const auto cold = boltzmann_policy(m, r, 100.0);
    CHECK(cold(0, 0) < 1e-20);
    CHECK(cold(0, 1) == 1.0);

    const auto flat = boltzmann_policy(m, RewardTable::from_s(2, 2, {3, 3}), 2.0);
    CHECK(flat.linf_distance(StochasticPolicy::uniform(2, 2)) <= 1e-12);
}

TEST_CASE("mce on the chain") {
    const Mdp m = fixtures::chain();
    const RewardTable r = fixtures::chain_reward();
    const auto flat = mce_policy(m, RewardTable::from_s(2, 2, {1, 1}), 0.7);
    CHECK(flat.linf_distance(StochasticPolicy::uniform(2, 2)) <= 1e-12);
    const auto cold = mce_policy(m, r, 1e-3);
    CHECK(cold(0, 1) > cold(0, 0));
    CHECK(cold(1, 0) > cold(1, 1));
    const auto pi0 = random_policy(2, 2, 5);
    CHECK(mce_policy(m, invert_mce(pi0, 0.5), 0.5).linf_distance(pi0) <= 1e-8);
}

TEST_CASE("optimal set policy") {
    const Mdp m = fixtures::chain();
    const auto sets = optimal_set_policy(m, fixtures::chain_reward());
    CHECK(sets[0] == indvec{1});
    CHECK(sets[1] == indvec{0});
    const auto all = optimal_set_policy(m, RewardTable::zeros(2, 2));
    CHECK(all[0] == indvec{0, 1});
    CHECK(all[1] == indvec{0, 1});
    CHECK(optimal_set_policy(m, apply(TransformSpec::ls(0.01), fixtures::chain_reward(), m)) == sets);
}

TEST_CASE("f-variants") {
    const Mdp m = fixtures::chain();
    const RewardTable r = fixtures::chain_reward();
    const auto mix = fvariant_policy(m, r, {MixtureVariant{0.5, 1, 2}});
    CHECK(mix(0, 1) > mix(0, 0));
    CHECK(mix.strictly_positive());
    const auto tr = fvariant_policy(m, r, {TemperedRankVariant{1, 2}});
    CHECK(tr(0, 1) > tr(0, 0));
    CHECK(tr.strictly_positive());
    const auto flat = fvariant_policy(m, RewardTable::zeros(2, 2), {TemperedRankVariant{1, 2}});
    CHECK(flat.linf_distance(StochasticPolicy::uniform(2, 2)) <= 1e-12);

    CHECK_THROWS_AS(fvariant_policy(m, r, {MixtureVariant{1.5, 1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(fvariant_policy(m, r, {TemperedRankVariant{1, 0}}), std::invalid_argument);
    CHECK(FVariantSpec{MixtureVariant{}}.name().find("mixture") == 0);

    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Mdp g = random_mdp(seed);
        const RewardTable rg = random_reward(g, RewardDomain::SAS, 1, seed);
        const auto sets = optimal_set_policy(g, rg);
        for (const FVariantSpec& spec :
             {FVariantSpec{MixtureVariant{0.3, 0.5, 4}}, FVariantSpec{TemperedRankVariant{2, 0.5}}}) {
            const auto pi = fvariant_policy(g, rg, spec);
            CHECK(certify_argmax(pi, sets, 1e-9));
        }
    }
}

TEST_CASE("argmax certificate") {
    const ActionSetPolicy sets({{0}, {0, 1}});
    std::string why;
    CHECK(certify_argmax(StochasticPolicy(2, 2, {0.7, 0.3, 0.5, 0.5}), sets, 1e-9));
    CHECK_FALSE(certify_argmax(StochasticPolicy(2, 2, {0.3, 0.7, 0.5, 0.5}), sets, 1e-9, &why));
    CHECK_FALSE(why.empty());
    CHECK_FALSE(certify_argmax(StochasticPolicy(2, 2, {1.0, 0.0, 0.5, 0.5}), sets, 1e-9));
    CHECK_FALSE(certify_argmax(StochasticPolicy(2, 2, {0.7, 0.3, 0.6, 0.4}), sets, 1e-9));
}

TEST_CASE("boltzmann inversion") {
    const Mdp m = fixtures::chain();
    const auto pi = boltzmann_policy(m, fixtures::chain_reward(), 1.0);
    CHECK(boltzmann_policy(m, invert_boltzmann(pi, 1.0, m), 1.0).linf_distance(pi) <= 1e-8);
    CHECK(boltzmann_policy(m, invert_boltzmann(pi, 3.0, m), 3.0).linf_distance(pi) <= 1e-8);

    const auto u = StochasticPolicy::uniform(2, 2);
    const auto sets = optimal_set_policy(m, invert_boltzmann(u, 2.0, m));
    CHECK(sets[0] == indvec{0, 1});
    CHECK(sets[1] == indvec{0, 1});

    CHECK_THROWS_AS(invert_boltzmann(StochasticPolicy(2, 2, {1, 0, 0.5, 0.5}), 1, m), std::invalid_argument);
}

TEST_CASE("mce inversion") {
    const Mdp m = fixtures::chain();
    const auto pi = mce_policy(m, fixtures::chain_reward(), 1.0);
    const RewardTable r = invert_mce(pi, 1.0);
    CHECK(r.domain() == RewardDomain::SA);
    CHECK(mce_policy(m, r, 1.0).linf_distance(pi) <= 1e-8);
    CHECK(mce_policy(m, invert_mce(pi, 0.2), 0.2).linf_distance(pi) <= 1e-8);
    const RewardTable u = invert_mce(StochasticPolicy::uniform(2, 2), 2.0);
    for (double v : u.values()) CHECK(v == doctest::Approx(2.0 * std::log(0.5)));
    CHECK_THROWS_AS(invert_mce(StochasticPolicy(2, 2, {1, 0, 0.5, 0.5}), 1), std::invalid_argument);
}

TEST_CASE("behavioural model values") {
    const Mdp m = fixtures::chain();
    const RewardTable r = fixtures::chain_reward();
    const BehaviouralModel b{BoltzmannModel{1}};
    CHECK(model_policy(b, m, r).linf_distance(boltzmann_policy(m, r, 1)) == 0.0);
    const BehaviouralModel o{OptimalSetModel{}};
    const auto p = model_policy(o, m, r);
    CHECK(p(0, 1) == 1.0);
    CHECK(p(1, 0) == 1.0);
    CHECK(model_policy(o, m, RewardTable::zeros(2, 2)).linf_distance(StochasticPolicy::uniform(2, 2)) == 0.0);
    CHECK_FALSE(BehaviouralModel{MceModel{2}}.name().empty());
}
