#include "fixtures.hpp"

#include "irlkit/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace irl;
using io::json;

TEST_CASE("chain documents load") {
    const Mdp m = io::mdp_from_json(io::read_file(fixtures::path("chain_mdp.json")));
    const Mdp ref = fixtures::chain();
    CHECK(m.transition() == ref.transition());
    CHECK(m.initial() == ref.initial());
    CHECK(m.discount() == 0.5);
    CHECK(m.action_name(1) == "a1");
    const RewardTable r = io::reward_from_json(io::read_file(fixtures::path("chain_reward.json")));
    CHECK(r.values() == fixtures::chain_reward().values());
}

TEST_CASE("mdp round trip keeps key order and values") {
    const Mdp m = fixtures::chain().with_discount(0.1 + 0.2);
    const json doc = io::to_json(m);
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"n_states", "n_actions", "gamma", "mu0", "transition", "labels"});
    const Mdp back = io::mdp_from_json(json::parse(doc.dump()));
    CHECK(back.discount() == m.discount());  // shortest round-trip form is exact
    CHECK(back.transition() == m.transition());
}

TEST_CASE("shape errors") {
    json doc = io::to_json(fixtures::chain());
    doc["transition"][1].erase(1);
    CHECK_THROWS_AS(io::mdp_from_json(doc), StructuralError);
    CHECK_THROWS_AS(io::mdp_from_json(json{{"n_states", 2}}), io::DocumentError);
    CHECK_THROWS_AS(io::read_file(fixtures::path("does_not_exist.json")), io::DocumentError);
}

TEST_CASE("reward domains round trip") {
    for (const RewardTable& r :
         {fixtures::chain_reward(), RewardTable::from_sa(2, 3, {1, 2, 3, 4, 5, 6}), RewardTable::from_s(3, 2, {1, -2, 0.25})}) {
        const json doc = io::to_json(r);
        const RewardTable back = io::reward_from_json(json::parse(doc.dump()));
        CHECK(back.domain() == r.domain());
        CHECK(back.values() == r.values());
        CHECK(back.n_actions() == r.n_actions());
    }
    json s = {{"domain", "s"}, {"values", {1.0, 2.0}}};
    CHECK(io::reward_from_json(s, 4).n_actions() == 4);
    CHECK_THROWS(io::reward_from_json(s));
}

TEST_CASE("transform documents") {
    const TransformSpec t = TransformSpec::seq(
        {TransformSpec::ls(2), TransformSpec::ps({0.5, -1}, false), TransformSpec::cs(0.25),
         TransformSpec::op({0, 0}, {-1, -2, -3, -4}), TransformSpec::sr(fixtures::chain_reward())});
    const json doc = io::to_json(t);
    CHECK(doc["kind"] == "seq");
    CHECK(doc["steps"][3]["slack"][1][0] == -3.0);
    const TransformSpec back = io::transform_from_json(json::parse(doc.dump()));
    CHECK(io::to_json(back).dump() == doc.dump());
    CHECK_THROWS_AS(io::transform_from_json(json{{"kind", "warp"}}), io::DocumentError);
}

TEST_CASE("models and variants") {
    for (const BehaviouralModel& m :
         {BehaviouralModel{BoltzmannModel{2}}, BehaviouralModel{MceModel{0.5}}, BehaviouralModel{OptimalSetModel{}},
          BehaviouralModel{FVariantModel{{MixtureVariant{0.3, 1, 4}}}},
          BehaviouralModel{FVariantModel{{TemperedRankVariant{1, 3}}}}}) {
        const json doc = io::to_json(m);
        CHECK(io::to_json(io::model_from_json(doc)).dump() == doc.dump());
    }
}

TEST_CASE("policies and action sets") {
    const StochasticPolicy p(2, 2, {0.25, 0.75, 1, 0});
    CHECK(io::policy_from_json(io::to_json(p)).probs() == p.probs());
    const ActionSetPolicy s({{0, 1}, {1}});
    CHECK(io::action_sets_from_json(io::to_json(s)) == s);
}

TEST_CASE("counterexample records replay after a round trip through a file") {
    const Mdp mdp = random_mdp(3, 2, 11);
    const auto rec = gamma_counterexample(mdp, 0.5, 0.9, 4);
    REQUIRE(rec);
    const auto path = std::filesystem::temp_directory_path() / "irlkit_record_test.json";
    io::write_file(path.string(), io::to_json(*rec));
    const CounterexampleRecord back = io::record_from_json(io::read_file(path.string()));
    std::filesystem::remove(path);
    std::string why;
    CHECK_MESSAGE(verify_record(back, &why), why);
    CHECK(back.parameter("X") == rec->parameter("X"));
    CHECK(io::to_json(back).dump() == io::to_json(*rec).dump());
}

TEST_CASE("report serialization") {
    ExperimentConfig cfg;
    cfg.claim_id = "EX-TRANSFER";
    cfg.trials = 3;
    const TrialReport r = verify_claim(cfg);
    const json with = io::to_json(r);
    const json without = io::to_json(r, false);
    CHECK(with.contains("wall_clock_ms"));
    CHECK_FALSE(without.contains("wall_clock_ms"));
    CHECK(with["passed_claim"] == true);
    CHECK(with["outcomes"].size() == 3);
}

TEST_CASE("config merge") {
    ExperimentConfig cfg;
    io::merge_config(cfg, json{{"claim", "BM-ORD"}, {"trials", 7}, {"states", {3, 4}}, {"beta1", 2.0}});
    CHECK(cfg.claim_id == "BM-ORD");
    CHECK(cfg.trials == 7);
    CHECK(cfg.generator.states.min == 3);
    CHECK(cfg.beta1 == std::optional<double>(2.0));
    CHECK_THROWS_AS(io::merge_config(cfg, json{{"states", {3}}}), io::DocumentError);
    CHECK_THROWS_AS(io::merge_config(cfg, json::array()), io::DocumentError);
}
