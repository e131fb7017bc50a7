#include "fixtures.hpp"

#include "irlkit/types.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace irl;

TEST_CASE("mdp shape is checked at construction") {
    CHECK_THROWS_AS(Mdp(2, 2, numvec(7, 0.0), {1, 0}, 0.5), StructuralError);
    CHECK_THROWS_AS(Mdp(2, 2, numvec(8, 0.0), {1, 0, 0}, 0.5), StructuralError);
    CHECK_THROWS_AS(Mdp::from_nested({{{1, 0}, {0, 1}}, {{0, 1}}}, {1, 0}, 0.5), StructuralError);
    const Mdp m = fixtures::chain();
    CHECK(m.n_pairs() == 4);
    CHECK(m.tau(0, 1, 1) == 1.0);
    CHECK(m.row(1, 1)[0] == 1.0);
}

TEST_CASE("labels fall back to indices") {
    Mdp m = fixtures::chain();
    CHECK(m.state_name(1) == "s1");
    m.state_labels.clear();
    m.action_labels = {"stay", "switch"};
    CHECK(m.state_name(1) == "s1");
    CHECK(m.action_name(1) == "switch");
}

TEST_CASE("with_* copies keep the other fields") {
    const Mdp m = fixtures::chain();
    const Mdp g = m.with_discount(0.9);
    CHECK(g.discount() == 0.9);
    CHECK(g.transition() == m.transition());
    CHECK(m.with_initial({0.5, 0.5}).initial()[1] == 0.5);
    CHECK_THROWS_AS(m.with_transition(numvec(3, 0.0)), StructuralError);
}

TEST_CASE("reward domains") {
    const RewardTable sa = RewardTable::from_sa(2, 2, {1, 2, 3, 4});
    CHECK(sa.domain() == RewardDomain::SA);
    CHECK(sa.check_domain());
    CHECK(sa(1, 0, 0) == 3);
    CHECK(sa(1, 0, 1) == 3);

    const RewardTable s = RewardTable::from_s(2, 3, {2, -1});
    CHECK(s.check_domain());
    CHECK(s(0, 2, 1) == 2);
    CHECK(s.max_abs() == 2);

    RewardTable bad = RewardTable::zeros(2, 2, RewardDomain::SA);
    bad.at(0, 0, 1) = 1;
    CHECK_FALSE(bad.check_domain());
    RewardTable nan = RewardTable::zeros(2, 2);
    nan.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(nan.check_domain());

    CHECK(parse_domain("sa") == RewardDomain::SA);
    CHECK(std::string(to_string(RewardDomain::S)) == "s");
    CHECK_THROWS(parse_domain("xyz"));
}

TEST_CASE("policies") {
    const auto u = StochasticPolicy::uniform(2, 4);
    CHECK(u(1, 3) == doctest::Approx(0.25));
    CHECK(u.full_support());
    CHECK(u.is_stochastic());

    const auto d = StochasticPolicy::deterministic(2, {1, 0});
    CHECK(d(0, 1) == 1.0);
    CHECK(d(1, 0) == 1.0);
    CHECK_FALSE(d.full_support());
    CHECK_FALSE(d.strictly_positive());
    CHECK(d.linf_distance(StochasticPolicy::uniform(2, 2)) == doctest::Approx(0.5));

    const StochasticPolicy tiny(1, 2, {1e-13, 1 - 1e-13});
    CHECK(tiny.strictly_positive());
    CHECK_FALSE(tiny.full_support());
    CHECK_FALSE(StochasticPolicy(1, 2, {0.5, 0.6}).is_stochastic());
}

TEST_CASE("action sets are sorted and non-empty") {
    const ActionSetPolicy p({{1, 0}, {1}});
    CHECK(p[0] == indvec{0, 1});
    CHECK(p.contains(0, 0));
    CHECK_FALSE(p.contains(1, 0));
    CHECK_THROWS(ActionSetPolicy({{0}, {}}));
    const ActionSetPolicy q({{0, 1}, {0}});
    CHECK(p.first_difference(q) == std::optional<std::size_t>(1));
    CHECK_FALSE(p.first_difference(p).has_value());
}
