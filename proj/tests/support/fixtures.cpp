#include "fixtures.hpp"

namespace fixtures {

irl::Mdp chain() {
    irl::Mdp m = irl::Mdp::from_nested({{{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}}, {1, 0}, 0.5);
    m.state_labels = {"s0", "s1"};
    m.action_labels = {"a0", "a1"};
    return m;
}

irl::RewardTable chain_reward() {
    irl::RewardTable r = irl::RewardTable::zeros(2, 2);
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t a = 0; a < 2; ++a) r.at(s, a, 1) = 1.0;
    return r;
}

std::string path(const std::string& name) { return std::string(IRLKIT_FIXTURE_DIR) + "/" + name; }

} // namespace fixtures
