#pragma once

#include "irlkit/types.hpp"

#include <string>

namespace fixtures {

/// Two states, a0 = stay, a1 = switch, deterministic, mu0 = (1, 0), gamma = 0.5.
irl::Mdp chain();

/// R(s, a, s') = 1 if s' = s1 else 0.
irl::RewardTable chain_reward();

/// Path of a file under tests/fixtures.
std::string path(const std::string& name);

} // namespace fixtures
