#include "irlkit/mdp.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace irl {

namespace {

std::string pair_location(const Mdp& mdp, std::size_t s, std::size_t a) {
    return "(" + mdp.state_name(s) + "," + mdp.action_name(a) + ")";
}

} // namespace

std::vector<bool> reachable_states(const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    std::vector<bool> seen(ns, false);
    std::deque<std::size_t> frontier;
    for (std::size_t s = 0; s < ns; ++s)
        if (mdp.initial()[s] > 0.0) {
            seen[s] = true;
            frontier.push_back(s);
        }
    while (!frontier.empty()) {
        const std::size_t s = frontier.front();
        frontier.pop_front();
        for (std::size_t a = 0; a < mdp.n_actions(); ++a)
            for (std::size_t sn = 0; sn < ns; ++sn)
                if (!seen[sn] && mdp.tau(s, a, sn) > 0.0) {
                    seen[sn] = true;
                    frontier.push_back(sn);
                }
    }
    return seen;
}

ValidationReport validate_mdp(const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    const std::size_t na = mdp.n_actions();
    if (mdp.transition().size() != ns * na * ns || mdp.initial().size() != ns)
        throw StructuralError("MDP tensors do not match the declared shape");

    ValidationReport report;
    auto add = [&](std::string rule, std::string location, prec_t magnitude) {
        report.violations.push_back({std::move(rule), std::move(location), magnitude});
    };

    const prec_t gamma = mdp.discount();
    if (!(gamma > 0.0 && gamma < 1.0)) add("discount-range", "gamma", gamma);

    bool finite = true;
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            prec_t total = 0.0;
            prec_t most_negative = 0.0;
            bool row_finite = true;
            for (std::size_t sn = 0; sn < ns; ++sn) {
                const prec_t p = mdp.tau(s, a, sn);
                if (!std::isfinite(p)) row_finite = false;
                total += p;
                most_negative = std::min(most_negative, p);
            }
            if (!row_finite) {
                finite = false;
                add("non-finite", pair_location(mdp, s, a), std::numeric_limits<prec_t>::quiet_NaN());
                continue;
            }
            if (most_negative < 0.0) add("negative-prob", pair_location(mdp, s, a), most_negative);
            if (std::abs(total - 1.0) > probability_tolerance)
                add("row-sum", pair_location(mdp, s, a), total - 1.0);
        }

    prec_t total = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
        const prec_t p = mdp.initial()[s];
        if (!std::isfinite(p)) {
            finite = false;
            add("non-finite", "mu0[" + mdp.state_name(s) + "]", p);
            continue;
        }
        if (p < 0.0) add("mu0-negative", "mu0[" + mdp.state_name(s) + "]", p);
        total += p;
    }
    if (std::abs(total - 1.0) > probability_tolerance) add("mu0-sum", "mu0", total - 1.0);

    if (finite) {
        const auto seen = reachable_states(mdp);
        for (std::size_t s = 0; s < ns; ++s)
            if (!seen[s]) add("unreachable-state", mdp.state_name(s), 1.0);
    }
    return report;
}

bool is_trivial_transition(const Mdp& mdp) {
    const std::size_t ns = mdp.n_states();
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 1; a < mdp.n_actions(); ++a)
            for (std::size_t sn = 0; sn < ns; ++sn)
                if (std::abs(mdp.tau(s, a, sn) - mdp.tau(s, 0, sn)) > 1e-12) return false;
    return true;
}

std::uint64_t deterministic_policy_count(std::size_t n_states, std::size_t n_actions) {
    std::uint64_t count = 1;
    for (std::size_t s = 0; s < n_states; ++s) {
        if (count > std::numeric_limits<std::uint64_t>::max() / n_actions)
            return std::numeric_limits<std::uint64_t>::max();
        count *= n_actions;
    }
    return count;
}

indvec deterministic_policy_actions(std::uint64_t index, std::size_t n_states,
                                    std::size_t n_actions) {
    indvec actions(n_states);
    for (std::size_t i = n_states; i-- > 0;) {
        actions[i] = static_cast<std::size_t>(index % n_actions);
        index /= n_actions;
    }
    return actions;
}

std::vector<StochasticPolicy> enumerate_deterministic_policies(const Mdp& mdp,
                                                               std::uint64_t cap) {
    const std::uint64_t count = deterministic_policy_count(mdp.n_states(), mdp.n_actions());
    if (count > cap)
        throw CapacityError("enumerating " + std::to_string(mdp.n_actions()) + "^" +
                            std::to_string(mdp.n_states()) +
                            " deterministic policies exceeds the cap of " +
                            std::to_string(cap));
    std::vector<StochasticPolicy> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        out.push_back(StochasticPolicy::deterministic(
            mdp.n_actions(), deterministic_policy_actions(i, mdp.n_states(), mdp.n_actions())));
    return out;
}

RewardTable lift_reward(const RewardTable& reward) {
    return reward.with_domain(RewardDomain::SAS);
}

void check_compatible(const Mdp& mdp, const RewardTable& reward) {
    if (reward.n_states() != mdp.n_states() || reward.n_actions() != mdp.n_actions())
        throw StructuralError("reward shape (" + std::to_string(reward.n_states()) + "x" +
                              std::to_string(reward.n_actions()) + ") does not match the MDP (" +
                              std::to_string(mdp.n_states()) + "x" +
                              std::to_string(mdp.n_actions()) + ")");
}

void check_compatible(const Mdp& mdp, const StochasticPolicy& policy) {
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
        throw StructuralError("policy shape does not match the MDP");
}

} // namespace irl
