#include "irlkit/types.hpp"

#include <algorithm>
#include <cmath>

namespace irl {

// *************************************************************************************
// **** Mdp
// *************************************************************************************

Mdp::Mdp(std::size_t n_states, std::size_t n_actions, numvec transition, numvec initial,
         prec_t discount)
    : n_states_(n_states), n_actions_(n_actions), transition_(std::move(transition)),
      initial_(std::move(initial)), discount_(discount) {
    if (n_states == 0 || n_actions == 0)
        throw StructuralError("an MDP needs at least one state and one action");
    if (transition_.size() != n_states * n_actions * n_states)
        throw StructuralError("transition tensor has " + std::to_string(transition_.size()) +
                              " entries, expected " +
                              std::to_string(n_states * n_actions * n_states));
    if (initial_.size() != n_states)
        throw StructuralError("initial distribution has " + std::to_string(initial_.size()) +
                              " entries, expected " + std::to_string(n_states));
}

Mdp Mdp::from_nested(const std::vector<std::vector<numvec>>& transition, numvec initial,
                     prec_t discount) {
    const std::size_t ns = transition.size();
    if (ns == 0) throw StructuralError("transition tensor is empty");
    const std::size_t na = transition[0].size();
    numvec flat;
    flat.reserve(ns * na * ns);
    for (std::size_t s = 0; s < ns; ++s) {
        if (transition[s].size() != na)
            throw StructuralError("transition[" + std::to_string(s) + "] has " +
                                  std::to_string(transition[s].size()) + " actions, expected " +
                                  std::to_string(na));
        for (std::size_t a = 0; a < na; ++a) {
            if (transition[s][a].size() != ns)
                throw StructuralError("transition[" + std::to_string(s) + "][" +
                                      std::to_string(a) + "] has " +
                                      std::to_string(transition[s][a].size()) +
                                      " successors, expected " + std::to_string(ns));
            flat.insert(flat.end(), transition[s][a].begin(), transition[s][a].end());
        }
    }
    return Mdp(ns, na, std::move(flat), std::move(initial), discount);
}

Mdp Mdp::with_discount(prec_t discount) const {
    Mdp copy = *this;
    copy.discount_ = discount;
    return copy;
}

Mdp Mdp::with_transition(numvec transition) const {
    Mdp copy(n_states_, n_actions_, std::move(transition), initial_, discount_);
    copy.state_labels = state_labels;
    copy.action_labels = action_labels;
    return copy;
}

Mdp Mdp::with_initial(numvec initial) const {
    Mdp copy(n_states_, n_actions_, transition_, std::move(initial), discount_);
    copy.state_labels = state_labels;
    copy.action_labels = action_labels;
    return copy;
}

std::string Mdp::state_name(std::size_t s) const {
    if (s < state_labels.size()) return state_labels[s];
    return "s" + std::to_string(s);
}

std::string Mdp::action_name(std::size_t a) const {
    if (a < action_labels.size()) return action_labels[a];
    return "a" + std::to_string(a);
}

// *************************************************************************************
// **** RewardTable
// *************************************************************************************

const char* to_string(RewardDomain domain) {
    switch (domain) {
    case RewardDomain::SAS: return "sas";
    case RewardDomain::SA: return "sa";
    case RewardDomain::S: return "s";
    }
    return "sas";
}

RewardDomain parse_domain(const std::string& text) {
    if (text == "sas") return RewardDomain::SAS;
    if (text == "sa") return RewardDomain::SA;
    if (text == "s") return RewardDomain::S;
    throw StructuralError("unknown reward domain '" + text + "'");
}

RewardTable::RewardTable(std::size_t n_states, std::size_t n_actions, numvec values,
                         RewardDomain domain)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)),
      domain_(domain) {
    if (values_.size() != n_states * n_actions * n_states)
        throw StructuralError("reward tensor has " + std::to_string(values_.size()) +
                              " entries, expected " +
                              std::to_string(n_states * n_actions * n_states));
}

RewardTable RewardTable::zeros(std::size_t n_states, std::size_t n_actions,
                               RewardDomain domain) {
    return RewardTable(n_states, n_actions, numvec(n_states * n_actions * n_states, 0.0),
                       domain);
}

RewardTable RewardTable::from_sa(std::size_t n_states, std::size_t n_actions,
                                 const numvec& sa_values) {
    if (sa_values.size() != n_states * n_actions)
        throw StructuralError("SA reward needs n_states * n_actions values");
    numvec values(n_states * n_actions * n_states);
    for (std::size_t i = 0; i < n_states * n_actions; ++i)
        std::fill_n(values.begin() + i * n_states, n_states, sa_values[i]);
    return RewardTable(n_states, n_actions, std::move(values), RewardDomain::SA);
}

RewardTable RewardTable::from_s(std::size_t n_states, std::size_t n_actions,
                                const numvec& s_values) {
    if (s_values.size() != n_states) throw StructuralError("S reward needs n_states values");
    numvec values(n_states * n_actions * n_states);
    for (std::size_t s = 0; s < n_states; ++s)
        std::fill_n(values.begin() + s * n_actions * n_states, n_actions * n_states,
                    s_values[s]);
    return RewardTable(n_states, n_actions, std::move(values), RewardDomain::S);
}

prec_t RewardTable::max_abs() const {
    prec_t m = 0.0;
    for (prec_t v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool RewardTable::check_domain() const {
    if (!std::all_of(values_.begin(), values_.end(), [](prec_t v) { return std::isfinite(v); }))
        return false;
    for (std::size_t s = 0; s < n_states_; ++s)
        for (std::size_t a = 0; a < n_actions_; ++a)
            for (std::size_t sn = 0; sn < n_states_; ++sn) {
                const prec_t v = (*this)(s, a, sn);
                if (domain_ == RewardDomain::SA && v != (*this)(s, a, 0)) return false;
                if (domain_ == RewardDomain::S && v != (*this)(s, 0, 0)) return false;
            }
    return true;
}

RewardTable RewardTable::with_domain(RewardDomain domain) const {
    RewardTable copy = *this;
    copy.domain_ = domain;
    return copy;
}

// *************************************************************************************
// **** Policies
// *************************************************************************************

StochasticPolicy::StochasticPolicy(std::size_t n_states, std::size_t n_actions, numvec probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
    if (probs_.size() != n_states * n_actions)
        throw StructuralError("policy table has " + std::to_string(probs_.size()) +
                              " entries, expected " + std::to_string(n_states * n_actions));
}

StochasticPolicy StochasticPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
    return StochasticPolicy(n_states, n_actions,
                            numvec(n_states * n_actions, 1.0 / prec_t(n_actions)));
}

StochasticPolicy StochasticPolicy::deterministic(std::size_t n_actions, const indvec& actions) {
    numvec probs(actions.size() * n_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] >= n_actions) throw StructuralError("action index out of range");
        probs[s * n_actions + actions[s]] = 1.0;
    }
    return StochasticPolicy(actions.size(), n_actions, std::move(probs));
}

bool StochasticPolicy::full_support() const {
    return std::all_of(probs_.begin(), probs_.end(),
                       [](prec_t p) { return p >= full_support_floor; });
}

bool StochasticPolicy::strictly_positive() const {
    return std::all_of(probs_.begin(), probs_.end(), [](prec_t p) { return p > 0.0; });
}

bool StochasticPolicy::is_stochastic(prec_t tol) const {
    for (std::size_t s = 0; s < n_states_; ++s) {
        prec_t total = 0.0;
        for (std::size_t a = 0; a < n_actions_; ++a) {
            const prec_t p = (*this)(s, a);
            if (!(p >= 0.0)) return false;
            total += p;
        }
        if (std::abs(total - 1.0) > tol) return false;
    }
    return true;
}

prec_t StochasticPolicy::linf_distance(const StochasticPolicy& other) const {
    if (other.probs_.size() != probs_.size())
        throw StructuralError("policies have different shapes");
    prec_t d = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i)
        d = std::max(d, std::abs(probs_[i] - other.probs_[i]));
    return d;
}

ActionSetPolicy::ActionSetPolicy(std::vector<indvec> sets) : sets_(std::move(sets)) {
    for (auto& set : sets_) {
        if (set.empty()) throw StructuralError("action sets must be non-empty");
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
}

bool ActionSetPolicy::contains(std::size_t s, std::size_t a) const {
    return std::binary_search(sets_[s].begin(), sets_[s].end(), a);
}

std::optional<std::size_t> ActionSetPolicy::first_difference(const ActionSetPolicy& other) const {
    if (other.n_states() != n_states()) throw StructuralError("action-set policies differ in size");
    for (std::size_t s = 0; s < sets_.size(); ++s)
        if (sets_[s] != other.sets_[s]) return s;
    return std::nullopt;
}

} // namespace irl
