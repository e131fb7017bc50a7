#pragma once

// JSON documents for MDPs, rewards, transforms, verdicts and lab reports.
// Keys are emitted in a fixed order; doubles use shortest round-trip form.

#include "irlkit/equiv.hpp"
#include "irlkit/lab.hpp"
#include "irlkit/models.hpp"

#include <json.hpp>

#include <string>

namespace irl::io {

using json = nlohmann::ordered_json;

/// A document is missing a key or has the wrong JSON type.
class DocumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

json read_file(const std::string& path);
void write_file(const std::string& path, const json& doc);

json to_json(const Mdp& mdp);
/// Shape errors throw StructuralError; probabilities are not validated here.
Mdp mdp_from_json(const json& doc);

json to_json(const RewardTable& r);
/// S-domain documents carry no action axis; their action count comes from an
/// "n_actions" key or, failing that, from `n_actions`.
RewardTable reward_from_json(const json& doc, std::size_t n_actions = 0);

json to_json(const StochasticPolicy& pi);
StochasticPolicy policy_from_json(const json& doc);

json to_json(const ActionSetPolicy& sets);
ActionSetPolicy action_sets_from_json(const json& doc);

json to_json(const TransformSpec& t);
TransformSpec transform_from_json(const json& doc);

json to_json(const FVariantSpec& spec);
FVariantSpec fvariant_from_json(const json& doc);

json to_json(const BehaviouralModel& model);
BehaviouralModel model_from_json(const json& doc);

json to_json(const ValidationReport& report);
json to_json(const Decomposition& d);
json to_json(const Witness& w);
json to_json(const EquivVerdict& v);
json to_json(const OptimalBundle& b);

json to_json(const CounterexampleRecord& rec);
CounterexampleRecord record_from_json(const json& doc);

/// `include_wall_clock = false` drops the only run-dependent field.
json to_json(const TrialReport& report, bool include_wall_clock = true);

/// Overrides fields of `config` with the keys present in `doc`.
void merge_config(ExperimentConfig& config, const json& doc);

} // namespace irl::io
