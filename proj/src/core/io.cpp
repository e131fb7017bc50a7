#include "irlkit/io.hpp"

#include <fstream>
#include <sstream>

namespace irl::io {

namespace {

const json& need(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key))
        throw DocumentError(std::string("missing key \"") + key + "\"");
    return doc.at(key);
}

template <class T>
T get(const json& doc, const char* key) {
    try {
        return need(doc, key).get<T>();
    } catch (const json::exception& e) {
        throw DocumentError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

numvec numbers(const json& arr, const char* what) {
    if (!arr.is_array()) throw StructuralError(std::string(what) + " must be an array");
    numvec out;
    out.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw StructuralError(std::string(what) + " must contain numbers");
        out.push_back(x.get<prec_t>());
    }
    return out;
}

/// Flattens a nested [d0][d1]...[dk] array of numbers with exactly the given shape.
void flatten(const json& arr, const std::vector<std::size_t>& shape, std::size_t level, numvec& out,
             const char* what) {
    if (!arr.is_array() || arr.size() != shape[level])
        throw StructuralError(std::string(what) + " has the wrong shape");
    for (const auto& x : arr) {
        if (level + 1 == shape.size()) {
            if (!x.is_number()) throw StructuralError(std::string(what) + " must contain numbers");
            out.push_back(x.get<prec_t>());
        } else {
            flatten(x, shape, level + 1, out, what);
        }
    }
}

json nest2(const prec_t* data, std::size_t n0, std::size_t n1) {
    json out = json::array();
    for (std::size_t i = 0; i < n0; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < n1; ++j) row.push_back(data[i * n1 + j]);
        out.push_back(std::move(row));
    }
    return out;
}

json nest3(const prec_t* data, std::size_t n0, std::size_t n1, std::size_t n2) {
    json out = json::array();
    for (std::size_t i = 0; i < n0; ++i) out.push_back(nest2(data + i * n1 * n2, n1, n2));
    return out;
}

json metrics_json(const std::vector<std::pair<std::string, prec_t>>& metrics) {
    json out = json::object();
    for (const auto& [k, v] : metrics) out[k] = v;
    return out;
}

} // namespace

json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DocumentError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DocumentError(path + ": " + e.what());
    }
}

void write_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

// **** MDP and rewards

json to_json(const Mdp& mdp) {
    json doc;
    doc["n_states"] = mdp.n_states();
    doc["n_actions"] = mdp.n_actions();
    doc["gamma"] = mdp.discount();
    doc["mu0"] = mdp.initial();
    doc["transition"] = nest3(mdp.transition().data(), mdp.n_states(), mdp.n_actions(), mdp.n_states());
    if (!mdp.state_labels.empty() || !mdp.action_labels.empty())
        doc["labels"] = {{"states", mdp.state_labels}, {"actions", mdp.action_labels}};
    return doc;
}

Mdp mdp_from_json(const json& doc) {
    const auto ns = get<std::size_t>(doc, "n_states");
    const auto na = get<std::size_t>(doc, "n_actions");
    const auto gamma = get<prec_t>(doc, "gamma");
    numvec mu0 = numbers(need(doc, "mu0"), "mu0");
    numvec tau;
    tau.reserve(ns * na * ns);
    flatten(need(doc, "transition"), {ns, na, ns}, 0, tau, "transition");
    Mdp mdp(ns, na, std::move(tau), std::move(mu0), gamma);
    if (doc.contains("labels")) {
        const json& labels = doc.at("labels");
        if (labels.contains("states")) mdp.state_labels = labels.at("states").get<std::vector<std::string>>();
        if (labels.contains("actions")) mdp.action_labels = labels.at("actions").get<std::vector<std::string>>();
        if (!mdp.state_labels.empty() && mdp.state_labels.size() != ns)
            throw StructuralError("state labels do not match n_states");
        if (!mdp.action_labels.empty() && mdp.action_labels.size() != na)
            throw StructuralError("action labels do not match n_actions");
    }
    return mdp;
}

json to_json(const RewardTable& r) {
    const std::size_t ns = r.n_states(), na = r.n_actions();
    json doc;
    doc["domain"] = to_string(r.domain());
    switch (r.domain()) {
    case RewardDomain::SAS: doc["values"] = nest3(r.values().data(), ns, na, ns); break;
    case RewardDomain::SA: {
        numvec sa(ns * na);
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t a = 0; a < na; ++a) sa[s * na + a] = r(s, a, 0);
        doc["values"] = nest2(sa.data(), ns, na);
        break;
    }
    case RewardDomain::S: {
        numvec sv(ns);
        for (std::size_t s = 0; s < ns; ++s) sv[s] = r(s, 0, 0);
        doc["values"] = sv;
        doc["n_actions"] = na;
        break;
    }
    }
    return doc;
}

RewardTable reward_from_json(const json& doc, std::size_t n_actions) {
    const RewardDomain domain = parse_domain(get<std::string>(doc, "domain"));
    const json& values = need(doc, "values");
    if (!values.is_array() || values.empty()) throw StructuralError("reward values must be a non-empty array");
    const std::size_t ns = values.size();
    if (domain == RewardDomain::S) {
        if (doc.contains("n_actions")) n_actions = get<std::size_t>(doc, "n_actions");
        if (n_actions == 0) throw DocumentError("S-domain reward needs n_actions");
        return RewardTable::from_s(ns, n_actions, numbers(values, "values"));
    }
    if (!values[0].is_array() || values[0].empty()) throw StructuralError("reward values have the wrong shape");
    const std::size_t na = values[0].size();
    numvec flat;
    if (domain == RewardDomain::SA) {
        flatten(values, {ns, na}, 0, flat, "values");
        return RewardTable::from_sa(ns, na, flat);
    }
    flatten(values, {ns, na, ns}, 0, flat, "values");
    return RewardTable(ns, na, std::move(flat), RewardDomain::SAS);
}

json to_json(const StochasticPolicy& pi) { return nest2(pi.probs().data(), pi.n_states(), pi.n_actions()); }

StochasticPolicy policy_from_json(const json& doc) {
    if (!doc.is_array() || doc.empty() || !doc[0].is_array()) throw StructuralError("policy must be [s][a]");
    const std::size_t ns = doc.size(), na = doc[0].size();
    numvec flat;
    flatten(doc, {ns, na}, 0, flat, "policy");
    return StochasticPolicy(ns, na, std::move(flat));
}

json to_json(const ActionSetPolicy& sets) {
    json out = json::array();
    for (const auto& s : sets.sets()) out.push_back(s);
    return out;
}

ActionSetPolicy action_sets_from_json(const json& doc) {
    return ActionSetPolicy(doc.get<std::vector<indvec>>());
}

// **** transforms and models

json to_json(const TransformSpec& t) {
    json doc;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PotentialShaping>) {
                doc["kind"] = "ps";
                doc["phi"] = k.potential.phi;
                doc["zero_initial"] = k.potential.zero_initial_expectation;
            } else if constexpr (std::is_same_v<K, SRedistribution>) {
                doc["kind"] = "sr";
                doc["replacement"] = to_json(k.replacement);
            } else if constexpr (std::is_same_v<K, LinearScaling>) {
                doc["kind"] = "ls";
                doc["c"] = k.c;
            } else if constexpr (std::is_same_v<K, ConstantShift>) {
                doc["kind"] = "cs";
                doc["k"] = k.k;
            } else if constexpr (std::is_same_v<K, OptimalityPreserving>) {
                doc["kind"] = "op";
                doc["psi"] = k.psi;
                doc["slack"] = nest2(k.slack.data(), k.psi.size(), k.psi.empty() ? 0 : k.slack.size() / k.psi.size());
            } else {
                doc["kind"] = "seq";
                doc["steps"] = json::array();
                for (const auto& step : k.steps) doc["steps"].push_back(to_json(step));
            }
        },
        t.kind);
    return doc;
}

TransformSpec transform_from_json(const json& doc) {
    const auto kind = get<std::string>(doc, "kind");
    if (kind == "ps")
        return TransformSpec::ps(numbers(need(doc, "phi"), "phi"), doc.value("zero_initial", false));
    if (kind == "sr") return TransformSpec::sr(reward_from_json(need(doc, "replacement")));
    if (kind == "ls") return TransformSpec::ls(get<prec_t>(doc, "c"));
    if (kind == "cs") return TransformSpec::cs(get<prec_t>(doc, "k"));
    if (kind == "op") {
        numvec psi = numbers(need(doc, "psi"), "psi");
        const json& slack = need(doc, "slack");
        if (!slack.is_array() || slack.size() != psi.size() || slack.empty() || !slack[0].is_array())
            throw StructuralError("slack must be [s][a]");
        numvec flat;
        flatten(slack, {psi.size(), slack[0].size()}, 0, flat, "slack");
        return TransformSpec::op(std::move(psi), std::move(flat));
    }
    if (kind == "seq") {
        std::vector<TransformSpec> steps;
        for (const auto& s : need(doc, "steps")) steps.push_back(transform_from_json(s));
        return TransformSpec::seq(std::move(steps));
    }
    throw DocumentError("unknown transform kind: " + kind);
}

json to_json(const FVariantSpec& spec) {
    json doc;
    if (const auto* m = std::get_if<MixtureVariant>(&spec.kind)) {
        doc["variant"] = "mixture";
        doc["lambda"] = m->lambda;
        doc["beta1"] = m->beta1;
        doc["beta2"] = m->beta2;
    } else if (const auto* t = std::get_if<TemperedRankVariant>(&spec.kind)) {
        doc["variant"] = "tempered-rank";
        doc["beta"] = t->beta;
        doc["p"] = t->power;
    }
    return doc;
}

FVariantSpec fvariant_from_json(const json& doc) {
    const auto v = get<std::string>(doc, "variant");
    if (v == "mixture")
        return {MixtureVariant{get<prec_t>(doc, "lambda"), get<prec_t>(doc, "beta1"), get<prec_t>(doc, "beta2")}};
    if (v == "tempered-rank") return {TemperedRankVariant{get<prec_t>(doc, "beta"), get<prec_t>(doc, "p")}};
    throw DocumentError("unknown F-variant: " + v);
}

json to_json(const BehaviouralModel& model) {
    json doc;
    if (const auto* m = std::get_if<BoltzmannModel>(&model.kind)) {
        doc["kind"] = "boltzmann";
        doc["beta"] = m->beta;
    } else if (const auto* m = std::get_if<MceModel>(&model.kind)) {
        doc["kind"] = "mce";
        doc["alpha"] = m->alpha;
    } else if (std::holds_alternative<OptimalSetModel>(model.kind)) {
        doc["kind"] = "optimal-set";
    } else if (const auto* m = std::get_if<FVariantModel>(&model.kind)) {
        doc["kind"] = "fvariant";
        doc["spec"] = to_json(m->spec);
    }
    return doc;
}

BehaviouralModel model_from_json(const json& doc) {
    const auto kind = get<std::string>(doc, "kind");
    if (kind == "boltzmann") return {BoltzmannModel{get<prec_t>(doc, "beta")}};
    if (kind == "mce") return {MceModel{get<prec_t>(doc, "alpha")}};
    if (kind == "optimal-set") return {OptimalSetModel{}};
    if (kind == "fvariant") return {FVariantModel{fvariant_from_json(need(doc, "spec"))}};
    throw DocumentError("unknown behavioural model: " + kind);
}

// **** results

json to_json(const ValidationReport& report) {
    json doc;
    doc["ok"] = report.ok();
    doc["violations"] = json::array();
    for (const auto& v : report.violations)
        doc["violations"].push_back({{"rule", v.rule}, {"location", v.location}, {"magnitude", v.magnitude}});
    return doc;
}

json to_json(const Decomposition& d) {
    return {{"c", d.c},
            {"phi", d.phi.phi},
            {"zero_initial", d.phi.zero_initial_expectation},
            {"residual", d.residual},
            {"degenerate", d.degenerate}};
}

json to_json(const Witness& w) {
    json doc;
    if (w.state) doc["state"] = *w.state;
    if (!w.policies.empty()) {
        doc["policies"] = json::array();
        for (const auto& p : w.policies) doc["policies"].push_back(to_json(p));
        doc["j1"] = w.j1;
        doc["j2"] = w.j2;
    }
    doc["note"] = w.note;
    return doc;
}

json to_json(const EquivVerdict& v) {
    json doc;
    doc["relation"] = to_string(v.relation);
    doc["equivalent"] = v.equivalent;
    doc["cross_checked"] = v.cross_checked;
    if (v.certificate) doc["certificate"] = to_json(*v.certificate);
    if (v.witness) doc["witness"] = to_json(*v.witness);
    return doc;
}

json to_json(const OptimalBundle& b) {
    json doc;
    doc["v_star"] = b.v_star;
    doc["q_star"] = nest2(b.q_star.data(), b.n_states, b.n_actions);
    doc["a_star"] = nest2(b.a_star.data(), b.n_states, b.n_actions);
    doc["opt_sets"] = to_json(b.opt_sets);
    doc["residual"] = b.residual;
    doc["iterations"] = b.iterations;
    return doc;
}

json to_json(const CounterexampleRecord& rec) {
    json doc;
    doc["relation"] = to_string(rec.relation);
    doc["premise"] = to_string(rec.premise);
    doc["mdp"] = to_json(rec.mdp);
    if (rec.model_mdp) doc["model_mdp"] = to_json(*rec.model_mdp);
    doc["r1"] = to_json(rec.r1);
    doc["r2"] = to_json(rec.r2);
    doc["beta"] = rec.beta;
    if (rec.observed_policy) doc["observed_policy"] = to_json(*rec.observed_policy);
    if (rec.observed_sets) doc["observed_sets"] = to_json(*rec.observed_sets);
    if (rec.state) doc["state"] = *rec.state;
    doc["parameters"] = metrics_json(rec.parameters);
    return doc;
}

CounterexampleRecord record_from_json(const json& doc) {
    CounterexampleRecord rec;
    rec.relation = parse_relation(get<std::string>(doc, "relation"));
    rec.premise = parse_premise(get<std::string>(doc, "premise"));
    rec.mdp = mdp_from_json(need(doc, "mdp"));
    if (doc.contains("model_mdp")) rec.model_mdp = mdp_from_json(doc.at("model_mdp"));
    rec.r1 = reward_from_json(need(doc, "r1"));
    rec.r2 = reward_from_json(need(doc, "r2"));
    rec.beta = doc.value("beta", 1.0);
    if (doc.contains("observed_policy")) rec.observed_policy = policy_from_json(doc.at("observed_policy"));
    if (doc.contains("observed_sets")) rec.observed_sets = action_sets_from_json(doc.at("observed_sets"));
    if (doc.contains("state")) rec.state = doc.at("state").get<std::size_t>();
    if (doc.contains("parameters"))
        for (const auto& [k, v] : doc.at("parameters").items()) rec.parameters.emplace_back(k, v.get<prec_t>());
    return rec;
}

json to_json(const TrialReport& report, bool include_wall_clock) {
    json doc;
    doc["claim_id"] = report.claim_id;
    doc["seed"] = report.seed;
    doc["passed_claim"] = report.ok();
    doc["trials"] = report.trials;
    doc["passed"] = report.passed;
    doc["failed"] = report.failed;
    doc["skipped"] = report.skipped;
    doc["counterexamples"] = report.counterexamples;
    doc["outcomes"] = json::array();
    for (const auto& o : report.outcomes) {
        json row;
        row["group"] = o.group;
        row["index"] = o.index;
        row["status"] = to_string(o.status);
        if (!o.note.empty()) row["note"] = o.note;
        if (!o.metrics.empty()) row["metrics"] = metrics_json(o.metrics);
        doc["outcomes"].push_back(std::move(row));
    }
    if (report.counterexample) doc["counterexample"] = to_json(*report.counterexample);
    if (include_wall_clock) doc["wall_clock_ms"] = report.wall_clock_ms;
    return doc;
}

void merge_config(ExperimentConfig& config, const json& doc) {
    if (!doc.is_object()) throw DocumentError("config must be an object");
    const auto opt = [&](const char* key, std::optional<prec_t>& dst) {
        if (doc.contains(key)) dst = get<prec_t>(doc, key);
    };
    if (doc.contains("claim")) config.claim_id = get<std::string>(doc, "claim");
    if (doc.contains("trials")) config.trials = get<std::size_t>(doc, "trials");
    if (doc.contains("seed")) config.seed = get<std::uint64_t>(doc, "seed");
    if (doc.contains("reward_bound")) config.reward_bound = get<prec_t>(doc, "reward_bound");
    if (doc.contains("tol")) config.solver.tol = get<prec_t>(doc, "tol");
    if (doc.contains("tie_tol")) config.solver.tie_tol = get<prec_t>(doc, "tie_tol");
    if (doc.contains("cap")) config.cap = get<std::uint64_t>(doc, "cap");
    if (doc.contains("negative_budget")) config.negative_budget = get<std::size_t>(doc, "negative_budget");
    if (doc.contains("states")) {
        const auto r = get<std::vector<std::size_t>>(doc, "states");
        if (r.size() != 2) throw DocumentError("states must be [min, max]");
        config.generator.states = {r[0], r[1]};
    }
    if (doc.contains("actions")) {
        const auto r = get<std::vector<std::size_t>>(doc, "actions");
        if (r.size() != 2) throw DocumentError("actions must be [min, max]");
        config.generator.actions = {r[0], r[1]};
    }
    if (doc.contains("sparsity")) config.generator.sparsity = get<prec_t>(doc, "sparsity");
    opt("gamma1", config.gamma1);
    opt("gamma2", config.gamma2);
    opt("beta1", config.beta1);
    opt("beta2", config.beta2);
    opt("alpha1", config.alpha1);
    opt("alpha2", config.alpha2);
}

} // namespace irl::io
