#include "irlkit/cli.hpp"

#include "irlkit/io.hpp"
#include "irlkit/kernels.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace irl::cli {

namespace {

using io::json;

struct Common {
    std::string format = "json";
    std::string out_path;
    std::optional<prec_t> tol;
};

struct Emitter {
    const Common& common;
    std::ostream& out;

    void emit(const json& doc, const std::string& text) const {
        const std::string body = common.format == "json" ? doc.dump(2) + "\n" : text;
        if (common.out_path.empty()) {
            out << body;
            return;
        }
        std::ofstream file(common.out_path);
        if (!file) throw std::runtime_error("cannot write " + common.out_path);
        file << body;
    }
};

SolverOptions solver_options(const Common& common) {
    SolverOptions o;
    if (common.tol) o.tol = *common.tol;
    return o;
}

std::string fmt(prec_t x) {
    std::ostringstream s;
    s << std::setprecision(10) << x;
    return s.str();
}

/// Loads and validates an MDP; returns nullopt after printing violations.
std::optional<Mdp> load_mdp(const std::string& path, std::ostream& err) {
    Mdp mdp = io::mdp_from_json(io::read_file(path));
    const ValidationReport report = validate_mdp(mdp);
    if (!report.ok()) {
        err << "invalid MDP " << path << ":\n";
        for (const auto& v : report.violations)
            err << "  " << v.rule << " at " << v.location << " (" << fmt(v.magnitude) << ")\n";
        return std::nullopt;
    }
    return mdp;
}

RewardTable load_reward(const std::string& path, const Mdp& mdp) {
    RewardTable r = io::reward_from_json(io::read_file(path), mdp.n_actions());
    check_compatible(mdp, r);
    if (!r.check_domain()) throw StructuralError("reward " + path + " is not finite");
    return r;
}

std::string sets_text(const ActionSetPolicy& sets, const Mdp& mdp) {
    std::string out;
    for (std::size_t s = 0; s < sets.n_states(); ++s) {
        out += "  " + mdp.state_name(s) + ": {";
        for (std::size_t i = 0; i < sets[s].size(); ++i)
            out += (i ? "," : "") + mdp.action_name(sets[s][i]);
        out += "}\n";
    }
    return out;
}

std::string policy_text(const StochasticPolicy& pi, const Mdp& mdp) {
    std::string out;
    for (std::size_t s = 0; s < pi.n_states(); ++s) {
        out += "  " + mdp.state_name(s) + ":";
        for (std::size_t a = 0; a < pi.n_actions(); ++a)
            out += " " + mdp.action_name(a) + "=" + fmt(pi(s, a));
        out += "\n";
    }
    return out;
}

// **** subcommands

int cmd_validate(const Common& common, const std::string& mdp_path, const std::string& reward_path,
                 std::ostream& out) {
    const Mdp mdp = io::mdp_from_json(io::read_file(mdp_path));
    ValidationReport report = validate_mdp(mdp);
    if (!reward_path.empty()) {
        try {
            load_reward(reward_path, mdp);
        } catch (const std::invalid_argument& e) {
            report.violations.push_back({"reward", e.what(), 0.0});
        }
    }
    std::string text = report.ok() ? "ok\n" : "";
    for (const auto& v : report.violations)
        text += v.rule + " at " + v.location + " (" + fmt(v.magnitude) + ")\n";
    Emitter{common, out}.emit(io::to_json(report), text);
    return report.ok() ? exit_ok : exit_invalid;
}

int cmd_solve(const Common& common, const std::string& mdp_path, const std::string& reward_path,
              std::optional<prec_t> beta, std::optional<prec_t> alpha, std::ostream& out,
              std::ostream& err) {
    const auto mdp = load_mdp(mdp_path, err);
    if (!mdp) return exit_invalid;
    const RewardTable r = load_reward(reward_path, *mdp);
    const SolverOptions opts = solver_options(common);
    const OptimalBundle b = optimal_values(*mdp, r, opts);

    json doc = io::to_json(b);
    std::string text = "V*:";
    for (std::size_t s = 0; s < b.n_states; ++s) text += " " + mdp->state_name(s) + "=" + fmt(b.v_star[s]);
    text += "\nQ*:\n";
    for (std::size_t s = 0; s < b.n_states; ++s) {
        text += "  " + mdp->state_name(s) + ":";
        for (std::size_t a = 0; a < b.n_actions; ++a) text += " " + mdp->action_name(a) + "=" + fmt(b.q(s, a));
        text += "\n";
    }
    text += "optimal actions:\n" + sets_text(b.opt_sets, *mdp);
    if (beta) {
        const StochasticPolicy pi = boltzmann_policy(*mdp, r, *beta, opts);
        doc["boltzmann"] = {{"beta", *beta}, {"policy", io::to_json(pi)}};
        text += "boltzmann(beta=" + fmt(*beta) + "):\n" + policy_text(pi, *mdp);
    }
    if (alpha) {
        const SoftBundle soft = soft_optimal_values(*mdp, r, *alpha, opts);
        const StochasticPolicy pi = soft_policy(soft);
        doc["mce"] = {{"alpha", *alpha}, {"policy", io::to_json(pi)}, {"v_soft", soft.v_soft},
                      {"residual", soft.residual}};
        text += "mce(alpha=" + fmt(*alpha) + "):\n" + policy_text(pi, *mdp);
    }
    Emitter{common, out}.emit(doc, text);
    return exit_ok;
}

int cmd_equiv(const Common& common, const std::string& mdp_path, const std::string& r1_path,
              const std::string& r2_path, const std::string& relation, std::ostream& out,
              std::ostream& err) {
    const auto mdp = load_mdp(mdp_path, err);
    if (!mdp) return exit_invalid;
    const RewardTable r1 = load_reward(r1_path, *mdp);
    const RewardTable r2 = load_reward(r2_path, *mdp);
    EquivOptions opts;
    opts.solver = solver_options(common);
    const EquivVerdict v = decide(parse_relation(relation), r1, r2, *mdp, opts);

    std::string text = std::string(to_string(v.relation)) + ": " +
                       (v.equivalent ? "equivalent" : "not equivalent") + "\n";
    if (v.certificate) {
        text += "certificate: c=" + fmt(v.certificate->c) + " phi=(";
        for (std::size_t s = 0; s < v.certificate->phi.phi.size(); ++s)
            text += (s ? "," : "") + fmt(v.certificate->phi.phi[s]);
        text += ") residual=" + fmt(v.certificate->residual) + "\n";
    }
    if (v.witness) {
        if (v.witness->state) text += "witness: state " + mdp->state_name(*v.witness->state) + "\n";
        else if (!v.witness->note.empty()) text += "witness: " + v.witness->note + "\n";
    }
    Emitter{common, out}.emit(io::to_json(v), text);
    return v.equivalent ? exit_ok : exit_negative;
}

int cmd_transform(const Common& common, const std::string& mdp_path, const std::string& reward_path,
                  const std::string& spec_path, const std::string& sample, std::optional<std::uint64_t> seed,
                  prec_t bound, std::ostream& out, std::ostream& err) {
    const auto mdp = load_mdp(mdp_path, err);
    if (!mdp) return exit_invalid;
    const RewardTable r = load_reward(reward_path, *mdp);
    const SolverOptions opts = solver_options(common);
    TransformSpec spec;
    if (!spec_path.empty()) {
        spec = io::transform_from_json(io::read_file(spec_path));
    } else {
        if (!seed) {
            err << "--sample needs --seed\n";
            return exit_invalid;
        }
        if (sample == "ps") spec = sample_potential_shaping(*mdp, bound, false, *seed);
        else if (sample == "ps0") spec = sample_potential_shaping(*mdp, bound, true, *seed);
        else if (sample == "sr") spec = sample_s_redistribution(*mdp, r, bound, *seed);
        else if (sample == "op") spec = sample_optimality_preserving(*mdp, r, bound, *seed, opts);
        else {
            err << "unknown sampler " << sample << " (ps, ps0, sr, op)\n";
            return exit_invalid;
        }
    }
    const RewardTable result = apply(spec, r, *mdp, opts);
    json doc = {{"transform", io::to_json(spec)}, {"reward", io::to_json(result)}};
    Emitter{common, out}.emit(doc, io::to_json(result).dump() + "\n");
    return exit_ok;
}

std::string report_text(const TrialReport& rep) {
    std::ostringstream s;
    s << rep.claim_id << ": " << (rep.ok() ? "PASS" : "FAIL") << " (" << rep.passed << " passed, "
      << rep.failed << " failed, " << rep.skipped << " skipped, " << rep.counterexamples
      << " counterexamples)\n";
    std::size_t shown = 0;
    for (const auto& o : rep.outcomes)
        if (o.status == TrialStatus::Fail && shown++ < 5)
            s << "  " << o.group << "#" << o.index << ": " << o.note << "\n";
    return s.str();
}

int cmd_lab(const Common& common, ExperimentConfig cfg, std::ostream& out, std::ostream& err) {
    std::vector<std::string> claims;
    if (cfg.claim_id == "all") {
        claims = claim_ids();
    } else if (is_registered(cfg.claim_id)) {
        claims = {cfg.claim_id};
    } else {
        err << "unknown claim " << cfg.claim_id << "; registered:";
        for (const auto& id : claim_ids()) err << " " << id;
        err << "\n";
        return exit_invalid;
    }

    bool all_ok = true;
    json reports = json::array();
    std::string text;
    for (const auto& id : claims) {
        ExperimentConfig c = cfg;
        c.claim_id = id;
        const TrialReport rep = verify_claim(c);
        all_ok = all_ok && rep.ok();
        reports.push_back(io::to_json(rep));
        text += report_text(rep);
    }
    json doc;
    if (claims.size() == 1) {
        doc = reports.front();
    } else {
        doc["seed"] = cfg.seed;
        doc["passed_claim"] = all_ok;
        doc["claims"] = std::move(reports);
    }
    Emitter{common, out}.emit(doc, text);
    return all_ok ? exit_ok : exit_negative;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tabular reward-equivalence and misspecification toolkit", "irlkit"};
    app.require_subcommand(1);
    Common common;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", common.format, "json or text")->check(CLI::IsMember({"json", "text"}));
        sub->add_option("--out", common.out_path, "write the report here instead of stdout");
        sub->add_option("--tol", common.tol, "relative Bellman residual target");
    };

    std::string mdp_path, r1_path, r2_path, spec_path, sample, relation = "ord";
    std::optional<prec_t> beta, alpha;
    std::optional<std::uint64_t> seed;
    prec_t bound = 1.0;

    auto* validate = app.add_subcommand("validate", "check an MDP (and optionally a reward) document");
    validate->add_option("mdp", mdp_path)->required();
    validate->add_option("reward", r1_path);
    add_common(validate);

    auto* solve = app.add_subcommand("solve", "optimal values, optimal actions and model policies");
    solve->add_option("mdp", mdp_path)->required();
    solve->add_option("reward", r1_path)->required();
    solve->add_option("--beta", beta, "also emit the Boltzmann policy");
    solve->add_option("--alpha", alpha, "also emit the soft-optimal (MCE) policy");
    add_common(solve);

    auto* equiv = app.add_subcommand("equiv", "decide reward equivalence");
    equiv->add_option("mdp", mdp_path)->required();
    equiv->add_option("r1", r1_path)->required();
    equiv->add_option("r2", r2_path)->required();
    equiv->add_option("--relation", relation, "opt, ord or jeq")->check(CLI::IsMember({"opt", "ord", "jeq"}));
    add_common(equiv);

    auto* transform = app.add_subcommand("transform", "apply a transform document or a seeded sample");
    transform->add_option("mdp", mdp_path)->required();
    transform->add_option("reward", r1_path)->required();
    auto* spec_opt = transform->add_option("--spec", spec_path, "transform document");
    auto* sample_opt = transform->add_option("--sample", sample, "ps, ps0, sr or op");
    spec_opt->excludes(sample_opt);
    transform->add_option("--seed", seed);
    transform->add_option("--bound", bound, "sampling bound");
    add_common(transform);

    ExperimentConfig cfg;
    std::string claim_pos, claim_flag, config_path;
    std::optional<std::size_t> trials;
    std::optional<prec_t> gamma1, gamma2, beta1, beta2, alpha1, alpha2;
    std::uint64_t lab_seed = 0;
    auto* lab = app.add_subcommand("lab", "run registered claims (or all)");
    lab->add_option("claim_id", claim_pos, "claim id or 'all'");
    lab->add_option("--claim", claim_flag, "claim id or 'all'");
    lab->add_option("--seed", lab_seed)->required();
    lab->add_option("--trials", trials);
    lab->add_option("--config", config_path, "JSON config; flags override its values");
    lab->add_option("--gamma1", gamma1);
    lab->add_option("--gamma2", gamma2);
    lab->add_option("--beta", beta1, "learner temperature");
    lab->add_option("--beta2", beta2, "true temperature");
    lab->add_option("--alpha", alpha1, "learner entropy weight");
    lab->add_option("--alpha2", alpha2, "true entropy weight");
    add_common(lab);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_invalid;
    }

    try {
        if (validate->parsed()) return cmd_validate(common, mdp_path, r1_path, out);
        if (solve->parsed()) return cmd_solve(common, mdp_path, r1_path, beta, alpha, out, err);
        if (equiv->parsed()) return cmd_equiv(common, mdp_path, r1_path, r2_path, relation, out, err);
        if (transform->parsed()) {
            if (spec_path.empty() && sample.empty()) {
                err << "transform needs --spec or --sample\n";
                return exit_invalid;
            }
            return cmd_transform(common, mdp_path, r1_path, spec_path, sample, seed, bound, out, err);
        }
        if (lab->parsed()) {
            if (!config_path.empty()) io::merge_config(cfg, io::read_file(config_path));
            if (!claim_flag.empty()) cfg.claim_id = claim_flag;
            else if (!claim_pos.empty()) cfg.claim_id = claim_pos;
            if (cfg.claim_id.empty()) {
                err << "lab needs a claim id or 'all'\n";
                return exit_invalid;
            }
            cfg.seed = lab_seed;
            if (trials) cfg.trials = *trials;
            if (common.tol) cfg.solver.tol = *common.tol;
            if (gamma1) cfg.gamma1 = gamma1;
            if (gamma2) cfg.gamma2 = gamma2;
            if (beta1) cfg.beta1 = beta1;
            if (beta2) cfg.beta2 = beta2;
            if (alpha1) cfg.alpha1 = alpha1;
            if (alpha2) cfg.alpha2 = alpha2;
            return cmd_lab(common, cfg, out, err);
        }
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return exit_convergence;
    } catch (const ConsistencyError& e) {
        err << "internal consistency failure: " << e.what() << "\n";
        return exit_internal;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_invalid;
    } catch (const CapacityError& e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_invalid;
}

} // namespace irl::cli
