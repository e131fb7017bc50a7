#include "irlkit/lab.hpp"

#include "irlkit/kernels.hpp"
#include "irlkit/mdp.hpp"
#include "irlkit/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

namespace irl {

// *************************************************************************************
// **** Generators
// *************************************************************************************

namespace {

void dirichlet_row(Rng& rng, prec_t* row, std::size_t n, prec_t sparsity) {
    prec_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        row[i] = rng.exponential();
        if (sparsity > 0 && rng.bernoulli(sparsity)) row[i] = 0;
        sum += row[i];
    }
    if (sum == 0) {
        const std::size_t k = std::size_t(rng.index(n));
        row[k] = 1;
        sum = 1;
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

std::size_t draw_size(Rng& rng, const SizeRange& range) {
    if (range.max < range.min) throw std::invalid_argument("empty size range");
    return range.min + std::size_t(rng.index(range.max - range.min + 1));
}

} // namespace

Mdp random_mdp(std::size_t n_states, std::size_t n_actions, std::uint64_t seed,
               const MdpGenOptions& opts) {
    if (n_states < 1 || n_actions < 1) throw std::invalid_argument("empty state or action set");
    Rng rng(seed);
    for (std::size_t attempt = 0; attempt < opts.budget; ++attempt) {
        const prec_t discount =
            opts.fixed_discount ? *opts.fixed_discount : rng.uniform(opts.discount_lo, opts.discount_hi);
        numvec tau(n_states * n_actions * n_states);
        for (std::size_t s = 0; s < n_states; ++s) {
            for (std::size_t a = 0; a < n_actions; ++a) {
                prec_t* row = tau.data() + (s * n_actions + a) * n_states;
                if (opts.trivial && a > 0)
                    std::copy(row - n_states, row, row);
                else
                    dirichlet_row(rng, row, n_states, opts.sparsity);
            }
        }
        numvec mu0(n_states, 0.0);
        if (rng.bernoulli(0.5))
            mu0[0] = 1;
        else
            dirichlet_row(rng, mu0.data(), n_states, 0.0);
        Mdp mdp(n_states, n_actions, std::move(tau), std::move(mu0), discount);
        if (validate_mdp(mdp).ok()) return mdp;
    }
    throw GenerationError("random_mdp: no valid MDP within the rejection budget");
}

Mdp random_mdp(std::uint64_t seed, const MdpGenOptions& opts) {
    Rng rng(substream_seed(seed, 0x51e5));
    const std::size_t ns = draw_size(rng, opts.states);
    const std::size_t na = draw_size(rng, opts.actions);
    return random_mdp(ns, na, seed, opts);
}

RewardTable random_reward(const Mdp& mdp, RewardDomain domain, prec_t bound, std::uint64_t seed,
                          prec_t gap_floor, std::size_t budget) {
    if (!(bound > 0)) throw std::invalid_argument("reward bound must be positive");
    Rng rng(seed);
    const std::size_t ns = mdp.n_states(), na = mdp.n_actions();
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        RewardTable r;
        switch (domain) {
        case RewardDomain::SAS: {
            numvec v(ns * na * ns);
            for (auto& x : v) x = rng.uniform(-bound, bound);
            r = RewardTable(ns, na, std::move(v));
            break;
        }
        case RewardDomain::SA: {
            numvec v(ns * na);
            for (auto& x : v) x = rng.uniform(-bound, bound);
            r = RewardTable::from_sa(ns, na, v);
            break;
        }
        case RewardDomain::S: {
            numvec v(ns);
            for (auto& x : v) x = rng.uniform(-bound, bound);
            r = RewardTable::from_s(ns, na, v);
            break;
        }
        }
        if (advantage_gap(optimal_values(mdp, r)) >= gap_floor) return r;
    }
    throw GenerationError("random_reward: advantage-gap floor not met within the rejection budget");
}

StochasticPolicy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed) {
    Rng rng(seed);
    numvec probs(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
        prec_t* row = probs.data() + s * n_actions;
        dirichlet_row(rng, row, n_actions, 0.0);
        prec_t sum = 0;
        for (std::size_t a = 0; a < n_actions; ++a) sum += (row[a] = std::max(row[a], 1e-3));
        for (std::size_t a = 0; a < n_actions; ++a) row[a] /= sum;
    }
    return StochasticPolicy(n_states, n_actions, std::move(probs));
}

// *************************************************************************************
// **** Counterexample records
// *************************************************************************************

const char* to_string(Premise premise) {
    switch (premise) {
    case Premise::BoltzmannMatch: return "boltzmann-match";
    case Premise::RewardVectorMatch: return "reward-vector-match";
    case Premise::ObservedBoltzmann: return "observed-boltzmann";
    case Premise::ObservedOptimalSets: return "observed-optimal-sets";
    }
    return "unknown";
}

Premise parse_premise(const std::string& text) {
    for (Premise p : {Premise::BoltzmannMatch, Premise::RewardVectorMatch, Premise::ObservedBoltzmann,
                      Premise::ObservedOptimalSets})
        if (text == to_string(p)) return p;
    throw std::invalid_argument("unknown premise: " + text);
}

prec_t CounterexampleRecord::parameter(const std::string& name) const {
    for (const auto& [k, v] : parameters)
        if (k == name) return v;
    throw std::out_of_range("no parameter " + name);
}

namespace {

constexpr prec_t boltzmann_match_tolerance = 1e-10;
constexpr prec_t observed_policy_tolerance = 1e-8;

bool premise_holds(const CounterexampleRecord& rec, std::string& reason) {
    switch (rec.premise) {
    case Premise::BoltzmannMatch: {
        if (!rec.model_mdp) return reason = "missing model MDP", false;
        const auto p1 = boltzmann_policy(*rec.model_mdp, rec.r1, rec.beta);
        const auto p2 = boltzmann_policy(*rec.model_mdp, rec.r2, rec.beta);
        const prec_t d = p1.linf_distance(p2);
        if (d > boltzmann_match_tolerance)
            return reason = "model policies differ by " + std::to_string(d), false;
        return true;
    }
    case Premise::RewardVectorMatch: {
        if (!rec.model_mdp) return reason = "missing model MDP", false;
        const RewardVector v1 = reward_vector(rec.r1, *rec.model_mdp);
        const RewardVector v2 = reward_vector(rec.r2, *rec.model_mdp);
        const prec_t tol = 1e-12 * std::max({prec_t(1), rec.r1.max_abs(), rec.r2.max_abs()});
        for (std::size_t i = 0; i < v1.r.size(); ++i)
            if (std::abs(v1.r[i] - v2.r[i]) > tol)
                return reason = "expected rewards differ under the model transition", false;
        return true;
    }
    case Premise::ObservedBoltzmann: {
        if (!rec.observed_policy) return reason = "missing observed policy", false;
        const auto p1 = boltzmann_policy(rec.mdp, rec.r1, rec.beta);
        if (p1.linf_distance(*rec.observed_policy) > observed_policy_tolerance)
            return reason = "learned reward does not reproduce the observed policy", false;
        const auto p2 = boltzmann_policy(rec.mdp, rec.r2, rec.beta);
        if (p2.linf_distance(*rec.observed_policy) <= observed_policy_tolerance)
            return reason = "observed policy is not misspecified", false;
        return true;
    }
    case Premise::ObservedOptimalSets: {
        if (!rec.observed_sets) return reason = "missing observed sets", false;
        if (!(optimal_set_policy(rec.mdp, rec.r1) == *rec.observed_sets))
            return reason = "learned reward does not reproduce the observed sets", false;
        if (optimal_set_policy(rec.mdp, rec.r2) == *rec.observed_sets)
            return reason = "observed sets are not misspecified", false;
        return true;
    }
    }
    return reason = "unknown premise", false;
}

} // namespace

bool verify_record(const CounterexampleRecord& rec, std::string* reason) {
    std::string why;
    const auto fail = [&](const std::string& w) {
        if (reason) *reason = w;
        return false;
    };
    if (!validate_mdp(rec.mdp).ok()) return fail("payload MDP does not validate");
    if (rec.model_mdp && !validate_mdp(*rec.model_mdp).ok()) return fail("model MDP does not validate");
    if (!premise_holds(rec, why)) return fail(why);
    const EquivVerdict v = decide(rec.relation, rec.r1, rec.r2, rec.mdp);
    if (v.equivalent) return fail("rewards are equivalent; no violation");
    if (rec.relation == Relation::OPT && rec.state && v.witness && v.witness->state != rec.state)
        return fail("violation found at a different state");
    return true;
}

// *************************************************************************************
// **** gamma counterexample
// *************************************************************************************

namespace {

bool in_unit_interval(prec_t g) { return g > 0.0 && g < 1.0; }

numvec gamma_grid(const GammaSearchOptions& opts) {
    numvec grid = opts.x_grid;
    if (grid.empty())
        for (prec_t m : {1.0, 10.0, 100.0, 1000.0}) {
            grid.push_back(m * opts.reward_bound);
            grid.push_back(-m * opts.reward_bound);
        }
    prec_t top = 0;
    for (prec_t x : grid) top = std::max(top, std::abs(x));
    for (prec_t m = top * 10; top > 0 && m <= opts.x_cap; m *= 10) {
        grid.push_back(m);
        grid.push_back(-m);
    }
    return grid;
}

} // namespace

std::optional<CounterexampleRecord> gamma_counterexample(const Mdp& mdp, prec_t gamma1,
                                                         prec_t gamma2, std::uint64_t seed,
                                                         const GammaSearchOptions& opts) {
    if (!in_unit_interval(gamma1) || !in_unit_interval(gamma2))
        throw std::invalid_argument("discounts must lie in (0, 1)");
    if (gamma1 == gamma2 && !opts.allow_equal_discounts)
        throw std::invalid_argument("gamma1 = gamma2 is not a misspecification");

    const Mdp m1 = mdp.with_discount(gamma1);
    const Mdp m2 = mdp.with_discount(gamma2);
    const RewardTable r1 = random_reward(m1, RewardDomain::SAS, opts.reward_bound, seed);
    const OptimalBundle base = optimal_values(m2, r1);
    const Controllability ctl = controllable_states(m2);

    for (prec_t x : gamma_grid(opts)) {
        for (std::size_t s : ctl.states) {
            numvec phi(mdp.n_states(), 0.0);
            phi[s] = x;
            const RewardTable r2 = apply(TransformSpec::ps(phi), r1, m1);
            const OptimalBundle shaped = optimal_values(m2, r2);
            const auto diff = base.opt_sets.first_difference(shaped.opt_sets);
            if (!diff) continue;

            CounterexampleRecord rec;
            rec.mdp = m2;
            rec.model_mdp = m1;
            rec.r1 = r1;
            rec.r2 = r2;
            rec.relation = Relation::OPT;
            rec.premise = Premise::BoltzmannMatch;
            rec.beta = 1;
            rec.state = diff;
            const prec_t p = mdp.initial()[s];
            rec.parameters = {{"X", x},
                              {"state", prec_t(s)},
                              {"p", p},
                              {"gamma1", gamma1},
                              {"gamma2", gamma2}};
            const StochasticPolicy pols[2] = {greedy_policy(base), greedy_policy(shaped)};
            for (int k = 0; k < 2; ++k) {
                const prec_t w = occupancy(m2, pols[k]).w[s];
                const prec_t delta =
                    policy_evaluate(m2, r2, pols[k]).j - policy_evaluate(m2, r1, pols[k]).j;
                const std::string tag = k == 0 ? "_pi1" : "_pi2";
                rec.parameters.emplace_back("n2" + tag, (w - p) / gamma2);
                rec.parameters.emplace_back("delta" + tag, delta);
            }
            if (verify_record(rec)) return rec;
        }
    }
    return std::nullopt;
}

// *************************************************************************************
// **** tau counterexample
// *************************************************************************************

namespace {

struct Direction {
    std::size_t s = 0;
    std::size_t a = 0;
    numvec delta;
    bool support = false;
};

std::vector<Direction> sr_directions(const Mdp& mdp1, const numvec& tau2) {
    const std::size_t ns = mdp1.n_states(), na = mdp1.n_actions();
    std::vector<Direction> out;
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            const prec_t* row1 = mdp1.row(s, a);
            const prec_t* row2 = tau2.data() + (s * na + a) * ns;
            prec_t diff = 0;
            for (std::size_t k = 0; k < ns; ++k) diff = std::max(diff, std::abs(row1[k] - row2[k]));
            if (diff <= 1e-12) continue;
            bool any = false;
            for (std::size_t k = 0; k < ns; ++k)
                if (row1[k] == 0.0 && row2[k] > 0.0) {
                    Direction d{s, a, numvec(ns, 0.0), true};
                    d.delta[k] = 1;
                    out.push_back(std::move(d));
                    any = true;
                }
            if (any) continue;
            const prec_t t11 = kernels::dot({row1, ns}, {row1, ns});
            const prec_t t12 = kernels::dot({row1, ns}, {row2, ns});
            Direction d{s, a, numvec(ns), false};
            for (std::size_t k = 0; k < ns; ++k) d.delta[k] = row2[k] - (t12 / t11) * row1[k];
            if (kernels::dot({row2, ns}, d.delta) > 1e-12) out.push_back(std::move(d));
        }
    return out;
}

} // namespace

bool sr_kernel_moves_tau2(const Mdp& mdp1, const numvec& tau2) {
    if (tau2.size() != mdp1.transition().size()) throw StructuralError("tau2 has the wrong shape");
    return !sr_directions(mdp1, tau2).empty();
}

std::optional<CounterexampleRecord> tau_counterexample(const Mdp& mdp1, const numvec& tau2,
                                                       std::uint64_t seed, prec_t reward_bound) {
    if (tau2.size() != mdp1.transition().size()) throw StructuralError("tau2 has the wrong shape");
    const Mdp m2 = mdp1.with_transition(tau2);
    const std::size_t ns = mdp1.n_states();
    const RewardTable r1 = random_reward(mdp1, RewardDomain::SAS, reward_bound, seed);
    const OptimalBundle base = optimal_values(m2, r1);
    const auto directions = sr_directions(mdp1, tau2);

    for (int k = 0; k <= 9; ++k) {
        const prec_t magnitude = std::pow(10.0, k) * reward_bound;
        for (const Direction& d : directions)
            for (prec_t sign : {1.0, -1.0}) {
                RewardTable r2 = r1;
                for (std::size_t sn = 0; sn < ns; ++sn)
                    r2.at(d.s, d.a, sn) += sign * magnitude * d.delta[sn];
                const OptimalBundle moved = optimal_values(m2, r2);
                const auto diff = base.opt_sets.first_difference(moved.opt_sets);
                if (!diff) continue;

                CounterexampleRecord rec;
                rec.mdp = m2;
                rec.model_mdp = mdp1;
                rec.r1 = r1;
                rec.r2 = std::move(r2);
                rec.relation = Relation::OPT;
                rec.premise = Premise::RewardVectorMatch;
                rec.state = diff;
                const prec_t shift =
                    sign * magnitude *
                    kernels::dot({tau2.data() + (d.s * mdp1.n_actions() + d.a) * ns, ns}, d.delta);
                rec.parameters = {{"state", prec_t(d.s)},
                                  {"action", prec_t(d.a)},
                                  {"magnitude", sign * magnitude},
                                  {"support_direction", d.support ? 1.0 : 0.0},
                                  {"tau2_shift", shift}};
                if (verify_record(rec)) return rec;
            }
    }
    return std::nullopt;
}

// *************************************************************************************
// **** Claim registry
// *************************************************************************************

const char* to_string(TrialStatus status) {
    switch (status) {
    case TrialStatus::Pass: return "pass";
    case TrialStatus::Fail: return "fail";
    case TrialStatus::Skip: return "skip";
    }
    return "unknown";
}

std::pair<RewardTable, RewardTable> ex_transfer_rewards() {
    RewardTable r1 = RewardTable::zeros(2, 2), r2 = RewardTable::zeros(2, 2);
    r1.at(0, 0, 0) = 1.0;
    r1.at(0, 0, 1) = 0.5;
    r2.at(0, 0, 0) = 0.5;
    r2.at(0, 0, 1) = 1.0;
    return {r1, r2};
}

namespace {

using Metrics = std::vector<std::pair<std::string, prec_t>>;

/// Stable 64-bit hash, so claim streams do not depend on std::hash.
std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seeds for one trial: stream(k) is independent for every k.
class TrialSeeds {
public:
    TrialSeeds(std::uint64_t root, const std::string& claim, const std::string& group, std::size_t index)
        : base_(substream_seed(substream_seed(substream_seed(root, fnv1a(claim)), fnv1a(group)), index)) {}
    std::uint64_t operator()(std::uint64_t k) const { return substream_seed(base_, k); }

private:
    std::uint64_t base_;
};

struct TrialResult {
    TrialStatus status = TrialStatus::Pass;
    std::string note;
    Metrics metrics;
    std::optional<CounterexampleRecord> record;
};

TrialResult pass(std::string note = {}, Metrics m = {}) {
    return {TrialStatus::Pass, std::move(note), std::move(m), std::nullopt};
}
TrialResult fail(std::string note, Metrics m = {}) {
    return {TrialStatus::Fail, std::move(note), std::move(m), std::nullopt};
}
TrialResult skip(std::string note) { return {TrialStatus::Skip, std::move(note), {}, std::nullopt}; }
TrialResult check(bool ok, std::string note, Metrics m = {}) {
    return {ok ? TrialStatus::Pass : TrialStatus::Fail, std::move(note), std::move(m), std::nullopt};
}

class Runner {
public:
    Runner(const ExperimentConfig& cfg, TrialReport& report) : cfg_(cfg), report_(report) {}

    const ExperimentConfig& cfg() const { return cfg_; }

    /// Runs `n` trials of a group. Exceptions become failures.
    void group(const std::string& name, std::size_t n,
               const std::function<TrialResult(const TrialSeeds&, std::size_t)>& body) {
        for (std::size_t i = 0; i < n; ++i) {
            TrialResult res;
            try {
                res = body(TrialSeeds(cfg_.seed, cfg_.claim_id, name, i), i);
            } catch (const std::exception& e) {
                res = fail(std::string("exception: ") + e.what());
            }
            record(name, i, std::move(res));
        }
    }

    /// Existential search: passes on the first attempt that yields a verified record.
    void probe(const std::string& name,
               const std::function<std::optional<CounterexampleRecord>(const TrialSeeds&)>& attempt) {
        std::size_t tries = 0;
        std::optional<CounterexampleRecord> found;
        std::string last_error;
        while (!found && tries < cfg_.negative_budget) {
            try {
                found = attempt(TrialSeeds(cfg_.seed, cfg_.claim_id, name, tries));
                if (found) {
                    std::string why;
                    if (!verify_record(*found, &why)) {
                        last_error = "record failed replay: " + why;
                        found.reset();
                    }
                }
            } catch (const std::exception& e) {
                last_error = e.what();
            }
            ++tries;
        }
        TrialResult res = found ? pass("verified counterexample", {{"attempts", prec_t(tries)}})
                                : fail("no counterexample within budget" +
                                           (last_error.empty() ? "" : " (last error: " + last_error + ")"),
                                       {{"attempts", prec_t(tries)}});
        res.record = std::move(found);
        record(name, 0, std::move(res));
    }

private:
    void record(const std::string& group, std::size_t index, TrialResult res) {
        TrialOutcome o;
        o.group = group;
        o.index = index;
        o.status = res.status;
        o.note = std::move(res.note);
        o.metrics = std::move(res.metrics);
        switch (o.status) {
        case TrialStatus::Pass: ++report_.passed; break;
        case TrialStatus::Fail: ++report_.failed; break;
        case TrialStatus::Skip: ++report_.skipped; break;
        }
        ++report_.trials;
        if (res.record) {
            ++report_.counterexamples;
            if (!report_.counterexample) report_.counterexample = std::move(res.record);
        }
        report_.outcomes.push_back(std::move(o));
    }

    const ExperimentConfig& cfg_;
    TrialReport& report_;
};

std::size_t trials_or(const ExperimentConfig& cfg, std::size_t fallback) {
    return cfg.trials ? cfg.trials : fallback;
}

prec_t pick(const std::optional<prec_t>& fixed, Rng& rng, prec_t lo, prec_t hi) {
    return fixed ? *fixed : rng.log_uniform(lo, hi);
}

bool distinct(prec_t x, prec_t y) { return std::abs(x - y) > 1e-12 * std::max(std::abs(x), std::abs(y)); }

Mdp trial_mdp(const ExperimentConfig& cfg, std::uint64_t seed) { return random_mdp(seed, cfg.generator); }

RewardTable trial_reward(const ExperimentConfig& cfg, const Mdp& mdp, std::uint64_t seed,
                         RewardDomain domain = RewardDomain::SAS) {
    return random_reward(mdp, domain, cfg.reward_bound, seed);
}

EquivOptions equiv_options(const ExperimentConfig& cfg) {
    EquivOptions o;
    o.solver = cfg.solver;
    o.cap = cfg.cap;
    return o;
}

/// Per-deterministic-policy V vectors; a policy is optimal iff V^pi >= V* - tol everywhere.
std::vector<bool> optimal_deterministic_policies(const Mdp& mdp, const RewardTable& r, std::uint64_t cap) {
    const auto policies = enumerate_deterministic_policies(mdp, cap);
    std::vector<numvec> values;
    values.reserve(policies.size());
    numvec best(mdp.n_states(), -std::numeric_limits<prec_t>::infinity());
    for (const auto& pi : policies) {
        values.push_back(policy_evaluate(mdp, r, pi).v);
        for (std::size_t s = 0; s < best.size(); ++s) best[s] = std::max(best[s], values.back()[s]);
    }
    const prec_t tol = 1e-8 * std::max<prec_t>(1, r.max_abs()) / (1 - mdp.discount());
    std::vector<bool> out(policies.size(), true);
    for (std::size_t i = 0; i < policies.size(); ++i)
        for (std::size_t s = 0; s < best.size(); ++s)
            if (values[i][s] < best[s] - tol) out[i] = false;
    return out;
}

// **** individual claims

void claim_ord_char(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 200);
    run.group("positive", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r1 = trial_reward(cfg, mdp, seed(1));
        Rng rng(seed(2));
        const prec_t c = rng.log_uniform(0.1, 10);
        const TransformSpec ps = sample_potential_shaping(mdp, 10 * cfg.reward_bound, false, seed(3));
        const RewardTable mid = apply(TransformSpec::seq({TransformSpec::ls(c), ps}), r1, mdp, cfg.solver);
        const RewardTable r2 = apply(sample_s_redistribution(mdp, mid, cfg.reward_bound, seed(4)), mid, mdp);

        const auto cert = decompose_ord(r1, r2, mdp);
        if (!cert) return fail("no certificate recovered", {{"c", c}});
        const OrderSignature s1 = order_signature(r1, mdp, cfg.cap);
        const OrderSignature s2 = order_signature(r2, mdp, cfg.cap);
        const bool c_ok = cert->degenerate || std::abs(cert->c - c) <= 1e-6 * c;
        const bool oracle = same_ranking(s1, s2) && signatures_order_equivalent(s1, s2);
        return check(cert->residual <= 1e-6 && c_ok && oracle,
                     !c_ok ? "recovered scale differs" : (!oracle ? "oracle rankings differ" : ""),
                     {{"c", c}, {"c_hat", cert->c}, {"residual", cert->residual}});
    });
    run.group("negative", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r1 = trial_reward(cfg, mdp, seed(1));
        const RewardTable r2 = trial_reward(cfg, mdp, seed(2));
        const bool verdict = decompose_ord(r1, r2, mdp).has_value();
        const bool oracle =
            signatures_order_equivalent(order_signature(r1, mdp, cfg.cap), order_signature(r2, mdp, cfg.cap));
        return check(verdict == oracle, verdict == oracle ? "" : "decider and oracle disagree",
                     {{"verdict", verdict ? 1.0 : 0.0}, {"oracle", oracle ? 1.0 : 0.0}});
    });
}

FVariantSpec random_fvariant(Rng& rng) {
    if (rng.bernoulli(0.5))
        return {MixtureVariant{rng.uniform(0.1, 0.9), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10)}};
    return {TemperedRankVariant{rng.log_uniform(0.1, 10), rng.uniform(0.5, 2)}};
}

void claim_boltz_opt(Runner& run) {
    const auto& cfg = run.cfg();
    run.group("positive", trials_or(cfg, 100), [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r2 = trial_reward(cfg, mdp, seed(1));
        Rng rng(seed(2));
        const FVariantSpec spec = random_fvariant(rng);
        const prec_t beta = pick(cfg.beta1, rng, 0.1, 10);
        const StochasticPolicy pi = fvariant_policy(mdp, r2, spec, cfg.solver);
        const RewardTable r1 = invert_boltzmann(pi, beta, mdp);
        const EquivVerdict v = opt_equivalent(r1, r2, mdp, equiv_options(cfg));
        return check(v.equivalent, v.equivalent ? spec.name() : "OPT violated for " + spec.name(),
                     {{"beta", beta}});
    });
    run.probe("probe", [&](const TrialSeeds& seed) -> std::optional<CounterexampleRecord> {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r2 = trial_reward(cfg, mdp, seed(1));
        Rng rng(seed(2));
        const prec_t beta = pick(cfg.beta1, rng, 0.1, 10);
        // g = softmax(-beta Q*): full support, argmax inverted.
        const OptimalBundle b = optimal_values(mdp, r2, cfg.solver);
        const std::size_t na = mdp.n_actions();
        numvec probs(b.a_star.size());
        for (std::size_t s = 0; s < mdp.n_states(); ++s) {
            numvec neg(b.a_star.begin() + s * na, b.a_star.begin() + (s + 1) * na);
            for (auto& x : neg) x = -x;
            kernels::softmax(neg, 1.0 / beta, {probs.data() + s * na, na});
        }
        StochasticPolicy pi(mdp.n_states(), na, std::move(probs));
        const RewardTable r1 = invert_boltzmann(pi, beta, mdp);
        if (opt_equivalent(r1, r2, mdp, equiv_options(cfg)).equivalent) return std::nullopt;
        CounterexampleRecord rec;
        rec.mdp = mdp;
        rec.r1 = r1;
        rec.r2 = r2;
        rec.relation = Relation::OPT;
        rec.premise = Premise::ObservedBoltzmann;
        rec.beta = beta;
        rec.observed_policy = std::move(pi);
        rec.state = opt_equivalent(r1, r2, mdp).witness->state;
        rec.parameters = {{"beta", beta}};
        return rec;
    });
}

void claim_bm_ord(Runner& run) {
    const auto& cfg = run.cfg();
    run.group("positive", trials_or(cfg, 100), [&](const TrialSeeds& seed, std::size_t) {
        Rng rng(seed(2));
        const prec_t beta1 = pick(cfg.beta1, rng, 0.1, 10);
        const prec_t beta2 = pick(cfg.beta2, rng, 0.1, 10);
        if (!distinct(beta1, beta2)) return skip("not misspecified: beta1 = beta2");
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r2 = trial_reward(cfg, mdp, seed(1));
        const StochasticPolicy pi = boltzmann_policy(mdp, r2, beta2, cfg.solver);
        const RewardTable r1 = invert_boltzmann(pi, beta1, mdp);
        const EquivVerdict v = ord_equivalent(r1, r2, mdp, equiv_options(cfg));
        return check(v.equivalent, v.equivalent ? "" : "ORD violated",
                     {{"beta1", beta1}, {"beta2", beta2}, {"c", v.certificate ? v.certificate->c : 0.0}});
    });
}

void claim_mce_ord(Runner& run) {
    const auto& cfg = run.cfg();
    run.group("positive", trials_or(cfg, 100), [&](const TrialSeeds& seed, std::size_t) {
        Rng rng(seed(2));
        const prec_t alpha1 = pick(cfg.alpha1, rng, 0.1, 10);
        const prec_t alpha2 = pick(cfg.alpha2, rng, 0.1, 10);
        if (!distinct(alpha1, alpha2)) return skip("not misspecified: alpha1 = alpha2");
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r2 = trial_reward(cfg, mdp, seed(1));
        const SoftBundle soft2 = soft_optimal_values(mdp, r2, alpha2, cfg.solver);
        const StochasticPolicy pi = soft_policy(soft2);
        const RewardTable r1 = invert_mce(pi, alpha1);
        const SoftBundle soft1 = soft_optimal_values(mdp, r1, alpha1, cfg.solver);
        const prec_t round_trip = soft_policy(soft1).linf_distance(pi);
        const prec_t residual = std::max(soft1.residual, soft2.residual);
        const EquivVerdict v = ord_equivalent(r1, r2, mdp, equiv_options(cfg));
        const bool ok = v.equivalent && residual <= 1e-8 && round_trip <= 1e-8;
        return check(ok, ok ? "" : (!v.equivalent ? "ORD violated" : "soft fixed point not reached"),
                     {{"alpha1", alpha1}, {"alpha2", alpha2}, {"residual", residual}, {"round_trip", round_trip}});
    });
}

void claim_opt_model(Runner& run) {
    const auto& cfg = run.cfg();
    run.group("positive", trials_or(cfg, 200), [&](const TrialSeeds& seed, std::size_t i) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r1 = trial_reward(cfg, mdp, seed(1));
        const RewardTable r2 =
            i % 2 == 0 ? apply(sample_optimality_preserving(mdp, r1, cfg.reward_bound, seed(2), cfg.solver), r1,
                               mdp, cfg.solver)
                       : trial_reward(cfg, mdp, seed(3));
        const bool same_sets = optimal_set_policy(mdp, r1, cfg.solver) == optimal_set_policy(mdp, r2, cfg.solver);
        const bool verdict = opt_equivalent(r1, r2, mdp, equiv_options(cfg)).equivalent;
        const bool oracle = optimal_deterministic_policies(mdp, r1, cfg.cap) ==
                            optimal_deterministic_policies(mdp, r2, cfg.cap);
        const bool ok = same_sets == verdict && verdict == oracle && (i % 2 == 1 || verdict);
        return check(ok, ok ? "" : "admissibility biconditional broken",
                     {{"same_sets", same_sets ? 1.0 : 0.0}, {"oracle", oracle ? 1.0 : 0.0}});
    });
    // g swaps the outputs of two OPT classes; the optimality model then infers a
    // reward from the wrong class.
    run.probe("probe", [&](const TrialSeeds& seed) -> std::optional<CounterexampleRecord> {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable ra = trial_reward(cfg, mdp, seed(1));
        const RewardTable rb = trial_reward(cfg, mdp, seed(2));
        const ActionSetPolicy oa = optimal_set_policy(mdp, ra, cfg.solver);
        if (oa == optimal_set_policy(mdp, rb, cfg.solver)) return std::nullopt;
        CounterexampleRecord rec;
        rec.mdp = mdp;
        rec.r1 = ra;
        rec.r2 = rb;
        rec.relation = Relation::OPT;
        rec.premise = Premise::ObservedOptimalSets;
        rec.observed_sets = oa;
        rec.state = opt_equivalent(ra, rb, mdp).witness->state;
        return rec;
    });
}

std::vector<std::pair<prec_t, prec_t>> gamma_pairs(const ExperimentConfig& cfg) {
    if (cfg.gamma1 || cfg.gamma2) {
        const prec_t g1 = cfg.gamma1.value_or(0.5);
        return {{g1, cfg.gamma2.value_or(g1)}};
    }
    return {{0.5, 0.9}, {0.9, 0.95}};
}

void claim_lem_gamma(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 20);
    GammaSearchOptions search;
    search.reward_bound = cfg.reward_bound;
    search.allow_equal_discounts = true;
    for (const auto& [g1, g2] : gamma_pairs(cfg)) {
        const std::string tag = "(" + std::to_string(g1).substr(0, 6) + "," + std::to_string(g2).substr(0, 6) + ")";
        if (g1 != g2) {
            run.group("positive" + tag, n, [&](const TrialSeeds& seed, std::size_t) {
                const Mdp mdp = trial_mdp(cfg, seed(0));
                if (is_trivial_transition(mdp)) return skip("generated transition is trivial");
                TrialResult res;
                auto rec = gamma_counterexample(mdp, g1, g2, seed(1), search);
                if (!rec) return fail("no counterexample");
                res = pass("", {{"X", rec->parameter("X")}});
                res.record = std::move(rec);
                return res;
            });
            run.group("control-trivial" + tag, n, [&](const TrialSeeds& seed, std::size_t) {
                MdpGenOptions gen = cfg.generator;
                gen.trivial = true;
                const Mdp mdp = random_mdp(seed(0), gen);
                const auto rec = gamma_counterexample(mdp, g1, g2, seed(1), search);
                return check(!rec, rec ? "counterexample on a trivial transition function" : "");
            });
        }
        run.group("control-equal" + tag, n, [&](const TrialSeeds& seed, std::size_t) {
            const Mdp mdp = trial_mdp(cfg, seed(0));
            const auto rec = gamma_counterexample(mdp, g1, g1, seed(1), search);
            return check(!rec, rec ? "counterexample with equal discounts" : "");
        });
    }
}

void claim_lem_tau(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 20);
    run.group("positive", n, [&](const TrialSeeds& seed, std::size_t i) {
        MdpGenOptions gen = cfg.generator;
        if (i % 2 == 1) gen.sparsity = 0.5;
        const Mdp mdp1 = random_mdp(seed(0), gen);
        const Mdp other = random_mdp(mdp1.n_states(), mdp1.n_actions(), seed(1), cfg.generator);
        const bool predicted = sr_kernel_moves_tau2(mdp1, other.transition());
        auto rec = tau_counterexample(mdp1, other.transition(), seed(2), cfg.reward_bound);
        if (rec.has_value() != predicted)
            return fail(predicted ? "no counterexample although the kernel moves tau2"
                                  : "counterexample although no kernel direction moves tau2");
        TrialResult res = pass("", {{"predicted", predicted ? 1.0 : 0.0}});
        if (rec) res.metrics.emplace_back("magnitude", rec->parameter("magnitude"));
        res.record = std::move(rec);
        return res;
    });
    run.group("control", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp1 = trial_mdp(cfg, seed(0));
        const auto rec = tau_counterexample(mdp1, mdp1.transition(), seed(2), cfg.reward_bound);
        return check(!rec && !sr_kernel_moves_tau2(mdp1, mdp1.transition()),
                     rec ? "counterexample with tau2 = tau1" : "");
    });
}

void claim_mdp_misspec(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 20);
    const auto [g1, g2] = gamma_pairs(cfg).front();
    GammaSearchOptions search;
    search.reward_bound = cfg.reward_bound;
    search.allow_equal_discounts = true;
    run.group("positive", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const Mdp other = random_mdp(mdp.n_states(), mdp.n_actions(), seed(1), cfg.generator);
        auto by_tau = tau_counterexample(mdp, other.transition(), seed(2), cfg.reward_bound);
        auto by_gamma = g1 != g2 ? gamma_counterexample(mdp, g1, g2, seed(3), search) : std::nullopt;
        const bool ok = by_tau.has_value() && (g1 == g2 || by_gamma.has_value());
        TrialResult res = check(ok, ok ? "" : (by_tau ? "no discount counterexample" : "no transition counterexample"));
        if (by_gamma) res.record = std::move(by_gamma);
        else if (by_tau) res.record = std::move(by_tau);
        return res;
    });
    run.group("control", n, [&](const TrialSeeds& seed, std::size_t) {
        MdpGenOptions gen = cfg.generator;
        gen.trivial = true;
        const Mdp trivial = random_mdp(seed(0), gen);
        const bool gamma_none = !gamma_counterexample(trivial, g1, g2, seed(3), search);
        const Mdp mdp = trial_mdp(cfg, seed(1));
        const bool tau_none = !tau_counterexample(mdp, mdp.transition(), seed(2), cfg.reward_bound);
        return check(gamma_none && tau_none, gamma_none ? (tau_none ? "" : "counterexample with tau2 = tau1")
                                                        : "counterexample on a trivial transition function");
    });
}

void claim_occ_inj(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 500);
    run.group("occupancy", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r = trial_reward(cfg, mdp, seed(1));
        const StochasticPolicy pi = random_policy(mdp.n_states(), mdp.n_actions(), seed(2));
        const OccupancyVector d = occupancy(mdp, pi);
        const prec_t sum_err = std::abs(d.total() - 1.0 / (1.0 - mdp.discount()));
        const prec_t j_err = std::abs(d.dot(reward_vector(r, mdp)) - policy_evaluate(mdp, r, pi).j);
        return check(sum_err <= 1e-9 && j_err <= 1e-8, "", {{"sum_error", sum_err}, {"j_error", j_err}});
    });
    run.group("injectivity", std::max<std::size_t>(1, n / 5), [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const StochasticPolicy p = random_policy(mdp.n_states(), mdp.n_actions(), seed(1));
        const StochasticPolicy q = random_policy(mdp.n_states(), mdp.n_actions(), seed(2));
        if (p.linf_distance(q) == 0) return skip("identical policies drawn");
        const OccupancyVector dp = occupancy(mdp, p), dq = occupancy(mdp, q);
        prec_t gap = 0;
        for (std::size_t i = 0; i < dp.d.size(); ++i) gap = std::max(gap, std::abs(dp.d[i] - dq.d[i]));
        return check(gap > 1e-9, gap > 1e-9 ? "" : "distinct policies share an occupancy", {{"gap", gap}});
    });
    run.group("monte-carlo", std::max<std::size_t>(1, n / 25), [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r = trial_reward(cfg, mdp, seed(1));
        const StochasticPolicy pi = random_policy(mdp.n_states(), mdp.n_actions(), seed(2));
        const auto horizon = std::size_t(std::ceil(std::log(1e-8) / std::log(mdp.discount())));
        const MonteCarloEstimate est = mc_return(mdp, r, pi, horizon, 4000, seed(3));
        const prec_t exact = policy_evaluate(mdp, r, pi).j;
        const prec_t allowed = 3 * est.std_error + truncation_bound(mdp, r, horizon);
        const prec_t err = std::abs(est.mean - exact);
        return check(err <= allowed, err <= allowed ? "" : "Monte-Carlo estimate outside the band",
                     {{"error", err}, {"allowed", allowed}});
    });
}

void claim_j_amb(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 100);
    run.group("positive", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r1 = trial_reward(cfg, mdp, seed(1));
        const RewardTable mid =
            apply(sample_potential_shaping(mdp, 10 * cfg.reward_bound, true, seed(2)), r1, mdp);
        const RewardTable r2 = apply(sample_s_redistribution(mdp, mid, cfg.reward_bound, seed(3)), mid, mdp);
        const EquivVerdict v = j_equal(r1, r2, mdp, equiv_options(cfg));
        return check(v.equivalent, v.equivalent ? "" : "J changed by PS0 o SR");
    });
    run.group("negative", n, [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r1 = trial_reward(cfg, mdp, seed(1));
        if (is_j_constant(r1, mdp)) return skip("degenerate reward");
        Rng rng(seed(2));
        prec_t c = 1;
        while (std::abs(c - 1) < 0.05) c = rng.log_uniform(0.1, 10);
        const EquivVerdict v = j_equal(r1, apply(TransformSpec::ls(c), r1, mdp), mdp, equiv_options(cfg));
        return check(!v.equivalent, v.equivalent ? "scaled reward reported J-equal" : "", {{"c", c}});
    });
}

void claim_control(Runner& run) {
    const auto& cfg = run.cfg();
    const std::size_t n = trials_or(cfg, 50);
    for (const bool trivial : {false, true}) {
        run.group(trivial ? "control" : "positive", n, [&](const TrialSeeds& seed, std::size_t) {
            MdpGenOptions gen = cfg.generator;
            gen.trivial = trivial;
            const Mdp mdp = random_mdp(seed(0), gen);
            const Controllability ctl = controllable_states(mdp);
            const bool is_trivial = is_trivial_transition(mdp);
            return check(ctl.states.empty() == is_trivial,
                         ctl.states.empty() == is_trivial ? "" : "controllability disagrees with triviality",
                         {{"controllable", prec_t(ctl.states.size())}, {"trivial", is_trivial ? 1.0 : 0.0}});
        });
    }
}

void claim_ex_sa_shaping(Runner& run) {
    const auto& cfg = run.cfg();
    run.group("positive", trials_or(cfg, 50), [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = trial_mdp(cfg, seed(0));
        const RewardTable r = trial_reward(cfg, mdp, seed(1), RewardDomain::SA);
        Rng rng(seed(2));
        PotentialFn phi;
        for (std::size_t s = 0; s < mdp.n_states(); ++s) phi.phi.push_back(rng.uniform(-10, 10) * cfg.reward_bound);
        const RewardTable shaped = shaping_on_sa_domain(phi, r, mdp);
        const bool closed = shaped.domain() == RewardDomain::SA && shaped.check_domain();
        const EquivVerdict v = ord_equivalent(r, shaped, mdp, equiv_options(cfg));
        return check(closed && v.equivalent, !closed ? "shaped reward left the SA domain" : (v.equivalent ? "" : "ORD violated"));
    });
}

void claim_ex_transfer(Runner& run) {
    const auto& cfg = run.cfg();
    const auto [r1, r2] = ex_transfer_rewards();
    run.group("positive", trials_or(cfg, 10), [&](const TrialSeeds& seed, std::size_t) {
        const Mdp mdp = random_mdp(2, 2, seed(0), cfg.generator);
        const EquivVerdict v = ord_equivalent(r1, r2, mdp, equiv_options(cfg));
        const bool fit = fit_shaping_scaling(r1, r2, mdp.discount()).has_value();
        return check(v.equivalent && !fit,
                     !v.equivalent ? "ORD violated" : (fit ? "tau-free shaping/scaling fit unexpectedly succeeded" : ""),
                     {{"tau_s0a0_s0", mdp.tau(0, 0, 0)}, {"c", v.certificate ? v.certificate->c : 0.0}});
    });
}

using ClaimFn = void (*)(Runner&);

const std::vector<std::pair<std::string, ClaimFn>>& registry() {
    static const std::vector<std::pair<std::string, ClaimFn>> r = {
        {"ORD-CHAR", claim_ord_char},         {"BOLTZ-OPT", claim_boltz_opt},
        {"BM-ORD", claim_bm_ord},             {"OPT-MODEL", claim_opt_model},
        {"MCE-ORD", claim_mce_ord},           {"LEM-TAU", claim_lem_tau},
        {"LEM-GAMMA", claim_lem_gamma},       {"MDP-MISSPEC", claim_mdp_misspec},
        {"OCC-INJ", claim_occ_inj},           {"J-AMB", claim_j_amb},
        {"CONTROL", claim_control},           {"EX-SA-SHAPING", claim_ex_sa_shaping},
        {"EX-TRANSFER", claim_ex_transfer},
    };
    return r;
}

} // namespace

const std::vector<std::string>& claim_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& [id, fn] : registry()) out.push_back(id);
        return out;
    }();
    return ids;
}

bool is_registered(const std::string& claim_id) {
    const auto& ids = claim_ids();
    return std::find(ids.begin(), ids.end(), claim_id) != ids.end();
}

TrialReport verify_claim(const ExperimentConfig& config) {
    for (const auto& [id, fn] : registry()) {
        if (id != config.claim_id) continue;
        const auto start = std::chrono::steady_clock::now();
        TrialReport report;
        report.claim_id = id;
        report.seed = config.seed;
        Runner runner(config, report);
        fn(runner);
        report.wall_clock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return report;
    }
    throw std::invalid_argument("unknown claim: " + config.claim_id);
}

} // namespace irl
