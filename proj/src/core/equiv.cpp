#include "irlkit/equiv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irl {

const char* to_string(Relation relation) {
    switch (relation) {
    case Relation::OPT: return "opt";
    case Relation::ORD: return "ord";
    case Relation::JEQ: return "jeq";
    }
    return "unknown";
}

Relation parse_relation(const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "opt") return Relation::OPT;
    if (t == "ord") return Relation::ORD;
    if (t == "jeq" || t == "j") return Relation::JEQ;
    throw std::invalid_argument("unknown relation: " + text);
}

// *************************************************************************************
// **** Order signatures
// *************************************************************************************

namespace {

prec_t range_of(const numvec& x) {
    if (x.empty()) return 0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

prec_t scale_of(const numvec& x) {
    prec_t m = 1;
    for (prec_t v : x) m = std::max(m, std::abs(v));
    return m;
}

// Numerical noise floor for a J vector: exact solves give ~1e-13 relative error.
prec_t flat_tolerance(const numvec& x) { return 1e-9 * scale_of(x); }

struct AffineFit {
    prec_t slope = 0;
    prec_t intercept = 0;
    prec_t max_residual = 0;
};

AffineFit fit_affine(const numvec& a, const numvec& b) {
    const prec_t n = prec_t(a.size());
    const prec_t ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const prec_t mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    prec_t saa = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    AffineFit fit;
    fit.slope = saa > 0 ? sab / saa : 0;
    fit.intercept = mb - fit.slope * ma;
    for (std::size_t i = 0; i < a.size(); ++i)
        fit.max_residual =
            std::max(fit.max_residual, std::abs(b[i] - fit.slope * a[i] - fit.intercept));
    return fit;
}

} // namespace

OrderSignature order_signature(const RewardTable& r, const Mdp& mdp, std::uint64_t cap) {
    check_compatible(mdp, r);
    const auto policies = enumerate_deterministic_policies(mdp, cap);
    OrderSignature sig;
    sig.j.reserve(policies.size());
    for (const auto& pi : policies) sig.j.push_back(policy_evaluate(mdp, r, pi).j);

    indvec order(sig.j.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sig.j[x] > sig.j[y]; });
    sig.rank.assign(sig.j.size(), 0);
    std::size_t group = 0;
    prec_t anchor = order.empty() ? 0 : sig.j[order.front()];
    for (std::size_t i : order) {
        if (anchor - sig.j[i] > signature_tie_tolerance) {
            ++group;
            anchor = sig.j[i];
        }
        sig.rank[i] = group;
    }
    sig.n_groups = order.empty() ? 0 : group + 1;
    return sig;
}

bool signatures_order_equivalent(const OrderSignature& a, const OrderSignature& b) {
    if (a.j.size() != b.j.size()) throw std::invalid_argument("signature sizes differ");
    const bool flat_a = range_of(a.j) <= flat_tolerance(a.j);
    const bool flat_b = range_of(b.j) <= flat_tolerance(b.j);
    if (flat_a || flat_b) return flat_a && flat_b;
    const AffineFit fit = fit_affine(a.j, b.j);
    return fit.slope > 0 && fit.max_residual <= 1e-7 * std::max(range_of(b.j), flat_tolerance(b.j));
}

bool signatures_j_equal(const OrderSignature& a, const OrderSignature& b) {
    if (a.j.size() != b.j.size()) throw std::invalid_argument("signature sizes differ");
    const prec_t tol = 1e-8 * std::max(scale_of(a.j), scale_of(b.j));
    for (std::size_t i = 0; i < a.j.size(); ++i)
        if (std::abs(a.j[i] - b.j[i]) > tol) return false;
    return true;
}

bool same_ranking(const OrderSignature& a, const OrderSignature& b) {
    return a.n_groups == b.n_groups && a.rank == b.rank;
}

StochasticPolicy policy_from_occupancy(const OccupancyVector& d) {
    const std::size_t ns = d.n_states, na = d.n_actions;
    numvec probs(ns * na, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
        prec_t mass = 0;
        for (std::size_t a = 0; a < na; ++a) mass += d(s, a);
        for (std::size_t a = 0; a < na; ++a)
            probs[s * na + a] = mass > 0 ? d(s, a) / mass : 1.0 / prec_t(na);
    }
    return StochasticPolicy(ns, na, std::move(probs));
}

// *************************************************************************************
// **** Witness search
// *************************************************************************************

namespace {

Witness pair_witness(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2,
                     StochasticPolicy p, StochasticPolicy q, std::string note) {
    Witness w;
    w.j1 = {policy_evaluate(mdp, r1, p).j, policy_evaluate(mdp, r1, q).j};
    w.j2 = {policy_evaluate(mdp, r2, p).j, policy_evaluate(mdp, r2, q).j};
    w.policies = {std::move(p), std::move(q)};
    w.note = std::move(note);
    return w;
}

int sign_with(prec_t x, prec_t tol) { return x > tol ? 1 : (x < -tol ? -1 : 0); }

/**
 * Two policies that r1 and r2 order differently, given signatures that are not
 * positively affinely related. Checks deterministic pairs first; if the strict
 * orders agree there, mixes the worst and best r1-policies to match the r1
 * value of an intermediate policy whose r2 value falls off the chord.
 */
std::optional<Witness> ord_witness(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2,
                                   const OrderSignature& s1, const OrderSignature& s2) {
    const std::size_t n = s1.j.size();
    const prec_t t1 = 1e-7 * std::max(range_of(s1.j), flat_tolerance(s1.j));
    const prec_t t2 = 1e-7 * std::max(range_of(s2.j), flat_tolerance(s2.j));
    const auto det = [&](std::size_t i) {
        return StochasticPolicy::deterministic(
            mdp.n_actions(), deterministic_policy_actions(i, mdp.n_states(), mdp.n_actions()));
    };

    // Largest disagreement among deterministic pairs, measured against r1's pick.
    std::size_t best_i = 0, best_k = 0;
    prec_t best = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            const int o1 = sign_with(s1.j[i] - s1.j[k], t1);
            const int o2 = sign_with(s2.j[i] - s2.j[k], t2);
            if (o1 == o2) continue;
            const prec_t size = std::abs(s1.j[i] - s1.j[k]) / std::max(t1, 1e-300) +
                                std::abs(s2.j[i] - s2.j[k]) / std::max(t2, 1e-300);
            if (size > best) {
                best = size;
                best_i = i;
                best_k = k;
            }
        }
    if (best > 0)
        return pair_witness(mdp, r1, r2, det(best_i), det(best_k),
                            "deterministic policies ordered differently");

    const auto lo = std::size_t(std::min_element(s1.j.begin(), s1.j.end()) - s1.j.begin());
    const auto hi = std::size_t(std::max_element(s1.j.begin(), s1.j.end()) - s1.j.begin());
    const prec_t span = s1.j[hi] - s1.j[lo];
    if (span <= 0) return std::nullopt;
    std::size_t mid = n;
    prec_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const prec_t lambda = (s1.j[i] - s1.j[lo]) / span;
        const prec_t chord = (1 - lambda) * s2.j[lo] + lambda * s2.j[hi];
        if (std::abs(chord - s2.j[i]) > off) {
            off = std::abs(chord - s2.j[i]);
            mid = i;
        }
    }
    if (mid == n || off <= t2) return std::nullopt;
    const prec_t lambda = (s1.j[mid] - s1.j[lo]) / span;
    const OccupancyVector dl = occupancy(mdp, det(lo));
    const OccupancyVector dh = occupancy(mdp, det(hi));
    OccupancyVector mix = dl;
    for (std::size_t i = 0; i < mix.d.size(); ++i) mix.d[i] = (1 - lambda) * dl.d[i] + lambda * dh.d[i];
    for (std::size_t i = 0; i < mix.w.size(); ++i) mix.w[i] = (1 - lambda) * dl.w[i] + lambda * dh.w[i];
    return pair_witness(mdp, r1, r2, policy_from_occupancy(mix), det(mid),
                        "mixture policy tied under r1, separated under r2");
}

bool within_cap(const Mdp& mdp, const EquivOptions& opts) {
    return opts.cross_check &&
           deterministic_policy_count(mdp.n_states(), mdp.n_actions()) <= opts.cap;
}

} // namespace

// *************************************************************************************
// **** Deciders
// *************************************************************************************

EquivVerdict opt_equivalent(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                            const EquivOptions& opts) {
    check_compatible(mdp, r1);
    check_compatible(mdp, r2);
    const OptimalBundle b1 = optimal_values(mdp, r1, opts.solver);
    const OptimalBundle b2 = optimal_values(mdp, r2, opts.solver);
    EquivVerdict verdict;
    verdict.relation = Relation::OPT;
    const auto diff = b1.opt_sets.first_difference(b2.opt_sets);
    verdict.equivalent = !diff.has_value();
    if (diff) {
        Witness w;
        w.state = diff;
        w.note = "optimal action sets differ";
        verdict.witness = std::move(w);
    }
    return verdict;
}

EquivVerdict ord_equivalent(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                            const EquivOptions& opts) {
    check_compatible(mdp, r1);
    check_compatible(mdp, r2);
    EquivVerdict verdict;
    verdict.relation = Relation::ORD;
    verdict.certificate = decompose_ord(r1, r2, mdp);
    verdict.equivalent = verdict.certificate.has_value();

    if (within_cap(mdp, opts)) {
        const OrderSignature s1 = order_signature(r1, mdp, opts.cap);
        const OrderSignature s2 = order_signature(r2, mdp, opts.cap);
        verdict.cross_checked = true;
        if (signatures_order_equivalent(s1, s2) != verdict.equivalent)
            throw ConsistencyError("ORD certificate and order signatures disagree");
        if (!verdict.equivalent) verdict.witness = ord_witness(mdp, r1, r2, s1, s2);
    } else if (!verdict.equivalent) {
        // Too many policies to enumerate: the optimal policies are a cheap probe.
        const OptimalBundle b1 = optimal_values(mdp, r1, opts.solver);
        const OptimalBundle b2 = optimal_values(mdp, r2, opts.solver);
        const StochasticPolicy p = greedy_policy(b1), q = greedy_policy(b2);
        const prec_t t1 = 1e-7 * std::max<prec_t>(1, r1.max_abs());
        const prec_t t2 = 1e-7 * std::max<prec_t>(1, r2.max_abs());
        Witness w = pair_witness(mdp, r1, r2, p, q, "optimal policies ordered differently");
        if (sign_with(w.j1[0] - w.j1[1], t1) != sign_with(w.j2[0] - w.j2[1], t2))
            verdict.witness = std::move(w);
    }
    return verdict;
}

EquivVerdict j_equal(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                     const EquivOptions& opts) {
    check_compatible(mdp, r1);
    check_compatible(mdp, r2);
    EquivVerdict verdict;
    verdict.relation = Relation::JEQ;
    verdict.certificate = decompose_j(r1, r2, mdp);
    verdict.equivalent = verdict.certificate.has_value();

    if (within_cap(mdp, opts)) {
        const OrderSignature s1 = order_signature(r1, mdp, opts.cap);
        const OrderSignature s2 = order_signature(r2, mdp, opts.cap);
        verdict.cross_checked = true;
        if (signatures_j_equal(s1, s2) != verdict.equivalent)
            throw ConsistencyError("J certificate and policy evaluations disagree");
        if (!verdict.equivalent) {
            std::size_t worst = 0;
            for (std::size_t i = 1; i < s1.j.size(); ++i)
                if (std::abs(s1.j[i] - s2.j[i]) > std::abs(s1.j[worst] - s2.j[worst])) worst = i;
            Witness w;
            w.policies = {StochasticPolicy::deterministic(
                mdp.n_actions(), deterministic_policy_actions(worst, mdp.n_states(), mdp.n_actions()))};
            w.j1 = {s1.j[worst]};
            w.j2 = {s2.j[worst]};
            w.note = "policy with different J";
            verdict.witness = std::move(w);
        }
    }
    return verdict;
}

EquivVerdict decide(Relation relation, const RewardTable& r1, const RewardTable& r2,
                    const Mdp& mdp, const EquivOptions& opts) {
    switch (relation) {
    case Relation::OPT: return opt_equivalent(r1, r2, mdp, opts);
    case Relation::ORD: return ord_equivalent(r1, r2, mdp, opts);
    case Relation::JEQ: return j_equal(r1, r2, mdp, opts);
    }
    throw std::invalid_argument("unknown relation");
}

} // namespace irl
