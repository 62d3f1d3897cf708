#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/core.hpp"
#include "ksa/scenario.hpp"
#include "ksa/shm_engine.hpp"
#include "ksa/snapshot_ksa.hpp"
#include "ksa/sync_engine.hpp"
#include "ksa/trb.hpp"
#include "ksa/trb_ksa.hpp"
#include "ksa/two_round.hpp"

namespace ksa {

enum class OracleTarget { Trb, TwoRound, TrbOptimal, AsyncSnapshot };

inline std::string_view to_string(OracleTarget t) {
    switch (t) {
        case OracleTarget::Trb: return "trb";
        case OracleTarget::TwoRound: return "two_round";
        case OracleTarget::TrbOptimal: return "trb_optimal";
        case OracleTarget::AsyncSnapshot: return "async_snapshot";
    }
    return "?";
}

inline std::optional<OracleTarget> parse_oracle_target(std::string_view s) {
    for (auto t : {OracleTarget::Trb, OracleTarget::TwoRound, OracleTarget::TrbOptimal, OracleTarget::AsyncSnapshot})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

struct OracleSummary {
    OracleTarget target = OracleTarget::Trb;
    std::size_t n = 0, t = 0;
    std::size_t runs = 0;
    std::size_t violations = 0;
    /// Worst case over all runs: distinct correct decisions (deliveries for TRB).
    std::size_t max_distinct = 0;
    std::size_t max_distinct_domain = 0;
    std::map<std::string, std::size_t> failures_by_property;
    /// First few violating runs, described well enough to replay.
    std::vector<std::string> samples;
    /// Space exceeded the bound: nothing was run.
    bool refused = false;
    double estimate = 0;

    bool passed() const { return !refused && violations == 0; }
};

/// Restricts the enumerated spaces.
struct OracleOptions {
    /// Runs allowed before refusing.
    std::size_t bound = 2'000'000;
    /// Synchronous k-SA: fixed input vectors instead of every assignment over {0..k}.
    std::vector<std::vector<Value>> inputs;
    /// TRB: the values chains may carry; the correct sender broadcasts the first.
    std::vector<Value> trb_values{Value::domain(0), Value::domain(1)};
    /// TRB: extracted-set cap of correct processes; SIZE_MAX tracks every value.
    std::size_t extract_cap = 2;
    /// TRB: receivers enforce the chain length rule.
    bool length_rule = true;
    /// TRB: the adversary sends the shortest chains it can.
    bool minimal_chains = false;
};

namespace detail {

constexpr std::size_t max_samples = 5;

inline void record_failures(OracleSummary& s, std::span<const Verdict> verdicts, const std::string& context) {
    bool any = false;
    for (const auto& v : verdicts) {
        if (v.pass) continue;
        any = true;
        ++s.failures_by_property[v.property];
        if (s.samples.size() < max_samples) s.samples.push_back(context + ": " + v.property + " " + v.evidence);
    }
    if (any) ++s.violations;
}

inline std::string values_text(std::span<const Value> vs) { return join({vs.begin(), vs.end()}); }

inline std::vector<std::vector<Value>> all_assignments(std::size_t n, std::size_t domain) {
    std::vector<std::vector<Value>> out;
    std::vector<std::size_t> digits(n, 0);
    while (true) {
        std::vector<Value> vs;
        for (auto d : digits) vs.push_back(Value::domain(static_cast<std::int64_t>(d)));
        out.push_back(std::move(vs));
        std::size_t i = 0;
        while (i < n && ++digits[i] == domain) digits[i++] = 0;
        if (i == n) break;
    }
    return out;
}

inline std::vector<std::vector<ProcessId>> subsets_up_to(std::size_t n, std::size_t t) {
    std::vector<std::vector<ProcessId>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<ProcessId> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) s.push_back(ProcessId{i});
        if (s.size() <= t) out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

}  // namespace detail

/// Faulty sets explored by the TRB oracle: the sender with t - 1 others, and the
/// last t processes with a correct sender.
inline std::vector<std::vector<ProcessId>> trb_oracle_faulty_sets(std::size_t n, std::size_t t) {
    std::vector<ProcessId> with_sender, without_sender;
    for (std::size_t i = 0; i < t; ++i) with_sender.push_back(ProcessId{i});
    for (std::size_t i = n - t; i < n; ++i) without_sender.push_back(ProcessId{i});
    return {with_sender, without_sender};
}

/// Number of template-adversary runs for one faulty set.
inline double trb_oracle_space(std::size_t n, std::size_t t, std::size_t faulty, bool sender_faulty,
                               std::size_t values) {
    const double radix = sender_faulty ? double(values) + 1 : 2.0;
    return std::pow(radix, double((t + 1) * faulty * (n - faulty)));
}

/// Exhaustive TRB check: for each faulty set every member picks, per round and per
/// correct recipient, silence or a chain for one of the values. With a correct
/// sender only chains for its own value can exist, so the other choices are skipped.
inline OracleSummary oracle_trb(std::size_t n, std::size_t t, const OracleOptions& options = {}) {
    OracleSummary s;
    s.target = OracleTarget::Trb;
    s.n = n;
    s.t = t;
    if (t == 0 || t >= n || n > 4) {
        s.refused = true;
        return s;
    }
    const auto faulty_sets = trb_oracle_faulty_sets(n, t);
    for (const auto& f : faulty_sets)
        s.estimate += trb_oracle_space(n, t, f.size(), f.front().index == 0, options.trb_values.size());
    if (s.estimate > double(options.bound)) {
        s.refused = true;
        return s;
    }

    const SystemConfig cfg{n, t, Protocol::TrbOptimal};
    const ProcessId sender{0};
    const TrbBroadcast protocol{sender, options.extract_cap, options.length_rule};
    const SyncOptions sync{0, false, 0};
    for (const auto& faulty : faulty_sets) {
        const bool sender_faulty = faulty.front() == sender;
        const std::size_t radix = sender_faulty ? options.trb_values.size() + 1 : 2;
        const std::size_t digits = (t + 1) * faulty.size() * (n - faulty.size());
        std::vector<Value> inputs(n, options.trb_values.front());
        std::vector<std::uint8_t> choice(digits, 0);
        while (true) {
            TrbTemplateAdversary adv(faulty, sender, options.trb_values, choice, options.minimal_chains);
            const auto rec = run_sync(protocol, adv, cfg, inputs, sync);
            ++s.runs;
            const auto verdicts = check_trb(rec, sender);
            std::set<Value> delivered;
            for (std::size_t i = 0; i < n; ++i)
                if (!rec.faulty[i] && rec.trb.front().delivered[i]) delivered.insert(*rec.trb.front().delivered[i]);
            s.max_distinct = std::max(s.max_distinct, delivered.size());
            s.max_distinct_domain = std::max(
                s.max_distinct_domain,
                static_cast<std::size_t>(std::count_if(delivered.begin(), delivered.end(), [](const Value& v) {
                    return v.is_domain();
                })));
            std::string ctx;
            if (std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; })) {
                ctx = "faulty";
                for (auto p : faulty) ctx += " p" + std::to_string(p.index);
                ctx += " choices ";
                for (auto c : choice) ctx += std::to_string(c);
            }
            detail::record_failures(s, verdicts, ctx);

            std::size_t i = 0;
            while (i < digits && ++choice[i] == radix) choice[i++] = 0;
            if (i == digits) break;
        }
    }
    return s;
}

/// Behaviours one Byzantine process may take in the synchronous k-SA oracle:
/// correct, crash in round r after reaching a prefix of recipients (round 1 with an
/// empty prefix is silence), or equivocation between two input values.
inline std::vector<AdversarySpec> sync_oracle_behaviours(ProcessId p, std::size_t n, std::size_t rounds,
                                                         std::size_t domain) {
    std::vector<AdversarySpec> out;
    AdversarySpec correct;
    correct.strategy = "crash";
    correct.ids = {p};
    correct.round = rounds + 1;
    out.push_back(correct);
    for (std::size_t r = 1; r <= rounds; ++r)
        for (std::size_t prefix = 0; prefix < n; ++prefix) {
            AdversarySpec c;
            c.strategy = "crash";
            c.ids = {p};
            c.round = r;
            c.prefix = prefix;
            out.push_back(c);
        }
    for (std::size_t a = 0; a < domain; ++a)
        for (std::size_t b = 0; b < domain; ++b) {
            if (a == b) continue;
            AdversarySpec e;
            e.strategy = "equivocator";
            e.ids = {p};
            e.values = {Value::domain(static_cast<std::int64_t>(a)), Value::domain(static_cast<std::int64_t>(b))};
            out.push_back(e);
        }
    return out;
}

/// Exhaustive synchronous k-SA check over inputs, faulty sets of size <= t and
/// per-process behaviours.
inline OracleSummary oracle_sync_ksa(Protocol protocol, std::size_t n, std::size_t t,
                                     const OracleOptions& options = {}) {
    const OracleTarget target = protocol == Protocol::TwoRound ? OracleTarget::TwoRound : OracleTarget::TrbOptimal;
    OracleSummary s;
    s.target = target;
    s.n = n;
    s.t = t;
    const SystemConfig cfg{n, t, protocol};
    if (protocol == Protocol::AsyncSnapshot || validate_config(cfg) || n > 4) {
        s.refused = true;
        return s;
    }
    const std::size_t k = compute_k_bound(cfg);
    const std::size_t rounds = protocol == Protocol::TwoRound ? 2 : t + 1;
    const std::size_t domain = k + 1;
    const auto inputs = options.inputs.empty() ? detail::all_assignments(n, domain) : options.inputs;
    const auto sets = detail::subsets_up_to(n, t);
    const double per_process = double(sync_oracle_behaviours(ProcessId{0}, n, rounds, domain).size());
    double per_input = 0;
    for (const auto& f : sets) per_input += std::pow(per_process, double(f.size()));
    s.estimate = per_input * double(inputs.size());
    if (s.estimate > double(options.bound)) {
        s.refused = true;
        return s;
    }

    for (const auto& values : inputs) {
        for (const auto& faulty : sets) {
            std::vector<std::vector<AdversarySpec>> choices;
            for (auto p : faulty) choices.push_back(sync_oracle_behaviours(p, n, rounds, domain));
            std::vector<std::size_t> idx(faulty.size(), 0);
            while (true) {
                Scenario sc;
                sc.cfg = cfg;
                sc.initial_values = values;
                if (!faulty.empty()) {
                    sc.adversary.strategy = "composite";
                    for (std::size_t i = 0; i < faulty.size(); ++i) sc.adversary.parts.push_back(choices[i][idx[i]]);
                }
                const auto outcome = execute(sc, {false});
                ++s.runs;
                const auto& rec = outcome.base();
                s.max_distinct = std::max(s.max_distinct, decided_values(rec).size());
                s.max_distinct_domain =
                    std::max(s.max_distinct_domain, decided_values(rec, DecisionCount::DomainOnly).size());
                std::string ctx;
                if (!outcome.passed()) ctx = to_json(sc).dump();
                detail::record_failures(s, outcome.verdicts, ctx);

                std::size_t i = 0;
                while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
                if (i == idx.size()) break;
            }
        }
    }
    return s;
}

/// Exhaustive asynchronous check: every input over {0..k}, every interleaving and
/// every placement of up to t crashes.
inline OracleSummary oracle_async(std::size_t n, std::size_t t, const OracleOptions& options = {}) {
    OracleSummary s;
    s.target = OracleTarget::AsyncSnapshot;
    s.n = n;
    s.t = t;
    const SystemConfig cfg{n, t, Protocol::AsyncSnapshot};
    if (validate_config(cfg) || n > 4) {
        s.refused = true;
        return s;
    }
    const std::size_t k = compute_k_bound(cfg);
    const auto inputs = options.inputs.empty() ? detail::all_assignments(n, k + 1) : options.inputs;
    std::size_t remaining = options.bound;
    for (const auto& values : inputs) {
        const auto explored = explore_async(SnapshotKsa{}, cfg, values, t, remaining, [&](const AsyncRunRecord& rec) {
            const auto verdicts = async_verdicts(rec);
            s.max_distinct = std::max(s.max_distinct, decided_values(rec).size());
            s.max_distinct_domain = std::max(s.max_distinct_domain, decided_values(rec, DecisionCount::DomainOnly).size());
            std::string ctx;
            if (std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; })) {
                ctx = "values " + detail::values_text(values) + " trace";
                for (auto p : rec.trace) ctx += " " + std::to_string(p.index);
            }
            detail::record_failures(s, verdicts, ctx);
        });
        s.runs += explored.runs;
        remaining -= explored.runs;
        if (explored.truncated) {
            s.refused = true;
            s.estimate = double(s.runs) * double(inputs.size());
            return s;
        }
    }
    s.estimate = double(s.runs);
    return s;
}

/// Dispatches to the oracle for `target`.
inline OracleSummary oracle_enumerate(OracleTarget target, std::size_t n, std::size_t t,
                                      const OracleOptions& options = {}) {
    switch (target) {
        case OracleTarget::Trb: return oracle_trb(n, t, options);
        case OracleTarget::TwoRound: return oracle_sync_ksa(Protocol::TwoRound, n, t, options);
        case OracleTarget::TrbOptimal: return oracle_sync_ksa(Protocol::TrbOptimal, n, t, options);
        case OracleTarget::AsyncSnapshot: return oracle_async(n, t, options);
    }
    return {};
}

}  // namespace ksa
