#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/core.hpp"
#include "ksa/shm_engine.hpp"
#include "ksa/snapshot_ksa.hpp"
#include "ksa/sync_engine.hpp"
#include "ksa/trb_ksa.hpp"
#include "ksa/two_round.hpp"

namespace ksa {

/// Declarative description of a registered adversary strategy.
struct AdversarySpec {
    std::string strategy = "none";  // none | silent | crash | equivocator | column_liar | random | composite
    std::vector<ProcessId> ids;
    std::size_t round = 1;
    std::size_t prefix = 0;
    std::vector<Value> values;  // equivocator: {a, b}; column_liar: fabricated vector
    std::vector<ProcessId> accomplices;
    std::optional<std::uint64_t> seed;
    std::vector<AdversarySpec> parts;

    friend bool operator==(const AdversarySpec&, const AdversarySpec&) = default;
};

struct Expectation {
    std::optional<std::size_t> distinct;
    std::optional<std::size_t> max_distinct;
    std::optional<std::size_t> rounds;

    friend bool operator==(const Expectation&, const Expectation&) = default;
};

struct Scenario {
    std::string name;
    SystemConfig cfg;
    std::vector<Value> initial_values;
    std::uint64_t seed = 0;
    AdversarySpec adversary;                              // synchronous protocols
    std::vector<CrashPoint> crash_plan;                   // asynchronous protocol
    std::optional<std::vector<ProcessId>> explicit_schedule;  // asynchronous; seeded by `seed` otherwise
    Expectation expect;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the strategy a spec describes. `fallback_seed` seeds random strategies
/// that carry no seed of their own.
inline std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec, std::uint64_t fallback_seed) {
    const auto& s = spec.strategy;
    if (s == "none") return std::make_unique<NoAdversary>();
    if (s == "silent") return std::make_unique<SilentAdversary>(spec.ids);
    if (s == "crash") return std::make_unique<CrashAdversary>(spec.ids, spec.round, spec.prefix);
    if (s == "equivocator") {
        if (spec.ids.size() != 1 || spec.values.size() != 2)
            throw ScenarioError("equivocator needs exactly one id and two values");
        return std::make_unique<EquivocatorAdversary>(spec.ids.front(), spec.values[0], spec.values[1]);
    }
    if (s == "column_liar") {
        if (spec.ids.size() != 1) throw ScenarioError("column_liar needs exactly one id");
        return std::make_unique<ColumnLiarAdversary>(spec.ids.front(), spec.values, spec.accomplices);
    }
    if (s == "random") return std::make_unique<RandomByzantine>(spec.ids, spec.seed.value_or(fallback_seed));
    if (s == "composite") {
        std::vector<std::unique_ptr<Adversary>> parts;
        for (const auto& p : spec.parts) parts.push_back(make_adversary(p, fallback_seed));
        return std::make_unique<CompositeAdversary>(std::move(parts));
    }
    throw ScenarioError("unknown adversary strategy '" + s + "'");
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using json = nlohmann::ordered_json;

inline json value_json(const Value& v) {
    if (v.is_domain()) return v.token();
    return to_string(v);
}

inline Value value_from(const json& j, const std::string& field) {
    if (j.is_number_integer()) return Value::domain(j.get<std::int64_t>());
    if (j.is_string())
        if (auto v = parse_value(j.get<std::string>())) return *v;
    throw ScenarioError("field '" + field + "': expected an integer, \"bot\" or \"SF\"");
}

inline json ids_json(const std::vector<ProcessId>& ids) {
    json out = json::array();
    for (auto p : ids) out.push_back(p.index);
    return out;
}

inline std::vector<ProcessId> ids_from(const json& j, const std::string& field) {
    if (!j.is_array()) throw ScenarioError("field '" + field + "': expected a list of process indices");
    std::vector<ProcessId> out;
    for (const auto& e : j) {
        if (!e.is_number_unsigned()) throw ScenarioError("field '" + field + "': expected non-negative integers");
        out.push_back(ProcessId{e.get<std::size_t>()});
    }
    return out;
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& path) {
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ScenarioError("field '" + path + key + "': missing or of the wrong type");
    }
}

inline json adversary_json(const AdversarySpec& a) {
    json j;
    j["strategy"] = a.strategy;
    if (!a.ids.empty()) j["ids"] = ids_json(a.ids);
    if (a.strategy == "crash") {
        j["round"] = a.round;
        j["prefix"] = a.prefix;
    }
    if (!a.values.empty()) {
        json vs = json::array();
        for (const auto& v : a.values) vs.push_back(value_json(v));
        j["values"] = vs;
    }
    if (!a.accomplices.empty()) j["accomplices"] = ids_json(a.accomplices);
    if (a.seed) j["seed"] = *a.seed;
    if (!a.parts.empty()) {
        j["parts"] = json::array();
        for (const auto& p : a.parts) j["parts"].push_back(adversary_json(p));
    }
    return j;
}

inline AdversarySpec adversary_from(const json& j, const std::string& path) {
    if (!j.is_object()) throw ScenarioError("field '" + path + "': expected an object");
    AdversarySpec a;
    a.strategy = get_as<std::string>(j, "strategy", path + ".");
    if (j.contains("ids")) a.ids = ids_from(j["ids"], path + ".ids");
    if (j.contains("round")) a.round = get_as<std::size_t>(j, "round", path + ".");
    if (j.contains("prefix")) a.prefix = get_as<std::size_t>(j, "prefix", path + ".");
    if (j.contains("values")) {
        if (!j["values"].is_array()) throw ScenarioError("field '" + path + ".values': expected a list");
        for (const auto& v : j["values"]) a.values.push_back(value_from(v, path + ".values"));
    }
    if (j.contains("accomplices")) a.accomplices = ids_from(j["accomplices"], path + ".accomplices");
    if (j.contains("seed")) a.seed = get_as<std::uint64_t>(j, "seed", path + ".");
    if (j.contains("parts")) {
        if (!j["parts"].is_array()) throw ScenarioError("field '" + path + ".parts': expected a list");
        for (std::size_t i = 0; i < j["parts"].size(); ++i)
            a.parts.push_back(adversary_from(j["parts"][i], path + ".parts[" + std::to_string(i) + "]"));
    }
    return a;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Scenario& s) {
    using detail::json;
    json j;
    if (!s.name.empty()) j["name"] = s.name;
    j["n"] = s.cfg.n;
    j["t"] = s.cfg.t;
    j["protocol"] = std::string(to_string(s.cfg.protocol));
    json vs = json::array();
    for (const auto& v : s.initial_values) vs.push_back(detail::value_json(v));
    j["values"] = vs;
    j["seed"] = s.seed;
    if (s.cfg.protocol == Protocol::AsyncSnapshot) {
        json crash = json::array();
        for (const auto& c : s.crash_plan) crash.push_back({{"pid", c.pid.index}, {"after", c.after_steps}});
        j["crash"] = crash;
        if (s.explicit_schedule) j["schedule"] = {{"kind", "explicit"}, {"steps", detail::ids_json(*s.explicit_schedule)}};
        else j["schedule"] = {{"kind", "seeded"}};
    } else {
        j["adversary"] = detail::adversary_json(s.adversary);
    }
    json e = json::object();
    if (s.expect.distinct) e["distinct"] = *s.expect.distinct;
    if (s.expect.max_distinct) e["max_distinct"] = *s.expect.max_distinct;
    if (s.expect.rounds) e["rounds"] = *s.expect.rounds;
    if (!e.empty()) j["expect"] = e;
    return j;
}

inline Scenario scenario_from_json(const nlohmann::ordered_json& j) {
    using detail::get_as;
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario s;
    if (j.contains("name")) s.name = get_as<std::string>(j, "name", "");
    s.cfg.n = get_as<std::size_t>(j, "n", "");
    s.cfg.t = get_as<std::size_t>(j, "t", "");
    const auto proto = get_as<std::string>(j, "protocol", "");
    if (auto p = parse_protocol(proto)) s.cfg.protocol = *p;
    else throw ScenarioError("field 'protocol': unknown protocol '" + proto + "'");
    if (auto err = validate_config(s.cfg)) throw ScenarioError("config: " + *err);

    if (!j.contains("values") || !j["values"].is_array()) throw ScenarioError("field 'values': missing or not a list");
    for (const auto& v : j["values"]) {
        const Value val = detail::value_from(v, "values");
        if (!val.is_domain()) throw ScenarioError("field 'values': initial values must be integers");
        s.initial_values.push_back(val);
    }
    if (s.initial_values.size() != s.cfg.n)
        throw ScenarioError("field 'values': expected " + std::to_string(s.cfg.n) + " entries, got " +
                            std::to_string(s.initial_values.size()));
    if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j, "seed", "");
    if (j.contains("adversary")) s.adversary = detail::adversary_from(j["adversary"], "adversary");
    if (j.contains("crash")) {
        if (!j["crash"].is_array()) throw ScenarioError("field 'crash': expected a list");
        for (const auto& c : j["crash"])
            s.crash_plan.push_back({ProcessId{get_as<std::size_t>(c, "pid", "crash[].")},
                                    get_as<std::size_t>(c, "after", "crash[].")});
    }
    if (j.contains("schedule")) {
        const auto& sch = j["schedule"];
        const auto kind = get_as<std::string>(sch, "kind", "schedule.");
        if (kind == "explicit") s.explicit_schedule = detail::ids_from(sch.value("steps", detail::json()), "schedule.steps");
        else if (kind != "seeded") throw ScenarioError("field 'schedule.kind': expected 'seeded' or 'explicit'");
    }
    if (j.contains("expect")) {
        const auto& e = j["expect"];
        if (!e.is_object()) throw ScenarioError("field 'expect': expected an object");
        if (e.contains("distinct")) s.expect.distinct = get_as<std::size_t>(e, "distinct", "expect.");
        if (e.contains("max_distinct")) s.expect.max_distinct = get_as<std::size_t>(e, "max_distinct", "expect.");
        if (e.contains("rounds")) s.expect.rounds = get_as<std::size_t>(e, "rounds", "expect.");
    }
    return s;
}

/// Parses scenario text; syntax errors are reported with line and column.
inline Scenario parse_scenario(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed scenario");
    }
    return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Lower-bound witnesses

/// floor(n / (n - t)) groups of at least n - t processes, group i proposing i,
/// no failures: the TRB-based protocol decides exactly one value per group.
inline Scenario partition_lower_bound(std::size_t n, std::size_t t) {
    if (t >= n) throw std::invalid_argument("t < n required");
    const std::size_t size = n - t, groups = n / size;
    Scenario s;
    s.name = "partition_lower_bound(" + std::to_string(n) + "," + std::to_string(t) + ")";
    s.cfg = {n, t, Protocol::TrbOptimal};
    for (std::size_t i = 0; i < n; ++i)
        s.initial_values.push_back(Value::domain(static_cast<std::int64_t>(std::min(i / size, groups - 1))));
    s.expect.distinct = groups;
    s.expect.rounds = t + 1;
    return s;
}

/// n - t processes split into floor((n - t) / (n - 2t)) groups of at least n - 2t
/// that write and decide before the remaining t take any step.
inline Scenario async_partition_lower_bound(std::size_t n, std::size_t t) {
    if (n <= 2 * t) throw std::invalid_argument("n > 2t required");
    const std::size_t active = n - t, size = n - 2 * t, groups = active / size;
    Scenario s;
    s.name = "async_partition_lower_bound(" + std::to_string(n) + "," + std::to_string(t) + ")";
    s.cfg = {n, t, Protocol::AsyncSnapshot};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = i < active ? std::min(i / size, groups - 1) : 0;
        s.initial_values.push_back(Value::domain(static_cast<std::int64_t>(g)));
    }
    std::vector<ProcessId> steps;
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < active; ++i) steps.push_back(ProcessId{i});
    s.explicit_schedule = steps;
    s.expect.distinct = groups;
    return s;
}

// ---------------------------------------------------------------------------
// Random scenarios (fuzzing)

/// A random scenario: up to t faulty processes, inputs biased towards unanimous
/// and block-partitioned assignments, random Byzantine behaviour (synchronous)
/// or random crash points and a seeded fair schedule (asynchronous).
inline Scenario random_scenario(Protocol protocol, std::size_t n, std::size_t t, std::uint64_t seed) {
    Scenario s;
    s.cfg = {n, t, protocol};
    if (auto err = validate_config(s.cfg)) throw std::invalid_argument(*err);
    s.seed = seed;
    std::mt19937_64 rng(seed);
    auto draw = [&](std::size_t bound) { return detail::draw(rng, bound); };

    const std::size_t k = compute_k_bound(s.cfg);
    const std::size_t shape = draw(4);
    const std::size_t block = protocol == Protocol::AsyncSnapshot ? n - 2 * t : n - t;
    const std::size_t distinct = 1 + draw(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t token = 0;
        if (shape == 1) token = i / block;
        else if (shape >= 2) token = draw(distinct);
        s.initial_values.push_back(Value::domain(static_cast<std::int64_t>(token)));
    }

    std::vector<ProcessId> all;
    for (std::size_t i = 0; i < n; ++i) all.push_back(ProcessId{i});
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<ProcessId> faulty(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(draw(t + 1)));
    std::sort(faulty.begin(), faulty.end());

    if (protocol == Protocol::AsyncSnapshot) {
        for (auto p : faulty) s.crash_plan.push_back({p, draw(4)});
    } else if (!faulty.empty()) {
        s.adversary.strategy = "random";
        s.adversary.ids = faulty;
        s.adversary.seed = rng();
    }
    return s;
}

// ---------------------------------------------------------------------------
// Execution

struct ScenarioOutcome {
    Scenario scenario;
    std::variant<SyncRunRecord, AsyncRunRecord> record;
    std::vector<Verdict> verdicts;

    bool passed() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
    }

    const RunRecord& base() const {
        return std::visit([](const auto& r) -> const RunRecord& { return r; }, record);
    }
};

struct ExecuteOptions {
    bool keep_message_log = true;
};

namespace detail {

inline Verdict renamed(Verdict v, std::string name) {
    v.property = std::move(name);
    return v;
}

inline void add_expectations(const Scenario& s, const RunRecord& rec, std::optional<std::size_t> rounds,
                             std::vector<Verdict>& out) {
    const auto vals = decided_values(rec);
    const std::string got = "decided " + join(vals);
    if (s.expect.distinct) {
        const bool ok = vals.size() == *s.expect.distinct;
        out.push_back({"expect.distinct", ok, got + " expected exactly " + std::to_string(*s.expect.distinct), {}, vals});
    }
    if (s.expect.max_distinct) {
        const bool ok = vals.size() <= *s.expect.max_distinct;
        out.push_back({"expect.max_distinct", ok, got + " expected at most " + std::to_string(*s.expect.max_distinct), {},
                       vals});
    }
    if (s.expect.rounds) {
        const bool ok = rounds && *rounds == *s.expect.rounds;
        out.push_back({"expect.rounds", ok,
                       "rounds " + (rounds ? std::to_string(*rounds) : std::string("n/a")) + " expected " +
                           std::to_string(*s.expect.rounds),
                       {}, {}});
    }
}

}  // namespace detail

/// Every verdict that applies to a synchronous record of `protocol`.
inline std::vector<Verdict> sync_verdicts(const SyncRunRecord& rec) {
    const auto k = compute_k_bound(rec.cfg);
    std::vector<Verdict> out{check_termination(rec), check_validity(rec), check_agreement(rec, k)};
    if (rec.cfg.protocol == Protocol::TwoRound) {
        out.push_back(check_round_count(rec, 2));
        return out;
    }
    out.push_back(check_round_count(rec, rec.cfg.t + 1));
    out.push_back(check_vector_equality(rec));
    out.push_back(check_no_mixed_bottom(rec));
    std::array<Verdict, 4> trb{detail::ok("trb.termination"), detail::ok("trb.validity"), detail::ok("trb.integrity"),
                               detail::ok("trb.agreement")};
    for (std::size_t q = 0; q < rec.cfg.n; ++q) {
        auto per = check_trb(rec, ProcessId{q});
        for (std::size_t i = 0; i < 4; ++i)
            if (trb[i].pass && !per[i].pass) trb[i] = detail::renamed(per[i], per[i].property), trb[i].evidence += " (instance p" + std::to_string(q) + ")";
    }
    out.insert(out.end(), trb.begin(), trb.end());
    return out;
}

inline std::vector<Verdict> async_verdicts(const AsyncRunRecord& rec) {
    const auto k = compute_k_bound(rec.cfg);
    return {check_termination(rec),
            check_validity(rec),
            check_agreement(rec, k, DecisionCount::DomainOnly),
            detail::renamed(check_agreement(rec, k + 1), "agreement_with_bottom"),
            check_snapshot_history(rec),
            check_smallest_snapshot_veto(rec)};
}

inline ScenarioOutcome execute(const Scenario& s, const ExecuteOptions& options = {}) {
    if (auto err = validate_config(s.cfg)) throw ScenarioError("config: " + *err);
    if (s.initial_values.size() != s.cfg.n) throw ScenarioError("one initial value per process required");
    ScenarioOutcome out{s, SyncRunRecord{}, {}};
    if (s.cfg.protocol == Protocol::AsyncSnapshot) {
        Schedule schedule = SeededSchedule{s.seed};
        if (s.explicit_schedule) schedule = ExplicitSchedule{*s.explicit_schedule};
        auto rec = run_async(SnapshotKsa{}, s.cfg, s.initial_values, schedule, s.crash_plan);
        out.verdicts = async_verdicts(rec);
        detail::add_expectations(s, rec, std::nullopt, out.verdicts);
        out.record = std::move(rec);
        return out;
    }
    auto adversary = make_adversary(s.adversary, s.seed);
    const SyncOptions opts{0, options.keep_message_log, s.seed};
    SyncRunRecord rec = s.cfg.protocol == Protocol::TwoRound
                            ? run_sync(TwoRoundKsa{}, *adversary, s.cfg, s.initial_values, opts)
                            : run_sync(TrbKsa{}, *adversary, s.cfg, s.initial_values, opts);
    out.verdicts = sync_verdicts(rec);
    detail::add_expectations(s, rec, rec.rounds_executed, out.verdicts);
    out.record = std::move(rec);
    return out;
}

}  // namespace ksa
