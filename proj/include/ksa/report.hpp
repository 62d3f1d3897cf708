#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksa/checker.hpp"
#include "ksa/oracle.hpp"
#include "ksa/scenario.hpp"

namespace ksa {

using ordered_json = nlohmann::ordered_json;

/// Messages kept in a report of a passing run.
inline constexpr std::size_t truncated_log_messages = 16;

/// Synchronous runs with n <= 2t are outside the regime where the bound is
/// claimed optimal; reports mark them.
inline bool flag_n_le_2t(const SystemConfig& cfg) {
    return cfg.protocol != Protocol::AsyncSnapshot && cfg.n <= 2 * cfg.t;
}

inline ordered_json to_json(const SignedChain& c) {
    ordered_json signers = ordered_json::array();
    for (auto p : c.signers()) signers.push_back(p.index);
    return {{"payload", detail::value_json(c.payload())}, {"signers", signers}};
}

inline ordered_json to_json(const RoundMessage& m) {
    ordered_json j{{"round", m.round}, {"from", m.from.index}, {"to", m.to.index}, {"instance", m.instance}};
    if (const auto* c = std::get_if<Chains>(&m.body)) {
        ordered_json cs = ordered_json::array();
        for (const auto& ch : c->chains) cs.push_back(to_json(ch));
        j["chains"] = cs;
    } else {
        ordered_json slots = ordered_json::array();
        for (const auto& s : std::get<VectorMsg>(m.body).slots) slots.push_back(s ? to_json(*s) : ordered_json());
        j["vector"] = slots;
    }
    return j;
}

inline ordered_json to_json(const Verdict& v) {
    ordered_json j{{"property", v.property}, {"pass", v.pass}};
    if (!v.evidence.empty()) j["evidence"] = v.evidence;
    if (!v.witnesses.empty()) j["witnesses"] = detail::ids_json(v.witnesses);
    if (!v.values.empty()) {
        ordered_json vs = ordered_json::array();
        for (const auto& x : v.values) vs.push_back(detail::value_json(x));
        j["values"] = vs;
    }
    return j;
}

inline ordered_json views_json(const std::vector<ViewVector>& views) {
    ordered_json out = ordered_json::array();
    for (const auto& v : views) {
        ordered_json row = ordered_json::array();
        for (const auto& x : v) row.push_back(detail::value_json(x));
        out.push_back(row);
    }
    return out;
}

inline ordered_json base_json(const RunRecord& rec) {
    ordered_json decisions = ordered_json::array();
    for (const auto& d : rec.decisions)
        decisions.push_back({{"pid", d.pid.index}, {"value", detail::value_json(d.decided)}, {"at", d.at},
                             {"correct", d.correct}});
    ordered_json faulty = ordered_json::array();
    for (std::size_t i = 0; i < rec.faulty.size(); ++i)
        if (rec.faulty[i]) faulty.push_back(i);
    return {{"faulty", faulty}, {"decisions", decisions}, {"budget_exhausted", rec.budget_exhausted}};
}

/// `full_log`: every delivered message; otherwise the first few and a count.
inline ordered_json to_json(const SyncRunRecord& rec, bool full_log) {
    auto j = base_json(rec);
    j["rounds_executed"] = rec.rounds_executed;
    j["forgeries_rejected"] = rec.forgeries_rejected;
    j["views"] = views_json(rec.views);
    std::size_t total = 0;
    ordered_json log = ordered_json::array();
    for (const auto& round : rec.message_log)
        for (const auto& m : round) {
            if (full_log || total < truncated_log_messages) log.push_back(to_json(m));
            ++total;
        }
    j["messages_total"] = total;
    j["message_log"] = log;
    if (!full_log && total > truncated_log_messages) j["message_log_truncated"] = true;
    return j;
}

inline ordered_json to_json(const AsyncRunRecord& rec, bool full_log) {
    auto j = base_json(rec);
    j["steps_executed"] = rec.steps_executed;
    ordered_json trace = ordered_json::array();
    for (auto p : rec.trace) trace.push_back(p.index);
    j["trace"] = trace;
    ordered_json frozen = ordered_json::array();
    for (const auto& v : rec.frozen_views) frozen.push_back(v ? views_json({*v}).front() : ordered_json());
    j["frozen_views"] = frozen;
    ordered_json history = ordered_json::array();
    for (std::size_t i = 0; i < rec.history.size(); ++i) {
        if (!full_log && i >= truncated_log_messages) {
            j["history_truncated"] = true;
            break;
        }
        const auto& e = rec.history[i];
        ordered_json h{{"step", e.step}, {"pid", e.pid.index}};
        if (e.op == LinearizationEntry::Op::Update) {
            h["update"] = detail::value_json(e.written);
        } else {
            h["snapshot"] = views_json({e.view}).front();
        }
        history.push_back(h);
    }
    j["history"] = history;
    return j;
}

inline ordered_json verdicts_json(const std::vector<Verdict>& verdicts) {
    ordered_json out = ordered_json::array();
    for (const auto& v : verdicts) out.push_back(to_json(v));
    return out;
}

/// Report of one scenario; the full message log is included only on failure.
inline ordered_json run_report(const ScenarioOutcome& o) {
    const bool pass = o.passed();
    ordered_json j;
    j["scenario"] = to_json(o.scenario);
    j["pass"] = pass;
    if (flag_n_le_2t(o.scenario.cfg)) j["flags"] = ordered_json::array({"n_le_2t"});
    ordered_json distinct = ordered_json::array();
    for (const auto& v : decided_values(o.base())) distinct.push_back(detail::value_json(v));
    j["distinct"] = distinct;
    j["verdicts"] = verdicts_json(o.verdicts);
    j["record"] = std::visit([&](const auto& r) { return to_json(r, !pass); }, o.record);
    return j;
}

inline std::string run_report_text(const ScenarioOutcome& o) {
    std::ostringstream os;
    const auto& s = o.scenario;
    os << "scenario: " << (s.name.empty() ? "(unnamed)" : s.name) << "\n";
    os << "protocol: " << to_string(s.cfg.protocol) << " n=" << s.cfg.n << " t=" << s.cfg.t << " seed=" << s.seed << "\n";
    os << "values: " << detail::values_text(s.initial_values) << "\n";
    if (flag_n_le_2t(s.cfg)) os << "note: n <= 2t\n";
    const auto& rec = o.base();
    for (const auto& d : rec.decisions)
        os << "  " << d.pid << (d.correct ? "" : " (faulty)") << " decided " << d.decided << " at " << d.at << "\n";
    if (const auto* sr = std::get_if<SyncRunRecord>(&o.record))
        os << "rounds: " << sr->rounds_executed << "\n";
    else
        os << "steps: " << std::get<AsyncRunRecord>(o.record).steps_executed << "\n";
    os << "distinct: " << detail::join(decided_values(rec)) << "\n";
    for (const auto& v : o.verdicts) {
        os << (v.pass ? "PASS " : "FAIL ") << v.property;
        if (!v.evidence.empty()) os << "  " << v.evidence;
        if (!v.witnesses.empty()) {
            os << "  witnesses";
            for (auto p : v.witnesses) os << ' ' << p;
        }
        os << "\n";
    }
    if (!o.passed())
        if (const auto* sr = std::get_if<SyncRunRecord>(&o.record)) {
            os << "message log:\n";
            for (const auto& round : sr->message_log)
                for (const auto& m : round) os << "  " << to_json(m).dump() << "\n";
        }
    os << "result: " << (o.passed() ? "pass" : "FAIL") << "\n";
    return os.str();
}

inline ordered_json to_json(const OracleSummary& s) {
    ordered_json j{{"target", std::string(to_string(s.target))}, {"n", s.n}, {"t", s.t}};
    if (s.refused) {
        j["refused"] = true;
        j["estimate"] = s.estimate;
        return j;
    }
    j["runs"] = s.runs;
    j["violations"] = s.violations;
    j["max_distinct"] = s.max_distinct;
    j["max_distinct_domain"] = s.max_distinct_domain;
    ordered_json f = ordered_json::object();
    for (const auto& [k, v] : s.failures_by_property) f[k] = v;
    j["failures_by_property"] = f;
    j["samples"] = s.samples;
    return j;
}

inline std::string oracle_report_text(const OracleSummary& s) {
    std::ostringstream os;
    os << "oracle: " << to_string(s.target) << " n=" << s.n << " t=" << s.t << "\n";
    if (s.refused) {
        os << "refused: space of about " << static_cast<std::uint64_t>(s.estimate) << " runs exceeds the bound\n";
        return os.str();
    }
    os << "runs: " << s.runs << "\n";
    os << "violations: " << s.violations << "\n";
    os << "max distinct: " << s.max_distinct << "\n";
    os << "max distinct domain: " << s.max_distinct_domain << "\n";
    for (const auto& [k, v] : s.failures_by_property) os << "  " << k << ": " << v << "\n";
    for (const auto& x : s.samples) os << "  sample " << x << "\n";
    return os.str();
}

}  // namespace ksa
