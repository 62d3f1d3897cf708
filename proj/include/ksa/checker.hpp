#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ksa/core.hpp"
#include "ksa/shm_engine.hpp"
#include "ksa/sync_engine.hpp"

namespace ksa {

/// Outcome of one property check, with the evidence needed to reproduce a failure.
struct Verdict {
    std::string property;
    bool pass = true;
    std::string evidence;
    std::vector<ProcessId> witnesses;
    std::vector<Value> values;

    explicit operator bool() const { return pass; }
};

enum class DecisionCount { All, DomainOnly };

namespace detail {

inline std::string join(const std::vector<Value>& vs) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? "," : "") << vs[i];
    os << '}';
    return os.str();
}

inline Verdict fail(std::string property, std::string evidence, std::vector<ProcessId> who = {},
                    std::vector<Value> values = {}) {
    return {std::move(property), false, std::move(evidence), std::move(who), std::move(values)};
}

inline Verdict ok(std::string property, std::string evidence = {}, std::vector<Value> values = {}) {
    return {std::move(property), true, std::move(evidence), {}, std::move(values)};
}

inline bool subset_of(std::span<const Value> a, std::span<const Value> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_bottom() && a[i] != b[i]) return false;
    return true;
}

}  // namespace detail

/// Distinct values decided by correct processes.
inline std::vector<Value> decided_values(const RunRecord& rec, DecisionCount mode = DecisionCount::All) {
    std::set<Value> out;
    for (const auto& d : rec.decisions)
        if (d.correct && (mode == DecisionCount::All || d.decided.is_domain())) out.insert(d.decided);
    return {out.begin(), out.end()};
}

inline Verdict check_validity(const RunRecord& rec) {
    std::optional<Value> common;
    for (std::size_t i = 0; i < rec.cfg.n; ++i) {
        if (rec.faulty[i]) continue;
        if (common && *common != rec.initial_values[i]) return detail::ok("validity", "vacuous: correct inputs differ");
        common = rec.initial_values[i];
    }
    if (!common) return detail::ok("validity", "vacuous: no correct process");
    std::vector<ProcessId> off;
    std::vector<Value> got;
    for (const auto& d : rec.decisions) {
        if (d.correct && d.decided != *common) {
            off.push_back(d.pid);
            got.push_back(d.decided);
        }
    }
    if (!off.empty())
        return detail::fail("validity", "all correct proposed " + to_string(*common) + " but some decided otherwise",
                            off, got);
    return detail::ok("validity", "all correct decided " + to_string(*common));
}

inline Verdict check_agreement(const RunRecord& rec, std::size_t k, DecisionCount mode = DecisionCount::All) {
    const auto vals = decided_values(rec, mode);
    const std::string what = mode == DecisionCount::All ? "distinct decisions " : "distinct domain decisions ";
    const std::string ev = what + detail::join(vals) + " bound " + std::to_string(k);
    if (vals.size() > k) return detail::fail("agreement", ev, {}, vals);
    return detail::ok("agreement", ev, vals);
}

inline Verdict check_termination(const RunRecord& rec) {
    if (rec.budget_exhausted) return detail::fail("termination", "non-termination: budget exhausted");
    std::vector<ProcessId> missing;
    for (std::size_t i = 0; i < rec.cfg.n; ++i)
        if (!rec.faulty[i] && !rec.decision_of(ProcessId{i})) missing.push_back(ProcessId{i});
    if (!missing.empty()) return detail::fail("termination", "correct processes without decision", missing);
    return detail::ok("termination");
}

/// Termination, Validity, Integrity and Agreement of one TRB instance.
inline std::array<Verdict, 4> check_trb(const SyncRunRecord& rec, ProcessId sender) {
    const TrbTrace* trace = nullptr;
    for (const auto& tr : rec.trb)
        if (tr.sender == sender) trace = &tr;
    std::array<Verdict, 4> out{detail::ok("trb.termination"), detail::ok("trb.validity"), detail::ok("trb.integrity"),
                               detail::ok("trb.agreement")};
    if (!trace) {
        for (auto& v : out) v = detail::fail(v.property, "no trace for instance of p" + std::to_string(sender.index));
        return out;
    }
    const std::size_t n = rec.cfg.n;
    std::vector<ProcessId> undelivered, wrong, unsigned_;
    std::set<Value> delivered;
    const auto& signed_by_sender = rec.originated.at(sender.index);
    for (std::size_t i = 0; i < n; ++i) {
        if (rec.faulty[i]) continue;
        const auto& d = trace->delivered[i];
        if (!d) {
            undelivered.push_back(ProcessId{i});
            continue;
        }
        delivered.insert(*d);
        if (!rec.faulty[sender.index] && *d != rec.initial_values[sender.index]) wrong.push_back(ProcessId{i});
        if (!d->is_sender_faulty() &&
            std::find(signed_by_sender.begin(), signed_by_sender.end(), *d) == signed_by_sender.end())
            unsigned_.push_back(ProcessId{i});
    }
    if (!undelivered.empty()) out[0] = detail::fail("trb.termination", "correct processes never delivered", undelivered);
    if (!wrong.empty())
        out[1] = detail::fail("trb.validity", "correct sender broadcast " + to_string(rec.initial_values[sender.index]),
                              wrong);
    if (!unsigned_.empty()) out[2] = detail::fail("trb.integrity", "delivered a value the sender never signed", unsigned_);
    const std::vector<Value> dv(delivered.begin(), delivered.end());
    if (dv.size() > 1) out[3] = detail::fail("trb.agreement", "correct deliveries " + detail::join(dv), {}, dv);
    return out;
}

/// L-vector (or V-vector) equality across correct processes.
inline Verdict check_vector_equality(const SyncRunRecord& rec) {
    const ViewVector* ref = nullptr;
    ProcessId ref_id;
    for (std::size_t i = 0; i < rec.cfg.n; ++i) {
        if (rec.faulty[i]) continue;
        if (!ref) {
            ref = &rec.views[i];
            ref_id = ProcessId{i};
        } else if (rec.views[i] != *ref) {
            return detail::fail("vector_equality", "views differ", {ref_id, ProcessId{i}});
        }
    }
    return detail::ok("vector_equality");
}

/// Either every correct process decides Bottom or none does.
inline Verdict check_no_mixed_bottom(const RunRecord& rec) {
    std::vector<ProcessId> bottoms;
    std::size_t others = 0;
    for (const auto& d : rec.decisions) {
        if (!d.correct) continue;
        if (d.decided.is_bottom()) bottoms.push_back(d.pid);
        else ++others;
    }
    if (!bottoms.empty() && others > 0) return detail::fail("no_mixed_bottom", "Bottom decided next to values", bottoms);
    return detail::ok("no_mixed_bottom");
}

inline Verdict check_round_count(const SyncRunRecord& rec, std::size_t expected) {
    const std::string ev = "rounds " + std::to_string(rec.rounds_executed) + " expected " + std::to_string(expected);
    return rec.rounds_executed == expected ? detail::ok("rounds", ev) : detail::fail("rounds", ev);
}

/// Replays the linearization log against a sequential snapshot object and checks
/// the inclusion property on every returned view.
inline Verdict check_snapshot_history(const AsyncRunRecord& rec) {
    const std::size_t n = rec.cfg.n;
    ViewVector registers(n, Value::bottom());
    std::vector<bool> wrote(n, false);
    std::vector<const ViewVector*> views;
    for (std::size_t k = 0; k < rec.history.size(); ++k) {
        const auto& e = rec.history[k];
        if (e.step != k) return detail::fail("snapshot_history", "log out of step order at entry " + std::to_string(k));
        if (e.pid.index >= n) return detail::fail("snapshot_history", "unknown process in log");
        if (e.op == LinearizationEntry::Op::Update) {
            registers[e.pid.index] = e.written;
            wrote[e.pid.index] = true;
            continue;
        }
        if (e.view != registers)
            return detail::fail("snapshot_history", "snapshot at entry " + std::to_string(k) + " is not the register state",
                                {e.pid});
        if (wrote[e.pid.index] && e.view[e.pid.index].is_bottom())
            return detail::fail("snapshot_history", "view misses the invoker's own value", {e.pid});
        views.push_back(&e.view);
    }
    for (std::size_t a = 0; a < views.size(); ++a)
        for (std::size_t b = a + 1; b < views.size(); ++b)
            if (!detail::subset_of(*views[a], *views[b]) && !detail::subset_of(*views[b], *views[a]))
                return detail::fail("snapshot_history", "views " + std::to_string(a) + " and " + std::to_string(b) +
                                                            " are not inclusion-comparable");
    return detail::ok("snapshot_history", std::to_string(views.size()) + " views");
}

/// No correct process decides v unless v fills x_min - t slots of the smallest
/// frozen view.
inline Verdict check_smallest_snapshot_veto(const AsyncRunRecord& rec) {
    const ViewVector* smallest = nullptr;
    for (const auto& v : rec.frozen_views)
        if (v && (!smallest || occupancy(*v) < occupancy(*smallest))) smallest = &*v;
    if (!smallest) return detail::ok("smallest_snapshot_veto", "vacuous: no frozen view");
    const std::size_t x_min = occupancy(*smallest);
    std::vector<ProcessId> who;
    std::vector<Value> vals;
    for (const auto& d : rec.decisions) {
        if (!d.correct || !d.decided.is_domain()) continue;
        const auto count = static_cast<std::size_t>(std::count(smallest->begin(), smallest->end(), d.decided));
        if (count + rec.cfg.t < x_min) {
            who.push_back(d.pid);
            vals.push_back(d.decided);
        }
    }
    if (!who.empty()) return detail::fail("smallest_snapshot_veto", "decided values rare in the smallest view", who, vals);
    return detail::ok("smallest_snapshot_veto", "x_min " + std::to_string(x_min));
}

}  // namespace ksa
