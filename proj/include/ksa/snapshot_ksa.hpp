#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>

#include "ksa/core.hpp"
#include "ksa/shm_engine.hpp"

namespace ksa {

/// Decision from a frozen view X holding x >= n - t values: own value if it fills
/// x - t slots, else the smallest domain value that does, else Bottom.
inline Value decide_async(std::span<const Value> view, std::size_t x, Value own, std::size_t t) {
    const std::size_t threshold = x - t;
    std::map<Value, std::size_t> counts;
    for (const auto& v : view)
        if (v.is_domain()) ++counts[v];
    if (counts[own] >= threshold) return own;
    for (const auto& [v, c] : counts)
        if (c >= threshold) return v;
    return Value::bottom();
}

struct AsyncDecisionState {
    ProcessId me;
    Value own;
    bool written = false;
    ViewVector latest;
    std::optional<ViewVector> frozen;
    std::size_t x = 0;
    std::optional<Value> decided;
};

struct Continue {};
struct Decided {
    Value value;
};
using StepOutcome = std::variant<Continue, Decided>;

/// One shared-memory operation of the snapshot-based protocol: the first step
/// writes the own value, every later step takes a snapshot until at least n - t
/// values are visible, then freezes that view and decides.
inline StepOutcome async_propose_step(AsyncDecisionState& s, SnapshotObject& obj, const SystemConfig& cfg) {
    if (s.decided) return Decided{*s.decided};
    if (!s.written) {
        obj.update(s.me, s.own);
        s.written = true;
        return Continue{};
    }
    s.latest = obj.snapshot(s.me);
    if (occupancy(s.latest) < cfg.n - cfg.t) return Continue{};
    s.frozen = s.latest;
    s.x = occupancy(*s.frozen);
    s.decided = decide_async(*s.frozen, s.x, s.own, cfg.t);
    return Decided{*s.decided};
}

/// Snapshot-based k-set agreement for crash failures, k > floor((n - t) / (n - 2t)).
struct SnapshotKsa {
    class Process {
    public:
        Process(ProcessId me, const SystemConfig& cfg, Value initial)
            : cfg_(cfg), state_{me, initial, false, ViewVector(cfg.n, Value::bottom()), std::nullopt, 0, std::nullopt} {}

        std::optional<Value> step(SnapshotObject& obj) {
            const auto outcome = async_propose_step(state_, obj, cfg_);
            if (const auto* d = std::get_if<Decided>(&outcome)) return d->value;
            return std::nullopt;
        }

        std::optional<Value> decision() const { return state_.decided; }
        std::optional<ViewVector> frozen_view() const { return state_.frozen; }
        const AsyncDecisionState& state() const { return state_; }

    private:
        SystemConfig cfg_;
        AsyncDecisionState state_;
    };

    Process make(ProcessId me, const SystemConfig& cfg, Value initial) const { return Process(me, cfg, initial); }
};

}  // namespace ksa
