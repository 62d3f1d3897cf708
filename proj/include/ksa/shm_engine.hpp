#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ksa/core.hpp"

namespace ksa {

class ScheduleError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Number of non-Bottom slots.
inline std::size_t occupancy(std::span<const Value> view) {
    return static_cast<std::size_t>(std::count_if(view.begin(), view.end(), [](const Value& v) { return !v.is_bottom(); }));
}

struct LinearizationEntry {
    enum class Op : std::uint8_t { Update, Snapshot };

    std::size_t step = 0;
    ProcessId pid;
    Op op = Op::Update;
    Value written;   // Update only
    ViewVector view;  // Snapshot only

    friend bool operator==(const LinearizationEntry&, const LinearizationEntry&) = default;
};

/// Single-writer atomic snapshot object. Each operation is one indivisible
/// scheduler step, so the log order is the linearization order.
class SnapshotObject {
public:
    explicit SnapshotObject(std::size_t n) : registers_(n, Value::bottom()), crashed_(n, false) {}

    std::size_t size() const { return registers_.size(); }

    void update(ProcessId pid, Value v) {
        require_live(pid);
        if (!v.is_domain()) throw std::invalid_argument("only domain values are written");
        registers_[pid.index] = v;
        ++updates_;
        log_.push_back({log_.size(), pid, LinearizationEntry::Op::Update, v, {}});
    }

    ViewVector snapshot(ProcessId pid) {
        require_live(pid);
        log_.push_back({log_.size(), pid, LinearizationEntry::Op::Snapshot, Value::bottom(), registers_});
        return registers_;
    }

    void crash(ProcessId pid) { crashed_.at(pid.index) = true; }
    bool crashed(ProcessId pid) const { return crashed_.at(pid.index); }
    const std::vector<LinearizationEntry>& log() const { return log_; }
    std::size_t updates() const { return updates_; }

private:
    void require_live(ProcessId pid) const {
        if (pid.index >= registers_.size()) throw ScheduleError("unknown process");
        if (crashed_[pid.index]) throw ScheduleError("crashed process took a step");
    }

    std::vector<Value> registers_;
    std::vector<bool> crashed_;
    std::vector<LinearizationEntry> log_;
    std::size_t updates_ = 0;
};

/// Per-process code of an asynchronous protocol: one shared-memory operation per step.
template <class P>
concept AsyncProtocol = requires(const P& protocol, typename P::Process& proc, const typename P::Process& cproc,
                                 ProcessId id, const SystemConfig& cfg, Value v, SnapshotObject& obj) {
    { protocol.make(id, cfg, v) } -> std::same_as<typename P::Process>;
    { proc.step(obj) } -> std::same_as<std::optional<Value>>;
    { cproc.decision() } -> std::same_as<std::optional<Value>>;
    { cproc.frozen_view() } -> std::same_as<std::optional<ViewVector>>;
};

/// Seeded: weighted random choice with starvation forcing, so every live process
/// steps at least once every 4n steps.
struct SeededSchedule {
    std::uint64_t seed = 0;
    friend bool operator==(const SeededSchedule&, const SeededSchedule&) = default;
};

/// Explicit step list; once exhausted the run continues round-robin.
struct ExplicitSchedule {
    std::vector<ProcessId> steps;
    friend bool operator==(const ExplicitSchedule&, const ExplicitSchedule&) = default;
};

using Schedule = std::variant<SeededSchedule, ExplicitSchedule>;

/// `pid` crashes right after its `after_steps`-th own step (0: before any step).
struct CrashPoint {
    ProcessId pid;
    std::size_t after_steps = 0;
    friend bool operator==(const CrashPoint&, const CrashPoint&) = default;
};

struct AsyncRunRecord : RunRecord {
    std::uint64_t seed = 0;
    /// The steps actually taken, in order.
    std::vector<ProcessId> trace;
    std::vector<CrashPoint> crash_plan;
    std::vector<LinearizationEntry> history;
    /// The view each process decided from, if it reached the decision.
    std::vector<std::optional<ViewVector>> frozen_views;
    std::size_t steps_executed = 0;
};

struct AsyncOptions {
    /// 0 selects 64 n^2.
    std::size_t step_budget = 0;
};

namespace detail {

/// Portable uniform draw in [0, bound).
inline std::size_t draw(std::mt19937_64& rng, std::size_t bound) { return static_cast<std::size_t>(rng() % bound); }

inline void validate_crash_plan(const SystemConfig& cfg, std::span<const CrashPoint> plan) {
    if (plan.size() > cfg.t) throw std::invalid_argument("crash plan exceeds t");
    std::vector<bool> seen(cfg.n, false);
    for (const auto& c : plan) {
        if (c.pid.index >= cfg.n) throw std::invalid_argument("crash plan names an unknown process");
        if (seen[c.pid.index]) throw std::invalid_argument("crash plan names a process twice");
        seen[c.pid.index] = true;
    }
}

/// Live state of an asynchronous execution; copyable so exhaustive search can branch.
template <AsyncProtocol P>
struct AsyncExecution {
    SystemConfig cfg;
    SnapshotObject memory;
    std::vector<typename P::Process> procs;
    std::vector<std::size_t> own_steps;
    std::vector<std::optional<std::size_t>> decided_at;
    std::vector<ProcessId> trace;
    std::vector<CrashPoint> crashes;

    AsyncExecution(const P& protocol, const SystemConfig& c, std::span<const Value> initial)
        : cfg(c), memory(c.n), own_steps(c.n, 0), decided_at(c.n) {
        procs.reserve(c.n);
        for (std::size_t i = 0; i < c.n; ++i) procs.push_back(protocol.make(ProcessId{i}, c, initial[i]));
    }

    bool runnable(std::size_t i) const { return !memory.crashed(ProcessId{i}) && !decided_at[i]; }

    bool finished() const {
        for (std::size_t i = 0; i < cfg.n; ++i)
            if (runnable(i)) return false;
        return true;
    }

    void step(ProcessId p) {
        const auto global = trace.size();
        trace.push_back(p);
        ++own_steps[p.index];
        if (procs[p.index].step(memory) && !decided_at[p.index]) decided_at[p.index] = global;
    }

    void crash(ProcessId p) {
        memory.crash(p);
        crashes.push_back({p, own_steps[p.index]});
    }

    AsyncRunRecord record(std::span<const Value> initial, std::span<const CrashPoint> plan, std::uint64_t seed,
                          bool exhausted) const {
        AsyncRunRecord rec;
        rec.cfg = cfg;
        rec.seed = seed;
        rec.initial_values.assign(initial.begin(), initial.end());
        rec.faulty.assign(cfg.n, false);
        for (const auto& c : plan) rec.faulty[c.pid.index] = true;
        rec.crash_plan.assign(plan.begin(), plan.end());
        rec.trace = trace;
        rec.history = memory.log();
        rec.steps_executed = trace.size();
        rec.budget_exhausted = exhausted;
        rec.frozen_views.resize(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            rec.frozen_views[i] = procs[i].frozen_view();
            if (auto d = procs[i].decision()) rec.decisions.push_back({ProcessId{i}, *d, *decided_at[i], !rec.faulty[i]});
        }
        return rec;
    }
};

}  // namespace detail

/// Drives `protocol` one shared-memory operation at a time until every process
/// has crashed or decided. Deterministic in all inputs.
template <AsyncProtocol P>
AsyncRunRecord run_async(const P& protocol, const SystemConfig& cfg, std::span<const Value> initial_values,
                         const Schedule& schedule, std::span<const CrashPoint> crash_plan,
                         const AsyncOptions& options = {}) {
    if (auto err = validate_config(cfg)) throw std::invalid_argument(*err);
    if (initial_values.size() != cfg.n) throw std::invalid_argument("one initial value per process required");
    for (const auto& v : initial_values)
        if (!v.is_domain()) throw std::invalid_argument("initial values must be domain values");
    detail::validate_crash_plan(cfg, crash_plan);

    const std::size_t n = cfg.n;
    const std::size_t budget = options.step_budget ? options.step_budget : 64 * n * n;
    detail::AsyncExecution<P> exec(protocol, cfg, initial_values);

    std::vector<std::optional<std::size_t>> crash_after(n);
    for (const auto& c : crash_plan) crash_after[c.pid.index] = c.after_steps;
    auto apply_crash = [&](std::size_t i) {
        if (crash_after[i] && exec.own_steps[i] >= *crash_after[i] && !exec.memory.crashed(ProcessId{i}))
            exec.memory.crash(ProcessId{i});
    };
    for (std::size_t i = 0; i < n; ++i) apply_crash(i);

    auto take = [&](std::size_t i) {
        exec.step(ProcessId{i});
        apply_crash(i);
    };

    std::uint64_t seed = 0;
    std::size_t rr_next = 0;
    auto round_robin = [&] {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = (rr_next + k) % n;
            if (exec.runnable(i)) {
                rr_next = i + 1;
                return i;
            }
        }
        return n;
    };

    if (const auto* ex = std::get_if<ExplicitSchedule>(&schedule)) {
        for (auto p : ex->steps) {
            if (exec.trace.size() >= budget) break;
            if (p.index >= n) throw ScheduleError("schedule names an unknown process");
            if (exec.memory.crashed(p)) throw ScheduleError("schedule grants a step to a crashed process");
            if (exec.decided_at[p.index]) continue;
            take(p.index);
        }
    } else {
        const auto& seeded = std::get<SeededSchedule>(schedule);
        seed = seeded.seed;
        std::mt19937_64 rng(seeded.seed);
        std::vector<std::size_t> weight(n), last(n, 0);
        for (auto& w : weight) w = 1 + detail::draw(rng, 8);
        // up to n - 1 others may be forced first, so 3n keeps every gap below 4n
        const std::size_t starvation = 3 * n;
        while (!exec.finished() && exec.trace.size() < budget) {
            const std::size_t now = exec.trace.size();
            std::size_t pick = n, total = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!exec.runnable(i)) continue;
                if (now - last[i] >= starvation && (pick == n || last[i] < last[pick])) pick = i;
                total += weight[i];
            }
            if (pick == n) {
                std::size_t ticket = detail::draw(rng, total);
                for (std::size_t i = 0; i < n; ++i) {
                    if (!exec.runnable(i)) continue;
                    if (ticket < weight[i]) {
                        pick = i;
                        break;
                    }
                    ticket -= weight[i];
                }
            }
            last[pick] = now + 1;
            take(pick);
        }
    }

    while (!exec.finished() && exec.trace.size() < budget) take(round_robin());

    return exec.record(initial_values, crash_plan, seed, !exec.finished());
}

struct ExplorationResult {
    std::size_t runs = 0;
    bool truncated = false;
};

/// Enumerates every interleaving (and every placement of up to `max_crashes`
/// crashes) to completion, calling `visit` on each finished run. Snapshots that
/// cannot observe anything new are pruned, which keeps the space finite.
/// Stops after `max_runs` runs and reports truncation.
template <AsyncProtocol P>
ExplorationResult explore_async(const P& protocol, const SystemConfig& cfg, std::span<const Value> initial_values,
                                std::size_t max_crashes, std::size_t max_runs,
                                const std::function<void(const AsyncRunRecord&)>& visit) {
    if (auto err = validate_config(cfg)) throw std::invalid_argument(*err);
    if (max_crashes > cfg.t) throw std::invalid_argument("max_crashes exceeds t");
    const std::size_t n = cfg.n;
    ExplorationResult result;

    struct Node {
        detail::AsyncExecution<P> exec;
        // update count seen by each process's latest snapshot (none yet: -1)
        std::vector<long> seen_updates;
    };

    std::function<void(Node&)> dfs = [&](Node& node) {
        if (result.truncated) return;
        if (node.exec.finished()) {
            if (result.runs >= max_runs) {
                result.truncated = true;
                return;
            }
            ++result.runs;
            visit(node.exec.record(initial_values, node.exec.crashes, 0, false));
            return;
        }
        const auto updates = static_cast<long>(node.exec.memory.updates());
        for (std::size_t i = 0; i < n; ++i) {
            if (!node.exec.runnable(i)) continue;
            const bool wrote = node.exec.own_steps[i] > 0;
            if (wrote && node.seen_updates[i] == updates) continue;  // stutter
            Node child = node;
            child.exec.step(ProcessId{i});
            if (child.exec.memory.log().back().op == LinearizationEntry::Op::Snapshot)
                child.seen_updates[i] = static_cast<long>(child.exec.memory.updates());
            dfs(child);
        }
        if (node.exec.crashes.size() < max_crashes) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!node.exec.runnable(i)) continue;
                Node child = node;
                child.exec.crash(ProcessId{i});
                dfs(child);
            }
        }
    };

    Node root{detail::AsyncExecution<P>(protocol, cfg, initial_values), std::vector<long>(n, -1)};
    dfs(root);
    return result;
}

}  // namespace ksa
