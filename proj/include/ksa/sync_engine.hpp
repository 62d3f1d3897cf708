#pragma once

#include <algorithm>
#include <concepts>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <variant>
#include <vector>

#include "ksa/authsig.hpp"
#include "ksa/core.hpp"

namespace ksa {

/// A bundle of signed chains (TRB relays, or a single signed round-1 value).
struct Chains {
    std::vector<SignedChain> chains;
    friend auto operator<=>(const Chains&, const Chains&) = default;
};

/// A reported view: slot j carries p_j's signed value, or nothing (Bottom).
struct VectorMsg {
    std::vector<std::optional<SignedChain>> slots;
    friend bool operator==(const VectorMsg&, const VectorMsg&) = default;
};

using MessageBody = std::variant<Chains, VectorMsg>;

/// One message of the lock-step model. `instance` multiplexes parallel protocol
/// instances (the TRB instance id, i.e. its sender's index); 0 otherwise.
struct RoundMessage {
    ProcessId from;
    ProcessId to;
    std::size_t round = 0;
    std::size_t instance = 0;
    MessageBody body;

    friend bool operator==(const RoundMessage&, const RoundMessage&) = default;
};

/// Calls `f` on every chain carried by a message body.
template <class F>
void for_each_chain(const MessageBody& body, F&& f) {
    if (const auto* c = std::get_if<Chains>(&body)) {
        for (const auto& chain : c->chains) f(chain);
    } else {
        for (const auto& slot : std::get<VectorMsg>(body).slots)
            if (slot) f(*slot);
    }
}

/// Outcome of one TRB instance at one process; value is empty until delivery.
struct Delivery {
    ProcessId sender;
    std::optional<Value> value;
};

/// A correct protocol's per-process state machine for the synchronous model.
template <class P>
concept SyncProtocol = requires(const P& protocol, typename P::Process& proc, const typename P::Process& cproc,
                                ProcessId id, const SystemConfig& cfg, Value v, const SigningCapability& cap,
                                std::size_t round, std::span<const RoundMessage> inbox) {
    { protocol.make(id, cfg, v, cap) } -> std::same_as<typename P::Process>;
    { proc.emit(round) } -> std::same_as<std::vector<RoundMessage>>;
    { proc.absorb(round, inbox) };
    { cproc.decision() } -> std::same_as<std::optional<Value>>;
    { cproc.view() } -> std::same_as<ViewVector>;
    { cproc.deliveries() } -> std::same_as<std::vector<Delivery>>;
};

/// What the coalition of Byzantine processes can see and do in one round.
class RoundContext {
public:
    RoundContext(std::size_t round, const SystemConfig& cfg, std::span<const ProcessId> controlled,
                 std::span<const SigningCapability> caps, std::span<const std::vector<RoundMessage>> inboxes,
                 std::span<const std::vector<RoundMessage>> honest, std::span<const Value> initial)
        : round_(round), cfg_(cfg), controlled_(controlled), caps_(caps), inboxes_(inboxes), honest_(honest),
          initial_(initial) {}

    std::size_t round() const { return round_; }
    const SystemConfig& config() const { return cfg_; }
    std::span<const ProcessId> controlled() const { return controlled_; }

    bool controls(ProcessId p) const {
        return std::find(controlled_.begin(), controlled_.end(), p) != controlled_.end();
    }

    const SigningCapability& capability(ProcessId p) const {
        require(p);
        return caps_[p.index];
    }

    /// Messages `p` received in the previous round.
    std::span<const RoundMessage> inbox(ProcessId p) const {
        require(p);
        return inboxes_[p.index];
    }

    /// Messages the correct code of `p` would send this round.
    std::span<const RoundMessage> honest(ProcessId p) const {
        require(p);
        return honest_[p.index];
    }

    Value initial_value(ProcessId p) const { return initial_[p.index]; }

private:
    void require(ProcessId p) const {
        if (!controls(p)) throw std::logic_error("adversary accessed a process it does not control");
    }

    std::size_t round_;
    const SystemConfig& cfg_;
    std::span<const ProcessId> controlled_;
    std::span<const SigningCapability> caps_;
    std::span<const std::vector<RoundMessage>> inboxes_;
    std::span<const std::vector<RoundMessage>> honest_;
    std::span<const Value> initial_;
};

/// A Byzantine strategy. Called once per round for the whole coalition; may emit
/// any messages whose `from` it controls. Chains it emits must be authentic.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::vector<ProcessId> controlled() const = 0;
    virtual std::vector<RoundMessage> on_round(const RoundContext& ctx) = 0;
};

class NoAdversary final : public Adversary {
public:
    std::vector<ProcessId> controlled() const override { return {}; }
    std::vector<RoundMessage> on_round(const RoundContext&) override { return {}; }
};

/// Delivery trace of one TRB instance: what each process delivered.
struct TrbTrace {
    ProcessId sender;
    std::vector<std::optional<Value>> delivered;

    friend bool operator==(const TrbTrace&, const TrbTrace&) = default;
};

struct SyncRunRecord : RunRecord {
    std::uint64_t seed = 0;
    std::size_t rounds_executed = 0;
    /// message_log[r-1] holds every message delivered in round r.
    std::vector<std::vector<RoundMessage>> message_log;
    /// Final view of each correct process (V for two-round, L for TRB-based); empty for faulty.
    std::vector<ViewVector> views;
    std::vector<TrbTrace> trb;
    /// Per process, the payloads it signed as the origin of a chain.
    std::vector<std::vector<Value>> originated;
    std::size_t forgeries_rejected = 0;
};

struct SyncOptions {
    /// 0 selects the default of t + 2.
    std::size_t round_budget = 0;
    bool keep_message_log = true;
    std::uint64_t seed = 0;
};

namespace detail {

inline void validate_controlled(const SystemConfig& cfg, std::vector<ProcessId> ids) {
    if (ids.size() > cfg.t) throw std::invalid_argument("adversary controls more than t processes");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::invalid_argument("adversary controls a process twice");
    for (auto p : ids)
        if (p.index >= cfg.n) throw std::invalid_argument("adversary controls an unknown process");
}

}  // namespace detail

/// Runs `protocol` in lock-step rounds until every correct process has decided
/// or the round budget is spent. The record is a function of the inputs only.
template <SyncProtocol P>
SyncRunRecord run_sync(const P& protocol, Adversary& adversary, const SystemConfig& cfg,
                       std::span<const Value> initial_values, const SyncOptions& options = {}) {
    if (auto err = validate_config(cfg)) throw std::invalid_argument(*err);
    if (initial_values.size() != cfg.n) throw std::invalid_argument("one initial value per process required");
    for (const auto& v : initial_values)
        if (!v.is_domain()) throw std::invalid_argument("initial values must be domain values");

    const std::size_t n = cfg.n;
    auto controlled = adversary.controlled();
    detail::validate_controlled(cfg, controlled);
    std::sort(controlled.begin(), controlled.end());

    SyncRunRecord rec;
    rec.cfg = cfg;
    rec.seed = options.seed;
    rec.initial_values.assign(initial_values.begin(), initial_values.end());
    rec.faulty.assign(n, false);
    for (auto p : controlled) rec.faulty[p.index] = true;

    SignatureLog log;
    std::vector<SigningCapability> caps;
    caps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) caps.push_back(log.mint(ProcessId{i}));

    // Byzantine processes also get an instance of the correct code: it follows
    // their real inbox and tells the adversary what honest behaviour would be.
    std::vector<typename P::Process> procs;
    procs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) procs.push_back(protocol.make(ProcessId{i}, cfg, initial_values[i], caps[i]));

    const std::size_t budget = options.round_budget ? options.round_budget : cfg.t + 2;
    std::vector<std::vector<RoundMessage>> inboxes(n), honest(n);
    std::vector<std::optional<std::size_t>> decided_at(n);

    auto all_correct_decided = [&] {
        for (std::size_t i = 0; i < n; ++i)
            if (!rec.faulty[i] && !decided_at[i]) return false;
        return true;
    };

    for (std::size_t r = 1; r <= budget; ++r) {
        std::map<std::tuple<std::size_t, std::size_t, std::size_t>, RoundMessage> slots;
        auto post = [&](RoundMessage m) {
            m.round = r;
            auto key = std::make_tuple(m.from.index, m.to.index, m.instance);
            slots.insert_or_assign(key, std::move(m));
        };

        for (std::size_t i = 0; i < n; ++i) {
            auto out = procs[i].emit(r);
            for (auto& m : out) {
                m.from = ProcessId{i};
                m.round = r;
            }
            if (rec.faulty[i]) {
                honest[i] = std::move(out);
            } else {
                for (auto& m : out)
                    if (m.to.index < n) post(std::move(m));
            }
        }

        if (!controlled.empty()) {
            RoundContext ctx(r, cfg, controlled, caps, inboxes, honest, initial_values);
            for (auto& m : adversary.on_round(ctx)) {
                if (m.from.index >= n || !rec.faulty[m.from.index] || m.to.index >= n) {
                    ++rec.forgeries_rejected;
                    continue;
                }
                bool authentic = true;
                for_each_chain(m.body, [&](const SignedChain& c) { authentic = authentic && log.vouches_for(c); });
                if (!authentic) {
                    ++rec.forgeries_rejected;
                    continue;
                }
                post(std::move(m));
            }
        }

        for (auto& box : inboxes) box.clear();
        std::vector<RoundMessage> delivered;
        delivered.reserve(slots.size());
        for (auto& [key, m] : slots) delivered.push_back(std::move(m));
        std::stable_sort(delivered.begin(), delivered.end(), [](const RoundMessage& a, const RoundMessage& b) {
            return std::tie(a.to, a.from, a.instance) < std::tie(b.to, b.from, b.instance);
        });
        for (const auto& m : delivered) inboxes[m.to.index].push_back(m);

        for (std::size_t i = 0; i < n; ++i) {
            procs[i].absorb(r, inboxes[i]);
            if (!decided_at[i] && procs[i].decision()) decided_at[i] = r;
        }
        if (options.keep_message_log) rec.message_log.push_back(std::move(delivered));
        rec.rounds_executed = r;
        if (all_correct_decided()) break;
    }

    rec.budget_exhausted = !all_correct_decided();
    rec.views.resize(n);
    std::map<ProcessId, TrbTrace> traces;
    for (std::size_t i = 0; i < n; ++i) {
        if (rec.faulty[i]) continue;
        rec.views[i] = procs[i].view();
        for (const auto& d : procs[i].deliveries()) {
            auto [it, fresh] = traces.try_emplace(d.sender, TrbTrace{d.sender, std::vector<std::optional<Value>>(n)});
            it->second.delivered[i] = d.value;
        }
        if (auto d = procs[i].decision()) rec.decisions.push_back({ProcessId{i}, *d, *decided_at[i], true});
    }
    for (auto& [sender, trace] : traces) rec.trb.push_back(std::move(trace));
    rec.originated.resize(n);
    for (std::size_t i = 0; i < n; ++i) rec.originated[i] = log.originated_by(ProcessId{i});
    return rec;
}

}  // namespace ksa
