#pragma once

#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "ksa/authsig.hpp"
#include "ksa/core.hpp"
#include "ksa/sync_engine.hpp"

namespace ksa {

/// Authenticated terminating reliable broadcast, one instance as seen by one process.
///
/// Each round the process forwards, with its own signature, every chain through
/// which it extracted a new value in the previous round. After round t+1 it
/// delivers the extracted value if exactly one was extracted, SenderFaulty otherwise.
struct TrbState {
    ProcessId me;
    ProcessId sender;
    std::set<Value> extracted;
    /// Chains to send next round, already carrying `me`'s signature.
    std::vector<SignedChain> relay;
    std::optional<Value> delivered;
    /// Every payload seen in a valid chain, uncapped (diagnostics only).
    std::set<Value> seen;
    /// Extraction stops growing at this many values; two already force SenderFaulty.
    std::size_t extract_cap = 2;
    /// Reject chains with fewer signers than the receive round. Off only to show
    /// what breaks without it.
    bool length_rule = true;
};

inline TrbState trb_init(ProcessId me, ProcessId sender, std::optional<Value> v, const SigningCapability& cap,
                         std::size_t extract_cap = 2) {
    if (v.has_value() != (me == sender)) throw std::invalid_argument("only the designated sender broadcasts a value");
    if (cap.owner() != me) throw std::invalid_argument("capability does not belong to this process");
    if (extract_cap < 2) throw std::invalid_argument("extract_cap >= 2 required");
    TrbState s{me, sender, {}, {}, std::nullopt, {}, extract_cap};
    if (v) {
        s.extracted.insert(*v);
        s.seen.insert(*v);
        s.relay.push_back(cap.sign(*v));
    }
    return s;
}

/// Chains this process sends to everyone in the coming round.
inline const std::vector<SignedChain>& trb_outbox(const TrbState& s) { return s.relay; }

/// Absorbs the chains received in round `round` and returns the outbox for round + 1.
inline std::vector<SignedChain> trb_step(TrbState& s, std::size_t round, std::span<const SignedChain> inbox,
                                         const SigningCapability& cap) {
    if (s.delivered) throw std::logic_error("TRB instance already delivered");
    s.relay.clear();
    for (const auto& c : inbox) {
        if (!c.payload().is_domain() || !is_valid(c, s.sender, s.length_rule ? round : 1)) continue;
        s.seen.insert(c.payload());
        if (s.extracted.contains(c.payload()) || s.extracted.size() >= s.extract_cap) continue;
        s.extracted.insert(c.payload());
        s.relay.push_back(cap.extend(c));
    }
    return s.relay;
}

/// Delivers once; must follow round t+1.
inline Value trb_finalize(TrbState& s) {
    if (s.delivered) throw std::logic_error("TRB instance delivers at most once");
    s.delivered = s.extracted.size() == 1 ? *s.extracted.begin() : Value::sender_faulty();
    s.relay.clear();
    return *s.delivered;
}

/// A single TRB instance run on the synchronous engine; the decision of each
/// process is its delivered value.
struct TrbBroadcast {
    ProcessId sender{0};
    std::size_t extract_cap = 2;
    bool length_rule = true;

    class Process {
    public:
        Process(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap,
                ProcessId sender, std::size_t extract_cap, bool length_rule = true)
            : cfg_(cfg), cap_(&cap),
              state_(trb_init(me, sender, me == sender ? std::optional<Value>(initial) : std::nullopt, cap,
                              extract_cap)) {
            state_.length_rule = length_rule;
        }

        std::vector<RoundMessage> emit(std::size_t round) const {
            std::vector<RoundMessage> out;
            if (round > cfg_.t + 1 || state_.relay.empty()) return out;
            for (std::size_t j = 0; j < cfg_.n; ++j)
                out.push_back({state_.me, ProcessId{j}, round, state_.sender.index, Chains{state_.relay}});
            return out;
        }

        void absorb(std::size_t round, std::span<const RoundMessage> inbox) {
            if (round > cfg_.t + 1 || state_.delivered) return;
            std::vector<SignedChain> chains;
            for (const auto& m : inbox) {
                if (m.instance != state_.sender.index) continue;
                if (const auto* c = std::get_if<Chains>(&m.body))
                    chains.insert(chains.end(), c->chains.begin(), c->chains.end());
            }
            trb_step(state_, round, chains, *cap_);
            if (round == cfg_.t + 1) trb_finalize(state_);
        }

        std::optional<Value> decision() const { return state_.delivered; }
        ViewVector view() const { return {}; }
        std::vector<Delivery> deliveries() const { return {{state_.sender, state_.delivered}}; }
        const TrbState& state() const { return state_; }

    private:
        SystemConfig cfg_;
        const SigningCapability* cap_;
        TrbState state_;
    };

    Process make(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap) const {
        return Process(me, cfg, initial, cap, sender, extract_cap, length_rule);
    }
};

}  // namespace ksa
