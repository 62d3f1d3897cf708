#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ksa/core.hpp"
#include "ksa/sync_engine.hpp"
#include "ksa/trb.hpp"

namespace ksa {

/// Phase-2 decision over the common vector L:
/// own value if it fills n - t slots, else the smallest domain value that does,
/// else Bottom. SenderFaulty is never decided.
inline Value decide_trb(std::span<const Value> l, Value own, std::size_t n, std::size_t t) {
    const std::size_t quorum = n - t;
    std::map<Value, std::size_t> counts;
    for (const auto& v : l)
        if (v.is_domain()) ++counts[v];
    if (own.is_domain() && counts[own] >= quorum) return own;
    for (const auto& [v, c] : counts)
        if (c >= quorum) return v;
    return Value::bottom();
}

/// k-set agreement for k = floor(n / (n - t)) over n lock-stepped TRB instances
/// (interactive consistency on L), t + 1 rounds.
struct TrbKsa {
    std::size_t extract_cap = 2;

    class Process {
    public:
        Process(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap,
                std::size_t extract_cap)
            : me_(me), cfg_(cfg), own_(initial), cap_(&cap), l_(cfg.n, Value::bottom()) {
            l_[me.index] = initial;
            instances_.reserve(cfg.n);
            for (std::size_t q = 0; q < cfg.n; ++q) {
                const ProcessId sender{q};
                instances_.push_back(trb_init(me, sender, sender == me ? std::optional<Value>(initial) : std::nullopt,
                                              cap, extract_cap));
            }
        }

        std::vector<RoundMessage> emit(std::size_t round) const {
            std::vector<RoundMessage> out;
            if (round > cfg_.t + 1) return out;
            for (const auto& inst : instances_) {
                if (inst.relay.empty()) continue;
                for (std::size_t j = 0; j < cfg_.n; ++j)
                    out.push_back({me_, ProcessId{j}, round, inst.sender.index, Chains{inst.relay}});
            }
            return out;
        }

        void absorb(std::size_t round, std::span<const RoundMessage> inbox) {
            if (round > cfg_.t + 1 || decision_) return;
            std::vector<std::vector<SignedChain>> per_instance(cfg_.n);
            for (const auto& m : inbox) {
                if (m.instance >= cfg_.n) continue;
                if (const auto* c = std::get_if<Chains>(&m.body))
                    per_instance[m.instance].insert(per_instance[m.instance].end(), c->chains.begin(),
                                                    c->chains.end());
            }
            for (std::size_t q = 0; q < cfg_.n; ++q) trb_step(instances_[q], round, per_instance[q], *cap_);
            if (round == cfg_.t + 1) {
                for (std::size_t q = 0; q < cfg_.n; ++q) l_[q] = trb_finalize(instances_[q]);
                decision_ = decide_trb(l_, own_, cfg_.n, cfg_.t);
            }
        }

        std::optional<Value> decision() const { return decision_; }
        ViewVector view() const { return l_; }

        std::vector<Delivery> deliveries() const {
            std::vector<Delivery> out;
            out.reserve(instances_.size());
            for (const auto& inst : instances_) out.push_back({inst.sender, inst.delivered});
            return out;
        }

        const TrbState& instance(ProcessId sender) const { return instances_.at(sender.index); }

    private:
        ProcessId me_;
        SystemConfig cfg_;
        Value own_;
        const SigningCapability* cap_;
        std::vector<TrbState> instances_;
        ViewVector l_;
        std::optional<Value> decision_;
    };

    Process make(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap) const {
        return Process(me, cfg, initial, cap, extract_cap);
    }
};

/// Phase 1 on its own: the L vector each correct process ends up with
/// (empty for faulty processes).
inline std::vector<ViewVector> run_phase1(const SystemConfig& cfg, std::span<const Value> initial_values,
                                          Adversary& adversary) {
    return run_sync(TrbKsa{}, adversary, cfg, initial_values, {.keep_message_log = false}).views;
}

}  // namespace ksa
