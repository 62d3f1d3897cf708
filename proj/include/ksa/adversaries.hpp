#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "ksa/authsig.hpp"
#include "ksa/core.hpp"
#include "ksa/sync_engine.hpp"

namespace ksa {

namespace detail {

inline std::vector<ProcessId> sorted_unique(std::vector<ProcessId> ids) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::invalid_argument("adversary ids overlap");
    return ids;
}

inline bool distinct_signers(const SignedChain& c) {
    auto s = c.signers();
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
}

inline std::size_t instance_slot(const RoundContext& ctx, ProcessId sender) {
    return ctx.config().protocol == Protocol::TwoRound ? 0 : sender.index;
}

/// Everything the coalition has seen or signed so far.
class ChainPool {
public:
    void absorb(const RoundContext& ctx) {
        for (auto b : ctx.controlled())
            for (const auto& m : ctx.inbox(b)) for_each_chain(m.body, [&](const SignedChain& c) { add(c); });
    }

    void add(const SignedChain& c) {
        if (seen_.insert(c).second) chains_.push_back(c);
    }

    const std::vector<SignedChain>& chains() const { return chains_; }

    std::vector<const SignedChain*> originating(ProcessId origin, std::optional<Value> payload = std::nullopt) const {
        std::vector<const SignedChain*> out;
        for (const auto& c : chains_)
            if (c.origin() == origin && (!payload || c.payload() == *payload)) out.push_back(&c);
        return out;
    }

private:
    std::set<SignedChain> seen_;
    std::vector<SignedChain> chains_;
};

/// The most valid chain for `payload` in the TRB instance of `sender` that the
/// coalition can legally produce: starts from a known chain (or a fresh
/// signature when the sender is controlled) and appends coalition signatures,
/// `from` last, until it has at least `min_length` signers.
inline std::optional<SignedChain> build_chain(const RoundContext& ctx, ChainPool& pool, ProcessId sender, Value payload,
                                              ProcessId from, std::size_t min_length) {
    std::vector<SignedChain> candidates;
    for (const auto* c : pool.originating(sender, payload))
        if (distinct_signers(*c)) candidates.push_back(*c);
    if (ctx.controls(sender)) {
        auto fresh = ctx.capability(sender).sign(payload);
        pool.add(fresh);
        candidates.push_back(std::move(fresh));
    }
    if (candidates.empty()) return std::nullopt;

    auto missing_of = [&](const SignedChain& c) {
        std::vector<ProcessId> missing;
        for (auto p : ctx.controlled())
            if (p != from && !c.signed_by(p)) missing.push_back(p);
        if (!c.signed_by(from)) missing.push_back(from);
        return missing;
    };
    const SignedChain* best = nullptr;
    std::size_t best_reach = 0;
    for (const auto& c : candidates) {
        const std::size_t reach = c.length() + missing_of(c).size();
        if (!best || reach > best_reach || (reach == best_reach && c.length() < best->length())) {
            best = &c;
            best_reach = reach;
        }
    }

    SignedChain chain = *best;
    const auto missing = missing_of(chain);
    std::size_t need = min_length > chain.length() ? min_length - chain.length() : 0;
    if (!chain.signed_by(from)) need = std::max<std::size_t>(need, 1);
    need = std::min(need, missing.size());
    for (std::size_t i = missing.size() - need; i < missing.size(); ++i) {
        chain = ctx.capability(missing[i]).extend(chain);
        pool.add(chain);
    }
    return chain;
}

}  // namespace detail

/// Never sends anything.
class SilentAdversary final : public Adversary {
public:
    explicit SilentAdversary(std::vector<ProcessId> ids) : ids_(detail::sorted_unique(std::move(ids))) {}
    std::vector<ProcessId> controlled() const override { return ids_; }
    std::vector<RoundMessage> on_round(const RoundContext&) override { return {}; }

private:
    std::vector<ProcessId> ids_;
};

/// Correct until `round`; in that round only recipients p0..p(prefix-1) still
/// hear from it; silent afterwards.
class CrashAdversary final : public Adversary {
public:
    CrashAdversary(std::vector<ProcessId> ids, std::size_t round, std::size_t delivered_prefix)
        : ids_(detail::sorted_unique(std::move(ids))), round_(round), prefix_(delivered_prefix) {
        if (round_ < 1) throw std::invalid_argument("crash round >= 1 required");
    }

    std::vector<ProcessId> controlled() const override { return ids_; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        std::vector<RoundMessage> out;
        if (ctx.round() > round_) return out;
        for (auto b : ids_)
            for (const auto& m : ctx.honest(b))
                if (ctx.round() < round_ || m.to.index < prefix_) out.push_back(m);
        return out;
    }

private:
    std::vector<ProcessId> ids_;
    std::size_t round_;
    std::size_t prefix_;
};

/// In round 1 signs `a` for the lower half of the recipients and `b` for the
/// upper half; otherwise behaves correctly.
class EquivocatorAdversary final : public Adversary {
public:
    EquivocatorAdversary(ProcessId id, Value a, Value b) : id_(id), a_(a), b_(b) {
        if (!a.is_domain() || !b.is_domain()) throw std::invalid_argument("equivocator needs domain values");
    }

    std::vector<ProcessId> controlled() const override { return {id_}; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        if (ctx.round() != 1) {
            auto h = ctx.honest(id_);
            return {h.begin(), h.end()};
        }
        const auto& cap = ctx.capability(id_);
        const auto ca = cap.sign(a_), cb = cap.sign(b_);
        const std::size_t n = ctx.config().n, slot = detail::instance_slot(ctx, id_);
        std::vector<RoundMessage> out;
        for (const auto& m : ctx.honest(id_))
            if (m.instance != slot) out.push_back(m);
        for (std::size_t j = 0; j < n; ++j)
            out.push_back({id_, ProcessId{j}, 1, slot, Chains{{j < (n + 1) / 2 ? ca : cb}}});
        return out;
    }

private:
    ProcessId id_;
    Value a_, b_;
};

/// Two-round only: behaves correctly in round 1, then reports `fabricated` as
/// its round-2 vector. Slots of coalition members are signed with their own
/// capabilities; slots of correct processes cannot be forged and fall back to
/// the honest report.
class ColumnLiarAdversary final : public Adversary {
public:
    ColumnLiarAdversary(ProcessId liar, std::vector<Value> fabricated, std::vector<ProcessId> accomplices = {})
        : liar_(liar), fabricated_(std::move(fabricated)) {
        accomplices.push_back(liar);
        ids_ = detail::sorted_unique(std::move(accomplices));
    }

    std::vector<ProcessId> controlled() const override { return ids_; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        std::vector<RoundMessage> out;
        for (auto b : ids_) {
            if (b == liar_ && ctx.round() == 2 && ctx.config().protocol == Protocol::TwoRound) continue;
            auto h = ctx.honest(b);
            out.insert(out.end(), h.begin(), h.end());
        }
        if (ctx.round() != 2 || ctx.config().protocol != Protocol::TwoRound) return out;
        if (fabricated_.size() != ctx.config().n) throw std::invalid_argument("fabricated vector has wrong arity");

        const auto honest = ctx.honest(liar_);
        const VectorMsg* honest_vec = honest.empty() ? nullptr : std::get_if<VectorMsg>(&honest.front().body);
        VectorMsg lie;
        for (std::size_t k = 0; k < fabricated_.size(); ++k) {
            const ProcessId owner{k};
            const Value& v = fabricated_[k];
            if (v.is_bottom()) {
                lie.slots.emplace_back();
            } else if (ctx.controls(owner) && v.is_domain()) {
                lie.slots.emplace_back(ctx.capability(owner).sign(v));
            } else {
                lie.slots.push_back(honest_vec ? honest_vec->slots[k] : std::nullopt);
            }
        }
        for (std::size_t j = 0; j < ctx.config().n; ++j) out.push_back({liar_, ProcessId{j}, 2, 0, lie});
        return out;
    }

private:
    ProcessId liar_;
    std::vector<Value> fabricated_;
    std::vector<ProcessId> ids_;
};

/// Seeded random Byzantine behaviour, within the forgery guard: per recipient
/// (and per TRB instance) it forwards honest traffic, stays silent, or sends
/// random content built from chains it saw plus its own signatures.
class RandomByzantine final : public Adversary {
public:
    RandomByzantine(std::vector<ProcessId> ids, std::uint64_t seed)
        : ids_(detail::sorted_unique(std::move(ids))), rng_(seed) {}

    std::vector<ProcessId> controlled() const override { return ids_; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        pool_.absorb(ctx);
        if (values_.empty()) init_values(ctx);
        std::vector<RoundMessage> out;
        const std::size_t n = ctx.config().n;
        const bool two_round = ctx.config().protocol == Protocol::TwoRound;
        const std::size_t slots = two_round ? 1 : n;
        for (auto b : ids_) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t q = 0; q < slots; ++q) {
                    const std::size_t roll = draw(100);
                    if (roll < 30) {
                        for (const auto& m : ctx.honest(b))
                            if (m.to.index == j && m.instance == q) out.push_back(m);
                    } else if (roll < 50) {
                        continue;
                    } else if (two_round) {
                        if (auto m = random_two_round(ctx, b, ProcessId{j})) out.push_back(std::move(*m));
                    } else {
                        if (auto m = random_trb(ctx, b, ProcessId{j}, ProcessId{q})) out.push_back(std::move(*m));
                    }
                }
            }
        }
        return out;
    }

private:
    std::size_t draw(std::size_t bound) { return static_cast<std::size_t>(rng_() % bound); }

    void init_values(const RoundContext& ctx) {
        std::set<Value> vs;
        std::int64_t top = 0;
        for (std::size_t i = 0; i < ctx.config().n; ++i) {
            const Value v = ctx.initial_value(ProcessId{i});
            vs.insert(v);
            top = std::max(top, v.token());
        }
        vs.insert(Value::domain(top + 1));
        values_.assign(vs.begin(), vs.end());
    }

    Value random_value() { return values_[draw(values_.size())]; }

    std::optional<RoundMessage> random_two_round(const RoundContext& ctx, ProcessId b, ProcessId to) {
        const std::size_t n = ctx.config().n;
        if (ctx.round() == 1) {
            auto c = ctx.capability(b).sign(random_value());
            pool_.add(c);
            return RoundMessage{b, to, 1, 0, Chains{{c}}};
        }
        if (ctx.round() != 2) return std::nullopt;
        VectorMsg vec;
        const std::size_t arity = draw(20) == 0 ? n - 1 : n;
        for (std::size_t k = 0; k < arity; ++k) {
            const ProcessId owner{k};
            std::vector<const SignedChain*> options;
            for (const auto* c : pool_.originating(owner))
                if (c->length() == 1) options.push_back(c);
            const std::size_t pick = draw(options.size() + (ctx.controls(owner) ? 2 : 1));
            if (pick < options.size()) {
                vec.slots.emplace_back(*options[pick]);
            } else if (pick == options.size() + 1) {
                auto c = ctx.capability(owner).sign(random_value());
                pool_.add(c);
                vec.slots.emplace_back(std::move(c));
            } else {
                vec.slots.emplace_back();
            }
        }
        return RoundMessage{b, to, 2, 0, std::move(vec)};
    }

    std::optional<RoundMessage> random_trb(const RoundContext& ctx, ProcessId b, ProcessId to, ProcessId sender) {
        Chains bundle;
        const std::size_t count = 1 + draw(2);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t kind = draw(10);
            if (kind == 0) {
                // a chain receivers must reject: duplicate signer or too short
                auto known = pool_.originating(sender);
                if (known.empty()) continue;
                const auto& base = *known[draw(known.size())];
                auto bad = base.signed_by(b) ? ctx.capability(b).extend(base) : base;
                pool_.add(bad);
                bundle.chains.push_back(std::move(bad));
                continue;
            }
            std::optional<Value> payload;
            if (ctx.controls(sender) && draw(2) == 0) {
                payload = random_value();
            } else {
                auto known = pool_.originating(sender);
                if (!known.empty()) payload = known[draw(known.size())]->payload();
            }
            if (!payload) continue;
            const std::size_t min_len = kind <= 2 ? draw(ctx.round() + 1) : ctx.round();
            if (auto c = detail::build_chain(ctx, pool_, sender, *payload, b, min_len)) bundle.chains.push_back(*c);
        }
        if (bundle.chains.empty()) return std::nullopt;
        return RoundMessage{b, to, ctx.round(), sender.index, std::move(bundle)};
    }

    std::vector<ProcessId> ids_;
    std::mt19937_64 rng_;
    detail::ChainPool pool_;
    std::vector<Value> values_;
};

/// Several strategies, each over its own ids, acting as one coalition.
class CompositeAdversary final : public Adversary {
public:
    explicit CompositeAdversary(std::vector<std::unique_ptr<Adversary>> parts) : parts_(std::move(parts)) {
        std::vector<ProcessId> all;
        for (const auto& p : parts_) {
            auto ids = p->controlled();
            all.insert(all.end(), ids.begin(), ids.end());
        }
        ids_ = detail::sorted_unique(std::move(all));
    }

    std::vector<ProcessId> controlled() const override { return ids_; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        std::vector<RoundMessage> out;
        for (auto& p : parts_) {
            auto part = p->on_round(ctx);
            out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        return out;
    }

private:
    std::vector<std::unique_ptr<Adversary>> parts_;
    std::vector<ProcessId> ids_;
};

/// Exhaustive-oracle template for a single TRB instance: in every round, every
/// coalition member picks, per correct recipient, silence or the most valid
/// chain it can build for one of `values`.
class TrbTemplateAdversary final : public Adversary {
public:
    /// choices[((round-1) * ids.size() + member) * correct.size() + recipient] in
    /// [0, values.size()]: 0 is silence, v sends a chain for values[v-1].
    /// `minimal_chains` sends the shortest chain instead of one long enough for the round.
    TrbTemplateAdversary(std::vector<ProcessId> ids, ProcessId sender, std::vector<Value> values,
                         std::vector<std::uint8_t> choices, bool minimal_chains = false)
        : ids_(detail::sorted_unique(std::move(ids))), sender_(sender), values_(std::move(values)),
          choices_(std::move(choices)), minimal_(minimal_chains) {}

    std::vector<ProcessId> controlled() const override { return ids_; }

    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        pool_.absorb(ctx);
        std::vector<ProcessId> correct;
        for (std::size_t i = 0; i < ctx.config().n; ++i)
            if (!ctx.controls(ProcessId{i})) correct.push_back(ProcessId{i});
        std::vector<RoundMessage> out;
        for (std::size_t bi = 0; bi < ids_.size(); ++bi) {
            for (std::size_t ci = 0; ci < correct.size(); ++ci) {
                const std::size_t idx = ((ctx.round() - 1) * ids_.size() + bi) * correct.size() + ci;
                const std::uint8_t choice = idx < choices_.size() ? choices_[idx] : 0;
                if (choice == 0) continue;
                auto c = detail::build_chain(ctx, pool_, sender_, values_.at(choice - 1), ids_[bi], minimal_ ? 1 : ctx.round());
                if (c) out.push_back({ids_[bi], correct[ci], ctx.round(), sender_.index, Chains{{*c}}});
            }
        }
        return out;
    }

private:
    std::vector<ProcessId> ids_;
    ProcessId sender_;
    std::vector<Value> values_;
    std::vector<std::uint8_t> choices_;
    bool minimal_;
    detail::ChainPool pool_;
};

}  // namespace ksa
