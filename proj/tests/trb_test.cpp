#include <gtest/gtest.h>

#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/trb.hpp"

using namespace ksa;

namespace {

const ProcessId p0{0}, p1{1}, p2{2};
const Value a = Value::domain(0), b = Value::domain(1);

std::vector<Value> same(std::size_t n, Value v) { return std::vector<Value>(n, v); }

/// Sends chains chosen per round; honest otherwise never.
class OneShot final : public Adversary {
public:
    OneShot(ProcessId sender, std::vector<ProcessId> recipients, Value v, std::size_t round)
        : sender_(sender), to_(std::move(recipients)), v_(v), round_(round) {}
    std::vector<ProcessId> controlled() const override { return {sender_}; }
    std::vector<RoundMessage> on_round(const RoundContext& ctx) override {
        std::vector<RoundMessage> out;
        if (ctx.round() != round_) return out;
        for (auto to : to_) out.push_back({sender_, to, ctx.round(), sender_.index, Chains{{ctx.capability(sender_).sign(v_)}}});
        return out;
    }

private:
    ProcessId sender_;
    std::vector<ProcessId> to_;
    Value v_;
    std::size_t round_;
};

}  // namespace

TEST(TrbInit, SenderStartsWithItsValue) {
    auto cap = SigningCapability::detached(p0);
    auto s = trb_init(p0, p0, Value::domain(4), cap);
    EXPECT_EQ(s.extracted, std::set<Value>{Value::domain(4)});
    ASSERT_EQ(trb_outbox(s).size(), 1u);
    EXPECT_EQ(trb_outbox(s).front().signers(), std::vector<ProcessId>{p0});
}

TEST(TrbInit, NonSenderStartsEmpty) {
    auto cap = SigningCapability::detached(p1);
    auto s = trb_init(p1, p0, std::nullopt, cap);
    EXPECT_TRUE(s.extracted.empty());
    EXPECT_TRUE(trb_outbox(s).empty());
    EXPECT_THROW(trb_init(p1, p0, Value::domain(4), cap), std::invalid_argument);
    EXPECT_THROW(trb_init(p1, p0, std::nullopt, SigningCapability::detached(p2)), std::invalid_argument);
}

TEST(TrbStep, ExtractsAndRelaysValidChain) {
    auto c0 = SigningCapability::detached(p0), c1 = SigningCapability::detached(p1);
    auto s = trb_init(p1, p0, std::nullopt, c1);
    const std::vector<SignedChain> inbox{c0.sign(a)};
    auto out = trb_step(s, 1, inbox, c1);
    EXPECT_EQ(s.extracted, std::set<Value>{a});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out.front().signers(), (std::vector<ProcessId>{p0, p1}));
    // Same value again: nothing new to relay.
    const std::vector<SignedChain> again{c1.extend(c0.sign(a))};
    EXPECT_TRUE(trb_step(s, 2, again, c1).empty());
}

TEST(TrbStep, IgnoresInvalidChains) {
    auto c0 = SigningCapability::detached(p0), c1 = SigningCapability::detached(p1);
    auto s = trb_init(p1, p0, std::nullopt, c1);
    const std::vector<SignedChain> dup{c0.extend(c0.sign(a))};
    EXPECT_TRUE(trb_step(s, 1, dup, c1).empty());
    EXPECT_TRUE(s.extracted.empty());
    const std::vector<SignedChain> short_chain{c0.sign(a)};
    EXPECT_TRUE(trb_step(s, 2, short_chain, c1).empty());
    EXPECT_TRUE(s.extracted.empty());
}

TEST(TrbStep, CapStopsExtractionAtTwo) {
    auto c0 = SigningCapability::detached(p0), c1 = SigningCapability::detached(p1);
    auto s = trb_init(p1, p0, std::nullopt, c1);
    const std::vector<SignedChain> inbox{c0.sign(a), c0.sign(b), c0.sign(Value::domain(2))};
    trb_step(s, 1, inbox, c1);
    EXPECT_EQ(s.extracted.size(), 2u);
    EXPECT_EQ(s.seen.size(), 3u);
    EXPECT_THROW(trb_init(p1, p0, std::nullopt, c1, 1), std::invalid_argument);
}

TEST(TrbFinalize, DeliversUniqueValueOrSenderFaulty) {
    auto c1 = SigningCapability::detached(p1);
    auto s = trb_init(p1, p0, std::nullopt, c1);
    EXPECT_EQ(trb_finalize(s), Value::sender_faulty());
    EXPECT_THROW(trb_finalize(s), std::logic_error);

    auto one = trb_init(p1, p0, std::nullopt, c1);
    one.extracted = {a};
    EXPECT_EQ(trb_finalize(one), a);

    auto two = trb_init(p1, p0, std::nullopt, c1);
    two.extracted = {a, b};
    EXPECT_EQ(trb_finalize(two), Value::sender_faulty());
}

TEST(TrbBroadcastRun, CorrectSenderReachesEveryoneInRoundOne) {
    NoAdversary none;
    const SystemConfig cfg{3, 1, Protocol::TrbOptimal};
    auto rec = run_sync(TrbBroadcast{p0}, none, cfg, same(3, Value::domain(6)), {1, true, 0});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rec.trb.front().delivered[i], std::nullopt);

    auto full = run_sync(TrbBroadcast{p0}, none, cfg, same(3, Value::domain(6)));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(full.trb.front().delivered[i], Value::domain(6));
    for (auto v : check_trb(full, p0)) EXPECT_TRUE(v.pass) << v.property << " " << v.evidence;
}

TEST(TrbBroadcastRun, LateChainIsRelayedInTime) {
    // Faulty sender reaches p1 alone in round 1; p1's relay reaches p2 in round 2 = t + 1.
    OneShot adv(p0, {p1}, a, 1);
    auto rec = run_sync(TrbBroadcast{p0}, adv, {3, 1, Protocol::TrbOptimal}, same(3, a));
    EXPECT_EQ(rec.trb.front().delivered[1], a);
    EXPECT_EQ(rec.trb.front().delivered[2], a);
    bool relayed = false;
    for (const auto& m : rec.message_log[1])
        if (m.from == p1 && m.to == p2)
            for_each_chain(m.body, [&](const SignedChain& c) { relayed = relayed || c.signers() == std::vector{p0, p1}; });
    EXPECT_TRUE(relayed);
}

TEST(TrbBroadcastRun, LastRoundInjectionIsRejected) {
    OneShot adv(p0, {p1}, a, 2);
    auto rec = run_sync(TrbBroadcast{p0}, adv, {3, 1, Protocol::TrbOptimal}, same(3, a));
    EXPECT_EQ(rec.trb.front().delivered[1], Value::sender_faulty());
    EXPECT_EQ(rec.trb.front().delivered[2], Value::sender_faulty());

    // Without the length rule the same injection splits the deliveries.
    OneShot again(p0, {p1}, a, 2);
    TrbBroadcast lax{p0};
    lax.length_rule = false;
    auto broken = run_sync(lax, again, {3, 1, Protocol::TrbOptimal}, same(3, a));
    EXPECT_EQ(broken.trb.front().delivered[1], a);
    EXPECT_EQ(broken.trb.front().delivered[2], Value::sender_faulty());
    EXPECT_FALSE(check_trb(broken, p0)[3].pass);
}

TEST(TrbBroadcastRun, SilentSenderYieldsSenderFaulty) {
    SilentAdversary adv({p0});
    auto rec = run_sync(TrbBroadcast{p0}, adv, {4, 2, Protocol::TrbOptimal}, same(4, a));
    for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(rec.trb.front().delivered[i], Value::sender_faulty());
    EXPECT_EQ(rec.rounds_executed, 3u);
}

TEST(TrbBroadcastRun, ExtractionClosure) {
    // Once a correct process extracts m in round i <= t, all correct have it by i + 1.
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomByzantine adv({p0, ProcessId{3}}, seed);
        const SystemConfig cfg{5, 2, Protocol::TrbOptimal};
        auto rec = run_sync(TrbBroadcast{p0}, adv, cfg, same(5, a));
        // first round in which each correct process received a valid chain for each payload
        std::map<Value, std::vector<std::size_t>> first;
        for (std::size_t r = 0; r < rec.message_log.size(); ++r)
            for (const auto& m : rec.message_log[r]) {
                if (rec.faulty[m.to.index]) continue;
                for_each_chain(m.body, [&](const SignedChain& c) {
                    if (!is_valid(c, p0, r + 1)) return;
                    auto& f = first.try_emplace(c.payload(), std::vector<std::size_t>(5, 0)).first->second;
                    if (!f[m.to.index]) f[m.to.index] = r + 1;
                });
            }
        for (const auto& [v, rounds] : first) {
            std::size_t earliest = 0;
            for (std::size_t i = 0; i < 5; ++i)
                if (!rec.faulty[i] && rounds[i] && (!earliest || rounds[i] < earliest)) earliest = rounds[i];
            if (!earliest || earliest > cfg.t) continue;
            for (std::size_t i = 0; i < 5; ++i)
                if (!rec.faulty[i]) {
                    EXPECT_TRUE(rounds[i] && rounds[i] <= earliest + 1) << "seed " << seed;
                }
        }
    }
}
