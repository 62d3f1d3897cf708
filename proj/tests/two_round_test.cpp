#include <gtest/gtest.h>

#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/two_round.hpp"

using namespace ksa;

namespace {

const Value a = Value::domain(0), b = Value::domain(1), bot = Value::bottom();

std::vector<Value> vals(std::initializer_list<std::int64_t> xs) {
    std::vector<Value> out;
    for (auto x : xs) out.push_back(Value::domain(x));
    return out;
}

RoundMessage round1(std::size_t from, std::size_t to, const SignedChain& c) {
    return {ProcessId{from}, ProcessId{to}, 1, 0, Chains{{c}}};
}

}  // namespace

TEST(TwoRoundProcess, RoundOneSendsOwnSignedValue) {
    auto cap = SigningCapability::detached(ProcessId{0});
    TwoRoundKsa::Process p(ProcessId{0}, {3, 1, Protocol::TwoRound}, Value::domain(9), cap);
    auto out = p.emit(1);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& m : out) {
        const auto& c = std::get<Chains>(m.body).chains;
        ASSERT_EQ(c.size(), 1u);
        EXPECT_EQ(c.front().payload(), Value::domain(9));
    }
}

TEST(TwoRoundProcess, RoundOneFillsOwnRow) {
    auto cap = SigningCapability::detached(ProcessId{0});
    TwoRoundKsa::Process p(ProcessId{0}, {4, 1, Protocol::TwoRound}, Value::domain(9), cap);
    p.round1_absorb(round1(2, 0, SigningCapability::detached(ProcessId{2}).sign(Value::domain(4))));
    EXPECT_EQ(p.matrix().at(0, 2), Value::domain(4));
    EXPECT_EQ(p.matrix().at(0, 3), bot);
    EXPECT_EQ(p.matrix().at(0, 0), Value::domain(9));
    // A chain signed by someone else does not count as p1's value.
    p.round1_absorb(round1(1, 0, SigningCapability::detached(ProcessId{2}).sign(Value::domain(5))));
    EXPECT_EQ(p.matrix().at(0, 1), bot);
}

TEST(TwoRoundProcess, RoundTwoStoresRowsAndIgnoresWrongArity) {
    const SystemConfig cfg{3, 1, Protocol::TwoRound};
    auto c0 = SigningCapability::detached(ProcessId{0});
    TwoRoundKsa::Process p(ProcessId{0}, cfg, Value::domain(9), c0);
    p.round1_absorb(round1(1, 0, SigningCapability::detached(ProcessId{1}).sign(Value::domain(4))));
    const auto row0 = p.emit(2).front();
    const auto& slots = std::get<VectorMsg>(row0.body).slots;
    ASSERT_EQ(slots.size(), 3u);
    EXPECT_EQ(slots[0]->payload(), Value::domain(9));
    EXPECT_EQ(slots[1]->payload(), Value::domain(4));
    EXPECT_FALSE(slots[2]);

    VectorMsg full{{SigningCapability::detached(ProcessId{0}).sign(Value::domain(9)),
                    SigningCapability::detached(ProcessId{1}).sign(Value::domain(4)),
                    SigningCapability::detached(ProcessId{2}).sign(Value::domain(7))}};
    p.round2_absorb({ProcessId{1}, ProcessId{0}, 2, 0, full});
    EXPECT_EQ(p.matrix().row(1), vals({9, 4, 7}));

    VectorMsg shorter{{SigningCapability::detached(ProcessId{0}).sign(Value::domain(1)), std::nullopt}};
    p.round2_absorb({ProcessId{2}, ProcessId{0}, 2, 0, shorter});
    EXPECT_EQ(p.matrix().row(2), (ViewVector{bot, bot, bot}));
}

TEST(FilterColumns, ConsistentColumnKeepsValue) {
    DecisionMatrix m(3);
    for (std::size_t r = 0; r < 3; ++r) m.at(r, 1) = b;
    m.at(0, 0) = a;
    EXPECT_EQ(filter_columns(m, ProcessId{0}), (ViewVector{a, b, bot}));
}

TEST(FilterColumns, ConflictingDomainValuesGiveBottom) {
    DecisionMatrix m(3);
    m.at(0, 0) = a;
    m.at(0, 1) = a;
    m.at(2, 1) = b;
    EXPECT_EQ(filter_columns(m, ProcessId{0})[1], bot);
}

TEST(FilterColumns, BottomInAnotherRowIsNoInformation) {
    DecisionMatrix m(3);
    m.at(0, 0) = b;
    m.at(0, 1) = a;
    m.at(2, 1) = bot;
    EXPECT_EQ(filter_columns(m, ProcessId{0})[1], a);
}

TEST(FilterColumns, OwnSlotIsOwnValue) {
    DecisionMatrix m(2);
    m.at(1, 1) = a;
    m.at(1, 1) = b;
    m.at(1, 0) = b;
    m.at(0, 1) = a;
    const auto v = filter_columns(m, ProcessId{1});
    EXPECT_EQ(v[1], b);
}

TEST(DecideTwoRound, Examples) {
    EXPECT_EQ(decide_two_round(ViewVector{a, a, b, b}, a, 4, 2), a);
    EXPECT_EQ(decide_two_round(ViewVector{a, bot, bot, bot}, a, 4, 2), bot);
    EXPECT_EQ(decide_two_round(ViewVector{b, b, b}, b, 3, 1), b);
}

TEST(TwoRoundRun, PartitionDecidesOwnGroupValue) {
    NoAdversary none;
    auto rec = run_sync(TwoRoundKsa{}, none, {4, 2, Protocol::TwoRound}, vals({0, 0, 1, 1}));
    EXPECT_EQ(rec.decision_of(ProcessId{0}), a);
    EXPECT_EQ(rec.decision_of(ProcessId{3}), b);
    EXPECT_EQ(rec.views[0], vals({0, 0, 1, 1}));
}

TEST(TwoRoundRun, EquivocatorColumnIsBottomEverywhere) {
    EquivocatorAdversary adv(ProcessId{3}, a, b);
    auto rec = run_sync(TwoRoundKsa{}, adv, {4, 1, Protocol::TwoRound}, vals({0, 0, 1, 1}));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rec.views[i][3], bot) << "p" << i;
}

TEST(TwoRoundRun, ColumnLiarIsDetected) {
    // p3 reports a fabricated value for its accomplice p2, whose real value reached
    // the correct processes: the column holds two domain values.
    ColumnLiarAdversary adv(ProcessId{3}, {Value::bottom(), Value::bottom(), Value::domain(5), Value::bottom(), Value::bottom()},
                            {ProcessId{2}});
    auto rec = run_sync(TwoRoundKsa{}, adv, {5, 2, Protocol::TwoRound}, vals({0, 0, 1, 1, 0}));
    for (std::size_t i : {0u, 1u, 4u}) EXPECT_EQ(rec.views[i][2], bot) << "p" << i;
    EXPECT_EQ(rec.forgeries_rejected, 0u);
}

TEST(TwoRoundRun, DecisionIsOwnValueOrBottom) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        RandomByzantine adv({ProcessId{0}, ProcessId{2}}, seed);
        const auto init = vals({0, 1, 0, 1, 2});
        auto rec = run_sync(TwoRoundKsa{}, adv, {5, 2, Protocol::TwoRound}, init);
        for (const auto& d : rec.decisions)
            EXPECT_TRUE(d.decided == init[d.pid.index] || d.decided.is_bottom()) << "seed " << seed;
        EXPECT_EQ(rec.rounds_executed, 2u);
    }
}

TEST(TwoRoundRun, ValidityForEveryT) {
    for (std::size_t n = 2; n <= 6; ++n)
        for (std::size_t t = 0; t < n; ++t)
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                std::vector<ProcessId> byz;
                for (std::size_t i = n - t; i < n; ++i) byz.push_back(ProcessId{i});
                RandomByzantine adv(byz, seed);
                auto rec = run_sync(TwoRoundKsa{}, adv, {n, t, Protocol::TwoRound}, std::vector<Value>(n, b));
                EXPECT_TRUE(check_validity(rec).pass) << n << "," << t << " seed " << seed;
            }
}
