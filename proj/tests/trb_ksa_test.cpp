#include <gtest/gtest.h>

#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/trb_ksa.hpp"

using namespace ksa;

namespace {

const Value a = Value::domain(0), b = Value::domain(1), c = Value::domain(2), sf = Value::sender_faulty(),
            bot = Value::bottom();

std::vector<Value> vals(std::initializer_list<std::int64_t> xs) {
    std::vector<Value> out;
    for (auto x : xs) out.push_back(Value::domain(x));
    return out;
}

}  // namespace

TEST(RunPhase1, AllCorrectVectorsHoldEveryInput) {
    NoAdversary none;
    const auto init = vals({1, 2, 3, 4});
    const auto views = run_phase1({4, 1, Protocol::TrbOptimal}, init, none);
    for (const auto& l : views) EXPECT_EQ(l, init);
}

TEST(RunPhase1, SilentSenderSlotIsSenderFaulty) {
    SilentAdversary silent({ProcessId{2}});
    const auto views = run_phase1({4, 1, Protocol::TrbOptimal}, vals({1, 2, 3, 4}), silent);
    for (std::size_t i : {0u, 1u, 3u}) EXPECT_EQ(views[i][2], sf);
    EXPECT_TRUE(views[2].empty());
}

TEST(RunPhase1, EquivocatingSenderSlotIsCommon) {
    for (std::size_t q = 0; q < 3; ++q) {
        EquivocatorAdversary adv(ProcessId{q}, a, b);
        const auto views = run_phase1({3, 1, Protocol::TrbOptimal}, vals({0, 1, 0}), adv);
        std::set<Value> slot;
        for (std::size_t i = 0; i < 3; ++i)
            if (i != q) slot.insert(views[i][q]);
        ASSERT_EQ(slot.size(), 1u);
        EXPECT_TRUE(*slot.begin() == a || *slot.begin() == b || *slot.begin() == sf);
    }
}

TEST(DecideTrb, Examples) {
    EXPECT_EQ(decide_trb(ViewVector{a, a, b, b}, a, 4, 2), a);
    EXPECT_EQ(decide_trb(ViewVector{a, a, a, sf}, b, 4, 1), a);
    for (auto own : {a, b, c, Value::domain(3)}) EXPECT_EQ(decide_trb(ViewVector{a, b, c, sf}, own, 4, 1), bot);
}

TEST(DecideTrb, SmallestQualifyingValueWins) {
    EXPECT_EQ(decide_trb(ViewVector{b, b, a, a}, c, 4, 2), a);
    EXPECT_EQ(decide_trb(ViewVector{c, c, b, b}, a, 4, 2), b);
}

TEST(DecideTrb, SenderFaultyIsNeverDecided) {
    EXPECT_EQ(decide_trb(ViewVector{sf, sf, sf, a}, a, 4, 1), bot);
    EXPECT_EQ(decide_trb(ViewVector{sf, sf, sf, a}, sf, 4, 1), bot);
}

TEST(TrbKsaRun, TakesTPlusOneRoundsAndAgreesOnL) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomByzantine adv({ProcessId{1}, ProcessId{3}}, seed);
        auto rec = run_sync(TrbKsa{}, adv, {5, 2, Protocol::TrbOptimal}, vals({0, 1, 1, 0, 1}));
        EXPECT_EQ(rec.rounds_executed, 3u);
        EXPECT_TRUE(check_vector_equality(rec).pass) << "seed " << seed;
        EXPECT_TRUE(check_no_mixed_bottom(rec).pass) << "seed " << seed;
        // L holds the correct inputs in their own slots.
        for (std::size_t i : {0u, 2u, 4u}) EXPECT_EQ(rec.views[0][i], rec.initial_values[i]);
    }
}

TEST(TrbKsaRun, ConsensusWhenMajorityIsCorrect) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomByzantine adv({ProcessId{0}, ProcessId{4}}, seed);
        auto rec = run_sync(TrbKsa{}, adv, {5, 2, Protocol::TrbOptimal}, vals({0, 1, 2, 1, 0}));
        EXPECT_EQ(decided_values(rec).size(), 1u) << "seed " << seed;
    }
}

TEST(TrbKsaRun, PartitionDecidesBothValues) {
    NoAdversary none;
    auto rec = run_sync(TrbKsa{}, none, {4, 2, Protocol::TrbOptimal}, vals({0, 0, 1, 1}));
    EXPECT_EQ(decided_values(rec), (std::vector<Value>{a, b}));
}

TEST(TrbKsaRun, UncappedExtractionGivesSameOutcome) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SystemConfig cfg{4, 2, Protocol::TrbOptimal};
        const auto init = vals({0, 1, 2, 0});
        RandomByzantine a1({ProcessId{0}, ProcessId{2}}, seed), a2({ProcessId{0}, ProcessId{2}}, seed);
        auto capped = run_sync(TrbKsa{}, a1, cfg, init);
        auto uncapped = run_sync(TrbKsa{SIZE_MAX}, a2, cfg, init);
        EXPECT_EQ(capped.views, uncapped.views) << "seed " << seed;
        EXPECT_EQ(capped.decisions, uncapped.decisions) << "seed " << seed;
    }
}
