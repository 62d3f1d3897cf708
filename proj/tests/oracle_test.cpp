#include <gtest/gtest.h>

#include "ksa/oracle.hpp"

using namespace ksa;

namespace {

std::vector<Value> vals(std::initializer_list<std::int64_t> xs) {
    std::vector<Value> out;
    for (auto x : xs) out.push_back(Value::domain(x));
    return out;
}

}  // namespace

TEST(OracleTrb, SmallInstancesHoldAllProperties) {
    for (auto [n, t] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {3, 2}, {4, 1}}) {
        const auto s = oracle_trb(n, t);
        EXPECT_TRUE(s.passed()) << n << "," << t << " " << (s.samples.empty() ? "" : s.samples.front());
        EXPECT_GT(s.runs, 0u);
        EXPECT_EQ(s.max_distinct, 1u);
    }
}

TEST(OracleTrb, RunCountMatchesSpace) {
    // sender faulty: 3^((t+1) f (n-f)) ; sender correct: 2^((t+1) f (n-f))
    const auto s = oracle_trb(3, 1);
    EXPECT_EQ(s.runs, 81u + 16u);
    EXPECT_DOUBLE_EQ(s.estimate, 97.0);
}

TEST(OracleTrb, LengthRuleIsNecessary) {
    OracleOptions lax;
    lax.length_rule = false;
    lax.minimal_chains = true;
    const auto broken = oracle_trb(3, 1, lax);
    EXPECT_GT(broken.violations, 0u);
    EXPECT_GT(broken.failures_by_property.count("trb.agreement"), 0u);
    EXPECT_FALSE(broken.samples.empty());

    OracleOptions strict;
    strict.minimal_chains = true;
    EXPECT_TRUE(oracle_trb(3, 1, strict).passed());
}

TEST(OracleTrb, CapOfTwoMatchesUnboundedExtraction) {
    // Three chain values: compare deliveries run by run.
    const std::vector<Value> values = vals({0, 1, 2});
    const SystemConfig cfg{3, 1, Protocol::TrbOptimal};
    const ProcessId sender{0};
    const std::vector<ProcessId> faulty{sender};
    const std::size_t digits = 2 * 1 * 2;
    std::vector<std::uint8_t> choice(digits, 0);
    std::size_t compared = 0;
    while (true) {
        TrbTemplateAdversary a1(faulty, sender, values, choice), a2(faulty, sender, values, choice);
        const auto capped = run_sync(TrbBroadcast{sender, 2}, a1, cfg, std::vector<Value>(3, values[0]));
        const auto full = run_sync(TrbBroadcast{sender, SIZE_MAX}, a2, cfg, std::vector<Value>(3, values[0]));
        EXPECT_EQ(capped.trb.front().delivered, full.trb.front().delivered);
        ++compared;
        std::size_t i = 0;
        while (i < digits && ++choice[i] == values.size() + 1) choice[i++] = 0;
        if (i == digits) break;
    }
    EXPECT_EQ(compared, 256u);

    OracleOptions three;
    three.trb_values = values;
    EXPECT_TRUE(oracle_trb(3, 1, three).passed());
}

TEST(OracleTrb, RefusesOversizedOrInvalid) {
    OracleOptions small;
    small.bound = 1000;
    const auto s = oracle_trb(4, 2, small);
    EXPECT_TRUE(s.refused);
    EXPECT_GT(s.estimate, 1000.0);
    EXPECT_EQ(s.runs, 0u);
    EXPECT_TRUE(oracle_trb(3, 0).refused);
    EXPECT_TRUE(oracle_trb(5, 1).refused);
}

TEST(OracleSyncKsa, TrbOptimalPartitionInputs) {
    OracleOptions o;
    o.inputs = {vals({0, 0, 1, 1})};
    const auto s = oracle_sync_ksa(Protocol::TrbOptimal, 4, 2, o);
    EXPECT_TRUE(s.passed()) << (s.samples.empty() ? "" : s.samples.front());
    EXPECT_EQ(s.max_distinct, 2u);
}

TEST(OracleSyncKsa, TwoRoundSmall) {
    const auto s = oracle_sync_ksa(Protocol::TwoRound, 3, 1);
    EXPECT_TRUE(s.passed()) << (s.samples.empty() ? "" : s.samples.front());
    EXPECT_LE(s.max_distinct, compute_k_bound({3, 1, Protocol::TwoRound}));
}

TEST(OracleAsync, ExhaustiveThreeOne) {
    const auto s = oracle_async(3, 1);
    EXPECT_TRUE(s.passed()) << (s.samples.empty() ? "" : s.samples.front());
    EXPECT_EQ(s.max_distinct_domain, 2u);
    EXPECT_LE(s.max_distinct, 3u);
}

TEST(OracleAsync, RefusesWhenTruncated) {
    OracleOptions o;
    o.bound = 100;
    EXPECT_TRUE(oracle_async(3, 1, o).refused);
}

TEST(OracleTarget, NamesRoundTrip) {
    for (auto t : {OracleTarget::Trb, OracleTarget::TwoRound, OracleTarget::TrbOptimal, OracleTarget::AsyncSnapshot})
        EXPECT_EQ(parse_oracle_target(to_string(t)), t);
    EXPECT_FALSE(parse_oracle_target("bogus"));
}
