#include "xrsim/mac/configured_grant.hpp"
#include "xrsim/mac/scheduler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace xrsim;

TEST(Metrics, Formulas)
{
    EXPECT_DOUBLE_EQ(PfMetric(100.0, 50.0), 2.0);
    EXPECT_DOUBLE_EQ(PfMetric(100.0, 0.0), 100.0 / kMinAvgThroughput);
    EXPECT_NEAR(MlwdfMetric(100.0, 50.0, 5.0, 10.0, 0.01), -std::log(0.01) / 10.0 * 5.0 * 2.0, 1e-12);

    SchedulerPolicy p;
    p.kind = SchedulerKind::PduSetAware;
    auto fresh = PduSetMetric(0, 1000, Ms(8), p);
    auto half = PduSetMetric(500, 1000, Ms(8), p);
    auto urgent = PduSetMetric(0, 1000, Ms(2), p);
    ASSERT_TRUE(fresh && half && urgent);
    EXPECT_NEAR(*fresh, 1.0 / 8.0, 1e-12);
    EXPECT_NEAR(*half, std::exp(0.5) / 8.0, 1e-12);
    EXPECT_GT(*urgent, *fresh);
    // the remaining budget is floored at epsilon
    EXPECT_DOUBLE_EQ(*PduSetMetric(0, 1000, 10, p), *PduSetMetric(0, 1000, Ms(1), p));
    EXPECT_FALSE(PduSetMetric(0, 1000, 0, p));
    EXPECT_THROW(PduSetMetric(0, 0, Ms(1), p), std::invalid_argument);
    EXPECT_EQ(ParseSchedulerKind("mlwdf"), SchedulerKind::Mlwdf);
    EXPECT_THROW(ParseSchedulerKind("rr"), std::invalid_argument);
}

TEST(Metrics, ExpiredSetsGetTheFloor)
{
    SchedulerPolicy p;
    p.kind = SchedulerKind::PduSetAware;
    std::vector<DlCandidate> c(3);
    for (int i = 0; i < 3; ++i) {
        c[i].ue = i;
        c[i].spectralEfficiency = 5.0;
        c[i].queuedBits = 1000;
        c[i].headSetBits = 1000;
    }
    c[0].remainingBudget = Ms(4);
    c[1].remainingBudget = -Ms(1);
    c[2].remainingBudget = Ms(2);
    auto s = ComputeMetrics(c, p, 12);
    EXPECT_NEAR(s[1], s[0] * p.floorFactor, 1e-15);
    auto rank = RankByScore(s, c);
    EXPECT_EQ(rank, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(AllocateDl, XrFirstThenEmbbAndDisjoint)
{
    SchedulerPolicy p;
    std::vector<DlCandidate> c(3);
    c[0] = {0, false, 0, true, 7.8, 27, 1.0};
    c[1].ue = 1;
    c[1].queuedBits = 100000;
    c[1].spectralEfficiency = 7.8;
    c[1].mcs = 27;
    c[1].avgThroughput = 1e9;
    c[2] = c[1];
    c[2].ue = 2;
    c[2].queuedBits = 0;
    auto a = AllocateDl(0, c, p);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].ue, 1);
    EXPECT_GE(a[0].tbBits, 100000u);
    EXPECT_EQ(a[0].rbCount, RbsForBits(100000, 7.8, 12, kNumRb));
    EXPECT_EQ(a[1].ue, 0);
    EXPECT_EQ(a[0].rbCount + a[1].rbCount, kNumRb);
    EXPECT_TRUE(RbDisjoint(a));
    EXPECT_TRUE(AllocateDl(4, c, p).empty());   // U slot
}

TEST(AllocateDl, RespectsReservedBand)
{
    SchedulerPolicy p;
    std::vector<DlCandidate> c(1);
    c[0].queuedBits = 1u << 24;
    c[0].spectralEfficiency = 2.0;
    auto a = AllocateDl(3, c, p, 100, 20);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].rbStart, 20);
    EXPECT_EQ(a[0].rbCount, 100);
    EXPECT_EQ(a[0].tbBits, TbBits(2.0, 100, 10));
}

TEST(AllocateUl, FitsOrSharesProportionally)
{
    std::vector<UlCandidate> c(2);
    c[0] = {0, 1000, 4.0, 15, 60.0, Ms(1)};
    c[1] = {1, 2000, 4.0, 15, 60.0, Ms(2)};
    auto a = AllocateUl(4, c);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].ue, 1);   // longest waiting first
    EXPECT_GE(a[0].tbBits, 16000u);
    EXPECT_GE(a[1].tbBits, 8000u);
    EXPECT_TRUE(RbDisjoint(a));
    EXPECT_TRUE(AllocateUl(0, c).empty());

    c[0].estimatedBytes = 200000;
    c[1].estimatedBytes = 200000;
    auto b = AllocateUl(4, c, 100);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0].rbCount + b[1].rbCount, 100);
    EXPECT_EQ(b[0].rbCount, 50);

    c[0].pathlossDb = 110.0;
    auto d = AllocateUl(4, c);
    for (const auto& x : d) {
        if (x.ue == 0) {
            EXPECT_LE(x.rbCount, MaxRbWithoutPowerLimit(110.0));
        }
    }
}

TEST(ConfiguredGrant, FractionalPeriodOccasions)
{
    CgConfig cfg;
    cfg.occasionsPerPeriod = 2;
    auto occ = CgOccasions(cfg, Seconds(1));
    ASSERT_EQ(occ.size(), 2u * 60u);
    for (const auto& o : occ) {
        EXPECT_EQ(SlotTypeOf(o.slot), SlotType::Uplink);
        Micros start = FloorMicros(CgPeriodStartMs(cfg, o.period));
        EXPECT_GE(o.slot * kSlotUs, start);
        EXPECT_LT(o.slot * kSlotUs, start + Ms(2) + Ms(5) * o.indexInPeriod + kSlotUs);
    }
    // period 3 starts at exactly 50 ms
    EXPECT_EQ(occ[6].slot, 104);
    EXPECT_EQ(occ[7].slot, 109);
    cfg.periodicityMs = Rational(2);
    EXPECT_THROW(CgOccasions(cfg, Seconds(1)), std::invalid_argument);
}

TEST(UtoUci, DrainInOrder)
{
    std::vector<std::uint64_t> cap{100, 100, 100, 100};
    EXPECT_EQ(BuildUtoUci(0, cap, 4), (std::vector<bool>{true, true, true, true}));
    EXPECT_EQ(BuildUtoUci(150, cap, 4), (std::vector<bool>{false, false, true, true}));
    EXPECT_EQ(BuildUtoUci(1000, cap, 4), (std::vector<bool>{false, false, false, false}));
    EXPECT_THROW(BuildUtoUci(1, cap, 5), std::invalid_argument);
    EXPECT_THROW(BuildUtoUci(1, cap, 0), std::invalid_argument);

    std::vector<CgOccasion> w{{4, 0, 0, 40, 10}, {9, 0, 1, 40, 10}, {14, 1, 0, 40, 10}};
    auto r = ReclaimUnused({true, false, true}, w, 5);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].slot, 14);
    EXPECT_EQ(r[0].rbCount, 40);
}
