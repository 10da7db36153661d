#include "xrsim/radio/channel.hpp"
#include "xrsim/radio/deployment.hpp"
#include "xrsim/radio/link_adaptation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace xrsim;

TEST(Channel, PathlossAndNoise)
{
    EXPECT_NEAR(PathlossDb(1.0), 44.441, 1e-3);
    EXPECT_NEAR(PathlossDb(10.0), 61.741, 1e-3);
    EXPECT_DOUBLE_EQ(PathlossDb(0.2), PathlossDb(1.0));
    EXPECT_NEAR(NoisePerRbDbm(kUeNoiseFigureDb), -109.437, 1e-3);
}

TEST(Channel, SinrCombinesInterferenceLinearly)
{
    double noise = -100.0;
    EXPECT_NEAR(SinrDb(-80.0, {}, noise), 20.0, 1e-12);
    std::vector<double> i{-100.0};
    EXPECT_NEAR(SinrDb(-80.0, i, noise), 20.0 - 10.0 * std::log10(2.0), 1e-9);
    double cl = 70.0;
    double alone = DlSinrDb(cl, {});
    std::vector<DlInterferer> idle{{cl, 0.0}};
    EXPECT_DOUBLE_EQ(DlSinrDb(cl, idle), alone);
    std::vector<DlInterferer> busy{{cl, 1.0}};
    EXPECT_LT(DlSinrDb(cl, busy), 0.1);
}

TEST(Channel, UplinkPowerControl)
{
    double pl = 110.0;
    EXPECT_NEAR(UlRxPsdDbm(1, pl), kUlP0Dbm, 1e-9);
    int cap = MaxRbWithoutPowerLimit(pl);
    EXPECT_NEAR(UlRxPsdDbm(cap, pl), kUlP0Dbm, 1e-9);
    EXPECT_LT(UlRxPsdDbm(cap + 1, pl), kUlP0Dbm);
    EXPECT_EQ(MaxRbWithoutPowerLimit(200.0), 1);
    EXPECT_EQ(cap, 3);
    EXPECT_EQ(MaxRbWithoutPowerLimit(40.0), kNumRb);
}

TEST(Deployment, ExactCountsPerCell)
{
    DeploymentConfig cfg;
    cfg.cells = 12;
    Rng rng(4);
    auto d = Deployment::Drop(cfg, 5, rng);
    EXPECT_EQ(d.Cells().size(), 12u);
    ASSERT_EQ(d.Ues().size(), 60u);
    std::vector<int> count(12, 0);
    for (const auto& u : d.Ues()) {
        ++count[u.servingCell];
        ASSERT_EQ(u.couplingLossDb.size(), 12u);
        for (double cl : u.couplingLossDb) {
            EXPECT_GE(cl, u.couplingLossDb[u.servingCell]);
        }
    }
    for (int c : count) {
        EXPECT_EQ(c, 5);
    }
    EXPECT_THROW(Deployment::Drop(DeploymentConfig{0}, 1, rng), std::invalid_argument);
}

TEST(LinkAdaptation, McsLadder)
{
    const auto& se = McsSpectralEfficiency();
    EXPECT_DOUBLE_EQ(se.back(), kSeCap);
    for (int m = 1; m < kNumMcs; ++m) {
        EXPECT_GT(se[m], se[m - 1]);
        EXPECT_GT(McsThresholdDb(m), McsThresholdDb(m - 1));
    }
    EXPECT_EQ(SelectMcs(-20.0).index, 0);
    EXPECT_EQ(SelectMcs(60.0).index, kNumMcs - 1);
    int m = SelectMcs(15.0).index;
    EXPECT_LE(McsThresholdDb(m), 15.0);
    EXPECT_GT(McsThresholdDb(m + 1), 15.0);
    EXPECT_NEAR(Bler(m, McsThresholdDb(m)), kTargetBler, 1e-12);
    EXPECT_NEAR(Bler(m, McsThresholdDb(m) + 1.0), kTargetBler / 10.0, 2e-3);
    EXPECT_DOUBLE_EQ(ContinuousSe(80.0), kSeCap);
}

TEST(LinkAdaptation, TransportBlockSizes)
{
    EXPECT_EQ(TbBitsForMcs(kNumMcs - 1, kNumRb, 12), 306633u);
    EXPECT_EQ(TbBits(2.0, 10, 12), 2880u);
    EXPECT_EQ(TbBits(2.0, 0, 12), 0u);
    int n = RbsForBits(2881, 2.0, 12, kNumRb);
    EXPECT_EQ(n, 11);
    EXPECT_EQ(RbsForBits(0, 2.0, 12, kNumRb), 0);
    EXPECT_EQ(RbsForBits(1u << 30, 2.0, 12, kNumRb), kNumRb);
}

TEST(LinkAdaptation, HarqChaseCombining)
{
    HarqProcess p;
    p.mcs = 10;
    Rng rng(1);
    double bad = McsThresholdDb(10) - 30.0;
    for (int i = 0; i <= kHarqMaxRetx; ++i) {
        EXPECT_EQ(HarqAttempt(p, bad, rng), HarqOutcome::Nack);
    }
    EXPECT_TRUE(p.Exhausted());
    EXPECT_FALSE(p.Succeeded());
    EXPECT_THROW(HarqAttempt(p, bad, rng), std::logic_error);

    // a TB just below threshold recovers more often with each retransmission
    int firstOk = 0, anyOk = 0;
    for (int t = 0; t < 2000; ++t) {
        HarqProcess q;
        q.mcs = 10;
        double s = McsThresholdDb(10) - 2.0;
        while (!q.Exhausted() && !q.Succeeded()) {
            HarqAttempt(q, s, rng);
        }
        firstOk += q.attempts == 1 && q.Succeeded();
        anyOk += q.Succeeded();
    }
    EXPECT_LT(firstOk, 300);
    EXPECT_GT(anyOk, 1900);
}
