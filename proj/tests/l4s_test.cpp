#include "xrsim/l4s/l4s.hpp"

#include <gtest/gtest.h>

using namespace xrsim;

TEST(L4s, RampProbability)
{
    EXPECT_DOUBLE_EQ(MarkingProbability(1.0, 2.0, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(MarkingProbability(2.0, 2.0, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(MarkingProbability(6.0, 2.0, 10.0), 0.5);
    EXPECT_DOUBLE_EQ(MarkingProbability(10.0, 2.0, 10.0), 1.0);
    EXPECT_DOUBLE_EQ(MarkingProbability(50.0, 2.0, 10.0), 1.0);
    EXPECT_THROW(MarkingProbability(1.0, 5.0, 5.0), std::invalid_argument);
}

TEST(L4s, MarkerLeavesClassicFlowsAlone)
{
    Rng rng(1);
    Pdu p;
    EXPECT_FALSE(MarkMethod1(p, false, 1.0, rng));
    EXPECT_FALSE(p.ecnCe);
    EXPECT_FALSE(MarkMethod1(p, true, 0.0, rng));
    EXPECT_TRUE(MarkMethod1(p, true, 1.0, rng));
    int marked = 0;
    for (int i = 0; i < 20000; ++i) {
        Pdu q;
        marked += MarkMethod1(q, true, 0.3, rng);
    }
    EXPECT_NEAR(marked / 20000.0, 0.3, 0.015);
}

TEST(L4s, UpfAppliesConveyedProbabilityAfterTheDelay)
{
    UpfMarker upf(Ms(5));
    upf.Convey(Ms(1), 0.7);
    EXPECT_DOUBLE_EQ(upf.Current(Ms(5)), 0.0);
    EXPECT_DOUBLE_EQ(upf.Current(Ms(6)), 0.7);
    upf.Convey(Ms(7), 2.0);
    EXPECT_DOUBLE_EQ(upf.Current(Ms(12)), 1.0);
    EXPECT_THROW(UpfMarker(-1), std::invalid_argument);
}

TEST(L4s, ScalableSourceResponse)
{
    AdaptiveSource s;
    s.rateBps = 10e6;
    EXPECT_DOUBLE_EQ(s.Adapt(0.0), 10.5e6);
    EXPECT_DOUBLE_EQ(s.Adapt(0.5), 10.5e6 * 0.75);
    s.rateBps = 1.2e6;
    EXPECT_DOUBLE_EQ(s.Adapt(1.0), s.minBps);
    s.rateBps = s.maxBps;
    EXPECT_DOUBLE_EQ(s.Adapt(0.0), s.maxBps);
}

TEST(L4s, QueueReportsSojourn)
{
    L4sQueue q;
    Pdu p;
    p.bytes = 100;
    q.Enqueue(p, 0);
    q.Enqueue(p, Ms(1));
    EXPECT_EQ(q.Bytes(), 200u);
    EXPECT_DOUBLE_EQ(q.HeadSojournMs(Ms(6)), 6.0);
    auto d = q.Dequeue(Ms(6));
    EXPECT_DOUBLE_EQ(d.sojournMs, 6.0);
    EXPECT_DOUBLE_EQ(d.p, 0.5);
    EXPECT_DOUBLE_EQ(q.LastProbability(), 0.5);
    q.Dequeue(Ms(6));
    EXPECT_THROW(q.Dequeue(Ms(7)), std::logic_error);
}

TEST(L4s, LoopProducesRowsEachRtt)
{
    L4sLoopConfig cfg;
    cfg.duration = Seconds(2);
    auto r = RunL4sLoop(cfg, 1);
    EXPECT_GT(r.packets, 1000u);
    EXPECT_EQ(r.sojournMs.size(), r.packets);
    EXPECT_GE(r.rows.size(), 95u);
    for (const auto& row : r.rows) {
        EXPECT_GE(row.rateBps, cfg.source.minBps);
        EXPECT_LE(row.rateBps, cfg.source.maxBps);
    }
    cfg.capacityBps = 0.0;
    EXPECT_THROW(RunL4sLoop(cfg, 1), std::invalid_argument);
}
