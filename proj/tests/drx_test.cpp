#include "xrsim/drx/adrx.hpp"
#include "xrsim/drx/drx.hpp"
#include "xrsim/drx/power.hpp"

#include <gtest/gtest.h>

using namespace xrsim;

TEST(DrxSchedule, IntegerCycleDriftsAgainstSixtyFps)
{
    DrxConfig cfg;
    cfg.cycleMs = Rational(16);
    const Rational period(50, 3);
    for (std::int64_t k = 0; k < 100; ++k) {
        EXPECT_EQ(period * Rational(k) - OnDurationStartMs(cfg, k), Rational(2, 3) * Rational(k));
    }
    cfg.cycleMs = Rational(50, 3);
    for (std::int64_t k = 0; k < 100; ++k) {
        EXPECT_EQ(period * Rational(k) - OnDurationStartMs(cfg, k), Rational(0));
    }
}

TEST(DrxSchedule, StartsAreFlooredToSlots)
{
    DrxConfig cfg;
    auto s = OnDurationStarts(cfg, 4);
    EXPECT_EQ(s, (std::vector<Micros>{0, 16500, 33000, 50000}));
    EXPECT_THROW(OnDurationStarts(cfg, 0), std::invalid_argument);
    cfg.onDurationMs = Rational(20);
    EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

TEST(DrxMachine, OnDurationAndInactivity)
{
    DrxConfig cfg;
    cfg.cycleMs = Rational(10);
    cfg.onDurationMs = Rational(2);
    cfg.inactivityMs = Rational(3);
    DrxMachine m(cfg);
    std::string trace;
    for (std::int64_t s = 0; s < 20; ++s) {
        bool on = m.BeginSlot(s);
        if (s == 2) {
            m.NotifyNewData(s);
        }
        trace += on ? '1' : '0';
    }
    // on-duration covers slots 0-3; data in slot 2 extends to 1.5 ms + 3 ms
    EXPECT_EQ(trace, "11111111100000000000");
    EXPECT_EQ(m.Mode(), DrxMode::Sleep);
    EXPECT_TRUE(m.BeginSlot(20));
    EXPECT_EQ(m.Mode(), DrxMode::OnDuration);
    EXPECT_EQ(m.CycleIndex(), 1);
}

TEST(DrxMachine, ChangesApplyFromTheNextCycle)
{
    DrxConfig cfg;
    cfg.cycleMs = Rational(10);
    cfg.onDurationMs = Rational(2);
    DrxMachine m(cfg);
    m.BeginSlot(0);
    m.SetOnDuration(Rational(4));
    m.SetOffsetShift(Rational(1));
    EXPECT_FALSE(m.BeginSlot(5));
    EXPECT_FALSE(m.BeginSlot(20));   // 10 ms: the shifted cycle starts at 11 ms
    EXPECT_TRUE(m.BeginSlot(22));
    EXPECT_EQ(m.CurrentCycleStartMs(), Rational(11));
    EXPECT_TRUE(m.BeginSlot(29));
    EXPECT_FALSE(m.BeginSlot(30));
    EXPECT_THROW(m.SetOnDuration(Rational(11)), std::invalid_argument);
}

TEST(DrxMachine, ShortCycleAfterActivity)
{
    DrxConfig cfg;
    cfg.cycleMs = Rational(20);
    cfg.onDurationMs = Rational(1);
    cfg.inactivityMs = Rational(0);
    cfg.shortCycle = DrxShortCycle{Rational(5), 2};
    DrxMachine m(cfg);
    std::vector<std::int64_t> awake;
    for (std::int64_t s = 0; s < 40; ++s) {
        if (m.BeginSlot(s)) {
            awake.push_back(s);
        }
    }
    // long on-duration at slots 0-1, then two short cycles at 5 ms and 10 ms
    EXPECT_EQ(awake, (std::vector<std::int64_t>{0, 1, 10, 11, 20, 21}));
}

TEST(Power, TraceClassificationAndMean)
{
    PowerModel pm;
    using A = SlotActivity;
    std::vector<A> act{A::Data, A::Monitor, A::Sleep, A::Sleep, A::Monitor};
    for (int i = 0; i < 6; ++i) {
        act.push_back(A::Sleep);
    }
    auto st = ClassifyTrace(act, pm);
    EXPECT_EQ(st[0], PowerState::PdcchPdsch);
    EXPECT_EQ(st[1], PowerState::PdcchOnly);
    EXPECT_EQ(st[2], PowerState::LightSleep);
    EXPECT_EQ(st[10], PowerState::DeepSleep);
    double expect = (3.0 + 1.0 + 0.4 * 2 + 1.0 + 0.04 * 6 + 4.0) / 11.0;
    EXPECT_NEAR(PowerForRun(st, pm), expect, 1e-12);
    EXPECT_DOUBLE_EQ(PowerForRun({}, pm), 0.0);
    EXPECT_DOUBLE_EQ(PowerSavingGain(0.75, 1.0), 25.0);
    EXPECT_THROW(PowerSavingGain(0.5, 0.0), std::invalid_argument);
    pm.lightSleep = 2.0;
    EXPECT_THROW(pm.Validate(), std::invalid_argument);
}

TEST(Adrx, QuietHistoryShrinksTheOnDuration)
{
    AdrxConfig cfg;
    AdrxController c(cfg, AdrxDecision{Rational(0), Rational(8)});
    AdrxFeedback fb;
    for (int i = 0; i < 10; ++i) {
        fb.frames.push_back({4.0 + 0.1 * (i % 3), 1.5});
    }
    auto d = c.Update(fb);
    EXPECT_EQ(d.onDurationMs, Rational(2));
    EXPECT_DOUBLE_EQ(c.VirtualQueue(), 0.0);
}

TEST(Adrx, ViolationsPullTheWindowOverTheArrivals)
{
    AdrxConfig cfg;
    AdrxController c(cfg, AdrxDecision{Rational(0), Rational(2)});
    AdrxFeedback fb;
    fb.violations = 3;
    for (int i = 0; i < 30; ++i) {
        fb.frames.push_back({5.0 + 0.05 * (i % 5), 1.5});
    }
    auto d = c.Update(fb);
    EXPECT_GT(c.VirtualQueue(), 2.9);
    EXPECT_LT(c.PredictedViolation(d.offsetShiftMs, d.onDurationMs), 0.01);
    EXPECT_GT(c.PredictedViolation(Rational(0), Rational(2)), 0.99);
    EXPECT_LE(d.offsetShiftMs + d.onDurationMs, Rational(12));
}

TEST(Adrx, OnOnlyKeepsTheOffset)
{
    AdrxConfig cfg;
    cfg.mode = AdrxMode::OnOnly;
    AdrxController c(cfg, AdrxDecision{Rational(1), Rational(8)});
    AdrxFeedback fb;
    fb.violations = 1;
    fb.frames = {{3.0, 1.0}, {3.2, 1.0}};
    EXPECT_EQ(c.Update(fb).offsetShiftMs, Rational(1));
    cfg.onDurationsMs = {Rational(40)};
    EXPECT_THROW(AdrxController(cfg, {}), std::invalid_argument);
}
