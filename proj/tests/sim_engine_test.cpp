#include "xrsim/core/event_queue.hpp"
#include "xrsim/core/random.hpp"
#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

using namespace xrsim;

TEST(EventQueue, SameInstantRunsInInsertionOrder)
{
    EventQueue eq;
    std::vector<int> order;
    eq.Schedule(100, EventKind::SlotBoundary, [&] { order.push_back(1); });
    eq.Schedule(100, EventKind::FrameArrival, [&] { order.push_back(2); });
    eq.Schedule(50, EventKind::Other, [&] { order.push_back(0); });
    eq.Schedule(100, EventKind::TimerExpiry, [&] { order.push_back(3); });
    eq.RunUntil(1000);
    EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3}));
}

TEST(EventQueue, RejectsEventsInThePast)
{
    EventQueue eq;
    eq.RunUntil(500);
    EXPECT_THROW(eq.Schedule(499, EventKind::Other, [] {}), OrderingViolation);
    EXPECT_NO_THROW(eq.Schedule(500, EventKind::Other, [] {}));
    EXPECT_THROW(eq.RunUntil(100), OrderingViolation);
}

TEST(EventQueue, ActionsMayScheduleFollowUps)
{
    EventQueue eq;
    int ticks = 0;
    std::function<void()> tick = [&] {
        ++ticks;
        eq.ScheduleIn(kSlotUs, EventKind::SlotBoundary, tick);
    };
    eq.Schedule(0, EventKind::SlotBoundary, tick);
    auto stats = eq.RunUntil(Ms(10));
    // slots 0..20 inclusive
    EXPECT_EQ(ticks, 21);
    EXPECT_EQ(stats.perKind[static_cast<std::size_t>(EventKind::SlotBoundary)], 21u);
    EXPECT_EQ(stats.lastEventTime, Ms(10));
    EXPECT_EQ(eq.Now(), Ms(10));
    EXPECT_EQ(eq.SlotIndex(), 20);
}

TEST(EventQueue, IdenticalSchedulesGiveIdenticalDigests)
{
    auto run = [] {
        EventQueue eq;
        for (int i = 0; i < 50; ++i) {
            eq.Schedule((i * 37) % 11 * 100, static_cast<EventKind>(i % 5), [] {});
        }
        return eq.RunUntil(Seconds(1));
    };
    EXPECT_EQ(run(), run());
    EventQueue other;
    other.Schedule(0, EventKind::Other, [] {});
    EXPECT_NE(other.RunUntil(1).traceDigest, run().traceDigest);
}

TEST(RngStreams, NamedStreamsAreIndependent)
{
    RngStreams a(7);
    RngStreams b(7);
    Rng x = a.Stream("traffic", 3);
    Rng noise = b.Stream("harq", 3);
    for (int i = 0; i < 100; ++i) {
        noise();
    }
    Rng y = b.Stream("traffic", 3);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(x(), y());
    }
    EXPECT_NE(a.Stream("traffic", 0)(), a.Stream("traffic", 1)());
    EXPECT_NE(RngStreams(1).Stream("traffic")(), RngStreams(2).Stream("traffic")());
}

TEST(Time, RationalConversions)
{
    EXPECT_EQ(FloorMicros(Rational(50, 3)), 16666);
    EXPECT_EQ(FloorMicros(Rational(-1, 3)), -334);
    EXPECT_EQ(SlotFloor(16666), 16500);
    EXPECT_EQ(SlotFloor(-1), -500);
    EXPECT_EQ(SlotCeil(501), 1000);
    EXPECT_EQ(SlotCeil(1000), 1000);
    EXPECT_EQ(ParseRational("50/3"), Rational(50, 3));
    EXPECT_EQ(ParseRational("16.5"), Rational(33, 2));
    EXPECT_EQ(ParseRational("-4"), Rational(-4));
    EXPECT_THROW(ParseRational("abc"), std::invalid_argument);
    EXPECT_THROW(ParseRational("1/0"), std::invalid_argument);
}

TEST(Tdd, PatternAndSymbols)
{
    std::string p;
    for (int s = 0; s < 10; ++s) {
        switch (SlotTypeOf(s)) {
        case SlotType::Downlink: p += 'D'; break;
        case SlotType::Special: p += 'S'; break;
        case SlotType::Uplink: p += 'U'; break;
        }
    }
    EXPECT_EQ(p, "DDDSUDDDSU");
    EXPECT_EQ(DataSymbols(SlotType::Downlink, Direction::Downlink), 12);
    EXPECT_EQ(DataSymbols(SlotType::Special, Direction::Downlink), 10);
    EXPECT_EQ(DataSymbols(SlotType::Special, Direction::Uplink), 0);
    EXPECT_EQ(DataSymbols(SlotType::Uplink, Direction::Uplink), 12);
    EXPECT_EQ(DataSymbols(SlotType::Uplink, Direction::Downlink), 0);
    EXPECT_EQ(NextSlotFor(Direction::Uplink, 0), 4);
    EXPECT_EQ(NextSlotFor(Direction::Uplink, 5), 9);
    EXPECT_EQ(NextSlotFor(Direction::Downlink, 4), 5);
    EXPECT_THROW(SlotTypeOf(-1), std::invalid_argument);
}
