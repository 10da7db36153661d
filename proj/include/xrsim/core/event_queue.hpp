#pragma once

#include "xrsim/core/time.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrsim {

enum class EventKind : std::uint8_t {
    FrameArrival,
    SlotBoundary,
    TimerExpiry,
    ReportTrigger,
    Other,
};

inline constexpr std::size_t kEventKindCount = 5;

inline const char* ToString(EventKind k)
{
    switch (k) {
    case EventKind::FrameArrival: return "frame_arrival";
    case EventKind::SlotBoundary: return "slot_boundary";
    case EventKind::TimerExpiry: return "timer_expiry";
    case EventKind::ReportTrigger: return "report_trigger";
    case EventKind::Other: return "other";
    }
    return "unknown";
}

using EventId = std::uint64_t;

class OrderingViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct RunStats {
    std::uint64_t processed = 0;
    std::array<std::uint64_t, kEventKindCount> perKind{};
    Micros firstEventTime = -1;
    Micros lastEventTime = -1;
    /// FNV-1a over the (time, sequence, kind) triples in delivery order.
    std::uint64_t traceDigest = 14695981039346656037ull;

    bool operator==(const RunStats&) const = default;
};

/// Min-heap of timed actions with FIFO tiebreak, plus the simulation clock.
class EventQueue {
public:
    using Action = std::function<void()>;

    Micros Now() const { return m_now; }
    std::int64_t SlotIndex() const { return SlotIndexOf(m_now); }
    std::size_t Pending() const { return m_heap.size(); }
    const RunStats& Stats() const { return m_stats; }

    EventId Schedule(Micros time, EventKind kind, Action action)
    {
        if (time < m_now) {
            throw OrderingViolation("event at " + std::to_string(time) + " us is before now ("
                                    + std::to_string(m_now) + " us)");
        }
        EventId id = m_nextSeq++;
        m_heap.push(Entry{time, id, kind, std::move(action)});
        return id;
    }

    EventId ScheduleIn(Micros delay, EventKind kind, Action action)
    {
        return Schedule(m_now + delay, kind, std::move(action));
    }

    /// Processes every event with time <= tEnd, then parks the clock at tEnd.
    /// Returns statistics accumulated by this call only.
    RunStats RunUntil(Micros tEnd)
    {
        if (tEnd < m_now) {
            throw OrderingViolation("run_until target is in the past");
        }
        RunStats local;
        while (!m_heap.empty() && m_heap.top().time <= tEnd) {
            // copy out before pop so the action may schedule new events
            Entry e = m_heap.top();
            m_heap.pop();
            m_now = e.time;
            Record(local, e);
            Record(m_stats, e);
            if (e.action) {
                e.action();
            }
        }
        m_now = tEnd;
        return local;
    }

private:
    struct Entry {
        Micros time;
        std::uint64_t seq;
        EventKind kind;
        Action action;
    };

    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.time != b.time) {
                return a.time > b.time;
            }
            return a.seq > b.seq;
        }
    };

    static void Mix(std::uint64_t& h, std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }

    static void Record(RunStats& s, const Entry& e)
    {
        ++s.processed;
        ++s.perKind[static_cast<std::size_t>(e.kind)];
        if (s.firstEventTime < 0) {
            s.firstEventTime = e.time;
        }
        s.lastEventTime = e.time;
        Mix(s.traceDigest, static_cast<std::uint64_t>(e.time));
        Mix(s.traceDigest, e.seq);
        Mix(s.traceDigest, static_cast<std::uint64_t>(e.kind));
    }

    Micros m_now = 0;
    std::uint64_t m_nextSeq = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> m_heap;
    RunStats m_stats;
};

} // namespace xrsim
