#pragma once

#include "xrsim/core/event_queue.hpp"
#include "xrsim/core/random.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/traffic/pdu.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct L4sThresholds {
    double tLowMs = 2.0;
    double tHighMs = 10.0;

    void Validate() const
    {
        if (!(0.0 <= tLowMs && tLowMs < tHighMs)) {
            throw std::invalid_argument("L4S thresholds need 0 <= t_low < t_high");
        }
    }
};

/// Linear ramp between the two sojourn thresholds.
inline double MarkingProbability(double sojournMs, double tLowMs, double tHighMs)
{
    L4sThresholds{tLowMs, tHighMs}.Validate();
    return std::clamp((sojournMs - tLowMs) / (tHighMs - tLowMs), 0.0, 1.0);
}

/// RAN-side marking at dequeue. Non-L4S flows are left untouched.
inline bool MarkMethod1(Pdu& pdu, bool l4sFlow, double p, Rng& rng)
{
    if (!l4sFlow) {
        return false;
    }
    if (p > 0.0 && (p >= 1.0 || Uniform01(rng) < p)) {
        pdu.ecnCe = true;
    }
    return pdu.ecnCe;
}

/// UPF-side marker driven by probabilities the RAN conveys with a delay.
class UpfMarker {
public:
    explicit UpfMarker(Micros signalingDelay = 0) : m_delay(signalingDelay)
    {
        if (signalingDelay < 0) {
            throw std::invalid_argument("negative signaling delay");
        }
    }

    /// RAN reports probability p at time `sent`.
    void Convey(Micros sent, double p) { m_pending.push_back({sent + m_delay, std::clamp(p, 0.0, 1.0)}); }

    /// Probability in force at the UPF at time `now`.
    double Current(Micros now)
    {
        while (!m_pending.empty() && m_pending.front().effective <= now) {
            m_p = m_pending.front().p;
            m_pending.pop_front();
        }
        return m_p;
    }

    bool Mark(Pdu& pdu, bool l4sFlow, Micros now, Rng& rng) { return MarkMethod1(pdu, l4sFlow, Current(now), rng); }

private:
    struct Update {
        Micros effective;
        double p;
    };

    Micros m_delay;
    double m_p = 0.0;
    std::deque<Update> m_pending;
};

struct AdaptiveSource {
    double rateBps = 5e6;
    double minBps = 1e6;
    double maxBps = 100e6;
    double stepBps = 0.5e6;
    Micros rtt = Ms(20);

    void Validate() const
    {
        if (!(0.0 < minBps && minBps <= maxBps) || stepBps < 0.0 || rtt <= 0) {
            throw std::invalid_argument("adaptive source needs 0 < min <= max and positive RTT");
        }
    }

    /// Scalable response to the marked fraction of one feedback interval.
    double Adapt(double markedFraction)
    {
        double f = std::clamp(markedFraction, 0.0, 1.0);
        if (f > 0.0) {
            rateBps *= 1.0 - f / 2.0;
        } else {
            rateBps += stepBps;
        }
        rateBps = std::clamp(rateBps, minBps, maxBps);
        return rateBps;
    }
};

/// FIFO of one QoS flow with its own sojourn-based marking state.
class L4sQueue {
public:
    explicit L4sQueue(L4sThresholds th = {}) : m_th(th) { m_th.Validate(); }

    void Enqueue(Pdu p, Micros now)
    {
        m_q.push_back({p, now});
        m_bytes += p.bytes;
    }

    bool Empty() const { return m_q.empty(); }
    std::uint64_t Bytes() const { return m_bytes; }
    const Pdu& Front() const { return m_q.front().pdu; }

    /// Sojourn of the head packet if it left now.
    double HeadSojournMs(Micros now) const { return m_q.empty() ? 0.0 : ToMs(now - m_q.front().enq); }

    struct Dequeued {
        Pdu pdu;
        double sojournMs;
        double p;
    };

    Dequeued Dequeue(Micros now)
    {
        if (m_q.empty()) {
            throw std::logic_error("dequeue from empty L4S queue");
        }
        auto e = m_q.front();
        m_q.pop_front();
        m_bytes -= e.pdu.bytes;
        double s = ToMs(now - e.enq);
        m_p = MarkingProbability(s, m_th.tLowMs, m_th.tHighMs);
        return {e.pdu, s, m_p};
    }

    double LastProbability() const { return m_p; }

private:
    struct Entry {
        Pdu pdu;
        Micros enq;
    };

    L4sThresholds m_th;
    std::deque<Entry> m_q;
    std::uint64_t m_bytes = 0;
    double m_p = 0.0;
};

enum class L4sMethod { Disabled, RanMarking, UpfMarking };

struct L4sLoopConfig {
    L4sMethod method = L4sMethod::RanMarking;
    double capacityBps = 20e6;
    std::uint32_t packetBytes = 1500;
    AdaptiveSource source;
    L4sThresholds thresholds;
    Micros signalingDelay = Ms(5);   // RAN -> UPF, method 2 only
    Micros duration = Seconds(10);
};

struct L4sIntervalRow {
    Micros time = 0;
    int flow = 0;
    double p = 0.0;
    double f = 0.0;
    double rateBps = 0.0;
    double sojournMs = 0.0;
};

struct L4sLoopResult {
    std::vector<L4sIntervalRow> rows;
    std::vector<double> sojournMs;     // per packet
    std::vector<Micros> sojournTimes;  // dequeue instant per sample
    std::uint64_t packets = 0;
    std::uint64_t marked = 0;
};

/// Single flow through a constant-rate bottleneck with a feedback loop of
/// one RTT: marks counted over each interval reach the source half an RTT
/// later.
inline L4sLoopResult RunL4sLoop(const L4sLoopConfig& cfg, std::uint64_t seed)
{
    cfg.source.Validate();
    if (cfg.capacityBps <= 0.0 || cfg.packetBytes == 0 || cfg.duration <= 0) {
        throw std::invalid_argument("invalid L4S loop configuration");
    }
    EventQueue eq;
    RngStreams streams(seed);
    Rng markRng = streams.Stream("l4s-mark");
    AdaptiveSource src = cfg.source;
    L4sQueue queue(cfg.thresholds);
    UpfMarker upf(cfg.signalingDelay);
    L4sLoopResult res;
    IdSource ids;
    bool busy = false;
    std::uint64_t intervalPkts = 0;
    std::uint64_t intervalMarks = 0;
    double lastSojourn = 0.0;
    const bool l4s = cfg.method != L4sMethod::Disabled;

    auto serviceTime = [&](const Pdu& p) {
        return static_cast<Micros>(std::llround(p.bytes * 8.0 / cfg.capacityBps * 1e6));
    };

    std::function<void()> serve = [&] {
        if (queue.Empty()) {
            busy = false;
            return;
        }
        busy = true;
        Micros now = eq.Now();
        auto d = queue.Dequeue(now);
        if (cfg.method == L4sMethod::RanMarking) {
            MarkMethod1(d.pdu, true, d.p, markRng);
        } else if (cfg.method == L4sMethod::UpfMarking) {
            upf.Convey(now, d.p);
        }
        res.sojournMs.push_back(d.sojournMs);
        res.sojournTimes.push_back(now);
        lastSojourn = d.sojournMs;
        ++res.packets;
        ++intervalPkts;
        if (d.pdu.ecnCe) {
            ++res.marked;
            ++intervalMarks;
        }
        eq.ScheduleIn(serviceTime(d.pdu), EventKind::Other, serve);
    };

    std::function<void()> emit = [&] {
        Micros now = eq.Now();
        Pdu p;
        p.id = ids.nextPdu++;
        p.setId = ids.nextSet++;
        p.bytes = cfg.packetBytes;
        p.arrival = now;
        if (cfg.method == L4sMethod::UpfMarking) {
            upf.Mark(p, l4s, now, markRng);
        }
        queue.Enqueue(p, now);
        if (!busy) {
            serve();
        }
        auto gap = static_cast<Micros>(std::llround(cfg.packetBytes * 8.0 / src.rateBps * 1e6));
        eq.ScheduleIn(std::max<Micros>(gap, 1), EventKind::FrameArrival, emit);
    };

    std::function<void()> feedback = [&] {
        double f = intervalPkts ? static_cast<double>(intervalMarks) / static_cast<double>(intervalPkts) : 0.0;
        intervalPkts = 0;
        intervalMarks = 0;
        Micros sent = eq.Now();
        double p = queue.LastProbability();
        eq.ScheduleIn(src.rtt / 2, EventKind::ReportTrigger, [&, f, p, sent] {
            src.Adapt(l4s ? f : 0.0);
            res.rows.push_back(L4sIntervalRow{sent, 0, p, f, src.rateBps, lastSojourn});
        });
        eq.ScheduleIn(src.rtt, EventKind::TimerExpiry, feedback);
    };

    eq.Schedule(0, EventKind::FrameArrival, emit);
    eq.Schedule(src.rtt, EventKind::TimerExpiry, feedback);
    eq.RunUntil(cfg.duration);
    return res;
}

} // namespace xrsim
