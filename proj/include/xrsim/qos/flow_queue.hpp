#pragma once

#include "xrsim/core/time.hpp"
#include "xrsim/qos/profile.hpp"
#include "xrsim/reporting/delay_status.hpp"
#include "xrsim/traffic/pdu.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace xrsim {

enum class DiscardCause { Psihi, Psi, Timer };

inline const char* ToString(DiscardCause c)
{
    switch (c) {
    case DiscardCause::Psihi: return "psihi";
    case DiscardCause::Psi: return "psi";
    case DiscardCause::Timer: return "timer";
    }
    return "?";
}

enum class PduEventKind { Enqueued, Transmitted, Delivered, Lost, Discarded };

inline const char* ToString(PduEventKind k)
{
    switch (k) {
    case PduEventKind::Enqueued: return "enqueued";
    case PduEventKind::Transmitted: return "transmitted";
    case PduEventKind::Delivered: return "delivered";
    case PduEventKind::Lost: return "lost";
    case PduEventKind::Discarded: return "discarded";
    }
    return "?";
}

struct PduEvent {
    Micros time = 0;
    PduEventKind kind = PduEventKind::Enqueued;
    PduId pdu = 0;
    PduSetId set = 0;
    std::uint32_t bytes = 0;
    DiscardCause cause = DiscardCause::Timer;
};

/// Part of a PDU placed into one transport block.
struct Segment {
    PduId pdu = 0;
    PduSetId set = 0;
    std::uint32_t bytes = 0;
};

struct SetRecord {
    PduSetId id = 0;
    FrameId frame = 0;
    Micros arrival = 0;
    Micros deadline = kNoDeadline;
    std::uint32_t pduCount = 0;
    std::uint32_t pdusDelivered = 0;
    std::uint64_t bytes = 0;
    std::uint64_t bytesTransmitted = 0;
    int psi = kPsiHigh;
    bool lost = false;
    Micros completion = -1;

    bool Complete() const { return !lost && pdusDelivered == pduCount && pduCount > 0; }
};

/// What the scheduler may know about the PDU set at the head of the queue.
struct HeadSetInfo {
    PduSetId id = 0;
    std::uint64_t setBytes = 0;
    std::uint64_t sentBytes = 0;
    Micros arrival = 0;
    Micros deadline = kNoDeadline;
};

/// Per-UE, per-direction queue of PDUs with RLC-UM style segmentation,
/// PDU-set loss accounting and the three discard mechanisms.
class FlowQueue {
public:
    explicit FlowQueue(QosFlowProfile profile = {}) : m_profile(profile) { m_profile.Validate(); }

    const QosFlowProfile& Profile() const { return m_profile; }

    /// Optional audit sink; the queue appends one event per PDU state change.
    void SetEventLog(std::vector<PduEvent>* log) { m_log = log; }

    void Enqueue(const Pdu& p, Micros now)
    {
        m_queue.push_back(Entry{p, 0});
        m_unsent += p.bytes;
        m_progress[p.id] = Progress{p.bytes, 0, 0, false};
        auto [it, fresh] = m_sets.try_emplace(p.setId);
        if (fresh) {
            SetRecord& r = it->second;
            r.id = p.setId;
            r.frame = p.frameId;
            r.arrival = p.arrival;
            r.deadline = p.deadline;
            r.pduCount = p.setPduCount == 0 ? 1 : p.setPduCount;
            r.bytes = p.setBytes == 0 ? p.bytes : p.setBytes;
            r.psi = p.psi;
        }
        Log(now, PduEventKind::Enqueued, p.id, p.setId, p.bytes);
    }

    void Enqueue(const PduSet& s, Micros now)
    {
        for (const auto& p : s.pdus) {
            Enqueue(p, now);
        }
    }

    std::uint64_t UnsentBytes() const { return m_unsent; }
    bool Empty() const { return m_queue.empty(); }
    std::size_t QueuedPdus() const { return m_queue.size(); }

    std::optional<Micros> HolArrival() const
    {
        if (m_queue.empty()) {
            return std::nullopt;
        }
        return m_queue.front().pdu.arrival;
    }

    const Pdu* Head() const { return m_queue.empty() ? nullptr : &m_queue.front().pdu; }

    /// Head PDU set. When set boundaries are hidden from the scheduler the
    /// head PDU stands in for its set.
    std::optional<HeadSetInfo> HeadSet() const
    {
        if (m_queue.empty()) {
            return std::nullopt;
        }
        const Entry& e = m_queue.front();
        HeadSetInfo h;
        h.id = e.pdu.setId;
        h.arrival = e.pdu.arrival;
        h.deadline = e.pdu.deadline;
        if (e.pdu.setVisible) {
            const SetRecord& r = m_sets.at(e.pdu.setId);
            h.setBytes = r.bytes;
            h.sentBytes = r.bytesTransmitted;
        } else {
            h.setBytes = e.pdu.bytes;
            h.sentBytes = e.sent;
        }
        return h;
    }

    /// Unsent PDUs with their discard instants, for delay status reporting.
    std::vector<DsrCandidate> DsrView() const
    {
        std::vector<DsrCandidate> out;
        out.reserve(m_queue.size());
        for (const auto& e : m_queue) {
            Micros at = m_profile.discardTimer == kNoDeadline ? kNoDeadline : e.pdu.arrival + m_profile.discardTimer;
            out.push_back(DsrCandidate{e.pdu.id, at, e.pdu.bytes - e.sent});
        }
        return out;
    }

    /// FIFO dequeue of up to `budget` bytes; PDUs may be split across TBs.
    std::vector<Segment> Dequeue(std::uint64_t budget, Micros now)
    {
        std::vector<Segment> out;
        while (budget > 0 && !m_queue.empty()) {
            Entry& e = m_queue.front();
            std::uint32_t left = e.pdu.bytes - e.sent;
            auto take = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, budget));
            out.push_back(Segment{e.pdu.id, e.pdu.setId, take});
            e.sent += take;
            budget -= take;
            m_unsent -= take;
            m_progress[e.pdu.id].inFlight += take;
            m_sets[e.pdu.setId].bytesTransmitted += take;
            Log(now, PduEventKind::Transmitted, e.pdu.id, e.pdu.setId, take);
            if (e.sent == e.pdu.bytes) {
                m_queue.pop_front();
            }
        }
        return out;
    }

    /// Successful delivery of segments. Returns the PDUs completed by them.
    std::vector<Segment> OnDelivered(std::span<const Segment> segs, Micros now)
    {
        std::vector<Segment> done;
        for (const auto& s : segs) {
            auto it = m_progress.find(s.pdu);
            if (it == m_progress.end()) {
                continue;
            }
            Progress& p = it->second;
            p.inFlight -= s.bytes;
            p.delivered += s.bytes;
            if (!p.lost && p.delivered == p.bytes) {
                Log(now, PduEventKind::Delivered, s.pdu, s.set, p.bytes);
                SetRecord& r = m_sets[s.set];
                ++r.pdusDelivered;
                if (r.Complete()) {
                    r.completion = now;
                }
                done.push_back(Segment{s.pdu, s.set, p.bytes});
                m_progress.erase(it);
            }
        }
        return done;
    }

    /// Segments whose TB exhausted HARQ. The PDU is lost, its unsent
    /// remainder dropped, and with PSIHI the rest of its set too.
    std::vector<PduId> OnLost(std::span<const Segment> segs, Micros now)
    {
        std::vector<PduId> discarded;
        for (const auto& s : segs) {
            auto it = m_progress.find(s.pdu);
            if (it == m_progress.end() || it->second.lost) {
                continue;
            }
            it->second.lost = true;
            Log(now, PduEventKind::Lost, s.pdu, s.set, s.bytes);
            RemoveIf([&](const Entry& e) { return e.pdu.id == s.pdu; });
            MarkSetLost(s.set, now);
            auto more = PsihiDiscard(s.set, now);
            discarded.insert(discarded.end(), more.begin(), more.end());
        }
        return discarded;
    }

    /// Drops every queued PDU of a damaged set when PSIHI is configured.
    std::vector<PduId> PsihiDiscard(PduSetId set, Micros now)
    {
        std::vector<PduId> out;
        if (!m_profile.psihi) {
            return out;
        }
        RemoveIf([&](const Entry& e) {
            if (e.pdu.setId != set) {
                return false;
            }
            out.push_back(e.pdu.id);
            Log(now, PduEventKind::Discarded, e.pdu.id, set, e.pdu.bytes - e.sent, DiscardCause::Psihi);
            m_progress[e.pdu.id].lost = true;
            return true;
        });
        if (!out.empty()) {
            MarkSetLost(set, now);
        }
        return out;
    }

    /// Timer-based discard of PDUs not yet handed to lower layers.
    std::vector<PduId> DiscardExpired(Micros now)
    {
        std::vector<PduId> out;
        if (m_profile.discardTimer == kNoDeadline) {
            return out;
        }
        std::vector<PduSetId> damaged;
        RemoveIf([&](const Entry& e) {
            if (e.sent != 0 || now - e.pdu.arrival <= m_profile.discardTimer) {
                return false;
            }
            out.push_back(e.pdu.id);
            Log(now, PduEventKind::Discarded, e.pdu.id, e.pdu.setId, e.pdu.bytes, DiscardCause::Timer);
            m_progress[e.pdu.id].lost = true;
            damaged.push_back(e.pdu.setId);
            return true;
        });
        for (auto s : damaged) {
            MarkSetLost(s, now);
            PsihiDiscard(s, now);
        }
        return out;
    }

    /// Projected sojourn of the newest byte: HOL age plus drain time.
    Micros ProjectedSojourn(Micros now, double drainBps) const
    {
        if (m_queue.empty()) {
            return 0;
        }
        double drainUs = drainBps > 0.0 ? static_cast<double>(m_unsent) * 8.0 / drainBps * 1e6 : 1e18;
        return (now - m_queue.front().pdu.arrival) + static_cast<Micros>(std::min(drainUs, 1e15));
    }

    bool Congested(Micros now, double drainBps) const
    {
        return static_cast<double>(ProjectedSojourn(now, drainBps))
               > m_profile.psiCongestionFraction * static_cast<double>(m_profile.psdb);
    }

    /// Under congestion drops whole untouched PDU sets below the top PSI
    /// level, least important first and oldest first within a level.
    std::vector<PduSetId> PsiDiscard(Micros now, double drainBps)
    {
        std::vector<PduSetId> dropped;
        while (Congested(now, drainBps)) {
            std::optional<PduSetId> victim;
            int victimPsi = m_profile.psiLevels - 1;
            for (const auto& e : m_queue) {
                if (e.pdu.psi >= m_profile.psiLevels - 1 || e.pdu.psi >= victimPsi) {
                    continue;
                }
                if (m_sets.at(e.pdu.setId).bytesTransmitted != 0) {
                    continue;
                }
                victim = e.pdu.setId;
                victimPsi = e.pdu.psi;
            }
            if (!victim) {
                break;
            }
            PduSetId v = *victim;
            RemoveIf([&](const Entry& e) {
                if (e.pdu.setId != v) {
                    return false;
                }
                Log(now, PduEventKind::Discarded, e.pdu.id, v, e.pdu.bytes, DiscardCause::Psi);
                m_progress[e.pdu.id].lost = true;
                return true;
            });
            MarkSetLost(v, now);
            dropped.push_back(v);
        }
        return dropped;
    }

    const std::map<PduSetId, SetRecord>& Sets() const { return m_sets; }
    std::uint64_t TotalSets() const { return m_sets.size(); }
    std::uint64_t LostSets() const { return m_lostSets; }
    double Pser() const { return m_sets.empty() ? 0.0 : static_cast<double>(m_lostSets) / m_sets.size(); }

    /// Sets marked lost since the previous call.
    std::vector<PduSetId> TakeLostSets() { return std::exchange(m_newlyLost, {}); }

    /// Drop bookkeeping for sets that can no longer change.
    void ForgetSet(PduSetId id) { m_sets.erase(id); }

private:
    struct Entry {
        Pdu pdu;
        std::uint32_t sent = 0;
    };

    struct Progress {
        std::uint32_t bytes = 0;
        std::uint32_t delivered = 0;
        std::uint32_t inFlight = 0;
        bool lost = false;
    };

    template <typename Pred>
    void RemoveIf(Pred pred)
    {
        auto it = std::remove_if(m_queue.begin(), m_queue.end(), [&](const Entry& e) {
            if (pred(e)) {
                m_unsent -= e.pdu.bytes - e.sent;
                return true;
            }
            return false;
        });
        m_queue.erase(it, m_queue.end());
    }

    void MarkSetLost(PduSetId id, Micros)
    {
        SetRecord& r = m_sets[id];
        if (!r.lost) {
            r.lost = true;
            ++m_lostSets;
            m_newlyLost.push_back(id);
        }
    }

    void Log(Micros t, PduEventKind k, PduId p, PduSetId s, std::uint32_t bytes,
             DiscardCause c = DiscardCause::Timer)
    {
        if (m_log) {
            m_log->push_back(PduEvent{t, k, p, s, bytes, c});
        }
    }

    QosFlowProfile m_profile;
    std::deque<Entry> m_queue;
    std::uint64_t m_unsent = 0;
    std::unordered_map<PduId, Progress> m_progress;
    std::map<PduSetId, SetRecord> m_sets;
    std::uint64_t m_lostSets = 0;
    std::vector<PduSetId> m_newlyLost;
    std::vector<PduEvent>* m_log = nullptr;
};

} // namespace xrsim
