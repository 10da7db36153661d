#pragma once

#include "xrsim/core/time.hpp"
#include "xrsim/traffic/pdu.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_set>

namespace xrsim {

/// Buffered data as seen by the DSR logic: remaining time is measured
/// against the gNB-configured discard timer, not the PSDB.
struct DsrCandidate {
    PduId pdu = 0;
    Micros discardAt = kNoDeadline;
    std::uint64_t bytes = 0;
};

struct DsrReport {
    int lcgId = 0;
    Micros smallestRemaining = 0;   // referenced to the scheduled TX slot
    std::uint64_t bytesBelowThreshold = 0;
    Micros referenceTime = 0;       // T3: first scheduled transmission
};

/// Per-LCG delay status reporting. A PDU contributes to at most one report.
class DsrTracker {
public:
    explicit DsrTracker(Micros threshold, int lcg = 0) : m_threshold(threshold), m_lcg(lcg) {}

    Micros Threshold() const { return m_threshold; }

    /// Earliest instant at which some unreported PDU's remaining time drops
    /// to the threshold.
    std::optional<Micros> TriggerTime(std::span<const DsrCandidate> buffered) const
    {
        std::optional<Micros> best;
        for (const auto& c : buffered) {
            if (c.discardAt == kNoDeadline || m_reported.count(c.pdu)) {
                continue;
            }
            Micros t = c.discardAt - m_threshold;
            if (!best || t < *best) {
                best = t;
            }
        }
        return best;
    }

    bool Triggered(std::span<const DsrCandidate> buffered, Micros now) const
    {
        auto t = TriggerTime(buffered);
        return t && *t <= now;
    }

    /// Builds the report carried in the grant at `scheduledTx` and marks the
    /// covered PDUs as reported. Empty if nothing is below threshold at T3.
    std::optional<DsrReport> Build(std::span<const DsrCandidate> buffered, Micros scheduledTx)
    {
        DsrReport r;
        r.lcgId = m_lcg;
        r.referenceTime = scheduledTx;
        r.smallestRemaining = std::numeric_limits<Micros>::max();
        bool any = false;
        for (const auto& c : buffered) {
            if (c.discardAt == kNoDeadline) {
                continue;
            }
            Micros remaining = std::max<Micros>(c.discardAt - scheduledTx, 0);
            if (remaining <= m_threshold && !m_reported.count(c.pdu)) {
                any = true;
                r.smallestRemaining = std::min(r.smallestRemaining, remaining);
                r.bytesBelowThreshold += c.bytes;
                m_reported.insert(c.pdu);
            }
        }
        if (!any) {
            return std::nullopt;
        }
        return r;
    }

    bool WasReported(PduId id) const { return m_reported.count(id) != 0; }

    void Forget(PduId id) { m_reported.erase(id); }

private:
    Micros m_threshold;
    int m_lcg;
    std::unordered_set<PduId> m_reported;
};

} // namespace xrsim
