#pragma once

#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/radio/channel.hpp"
#include "xrsim/radio/link_adaptation.hpp"
#include "xrsim/traffic/pdu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrsim {

enum class SchedulerKind { ProportionalFair, Mlwdf, PduSetAware };

inline const char* ToString(SchedulerKind k)
{
    switch (k) {
    case SchedulerKind::ProportionalFair: return "pf";
    case SchedulerKind::Mlwdf: return "mlwdf";
    case SchedulerKind::PduSetAware: return "pduset";
    }
    return "?";
}

inline SchedulerKind ParseSchedulerKind(const std::string& s)
{
    if (s == "pf") {
        return SchedulerKind::ProportionalFair;
    }
    if (s == "mlwdf") {
        return SchedulerKind::Mlwdf;
    }
    if (s == "pduset") {
        return SchedulerKind::PduSetAware;
    }
    throw std::invalid_argument("unknown scheduler '" + s + "' (expected pf, mlwdf or pduset)");
}

struct SchedulerPolicy {
    SchedulerKind kind = SchedulerKind::ProportionalFair;
    int pfAvgWindow = 100;          // slots
    double pdusetAlpha = 1.0;
    Micros epsilonTime = Ms(1);
    double floorFactor = 1e-3;      // expired score = smallest positive score x factor
    double mlwdfTargetLoss = 0.01;

    void Validate() const
    {
        if (pfAvgWindow < 1 || pdusetAlpha < 0.0 || epsilonTime <= 0 || floorFactor <= 0.0
            || !(mlwdfTargetLoss > 0.0 && mlwdfTargetLoss < 1.0)) {
            throw std::invalid_argument("scheduler policy parameters must be positive");
        }
    }
};

/// Smallest average used in ratio metrics, bits per slot.
inline constexpr double kMinAvgThroughput = 1.0;

inline double PfMetric(double instRate, double avgThroughput)
{
    return instRate / std::max(avgThroughput, kMinAvgThroughput);
}

/// HOL delay and PSDB in the same time unit.
inline double MlwdfMetric(double instRate, double avgThroughput, double holDelay, double psdb, double targetLoss = 0.01)
{
    double a = -std::log(targetLoss) / psdb;
    return a * holDelay * PfMetric(instRate, avgThroughput);
}

/// Exponential in the transmitted share of the head set, inverse in the
/// remaining budget. Returns nullopt for an expired set; the caller assigns
/// the floor value.
inline std::optional<double> PduSetMetric(std::uint64_t sentBits, std::uint64_t setBits, Micros remaining,
                                          const SchedulerPolicy& p)
{
    if (setBits == 0) {
        throw std::invalid_argument("PDU set of zero size");
    }
    if (remaining <= 0) {
        return std::nullopt;
    }
    double ratio = static_cast<double>(sentBits) / static_cast<double>(setBits);
    double tauMs = ToMs(std::max(remaining, p.epsilonTime));
    return std::exp(p.pdusetAlpha * ratio) / tauMs;
}

/// Exponentially smoothed throughput over a window of slots.
inline double UpdateAverage(double avg, double servedBits, int window)
{
    double w = 1.0 / window;
    return (1.0 - w) * avg + w * servedBits;
}

struct DlCandidate {
    int ue = 0;
    bool xr = true;
    std::uint64_t queuedBits = 0;     // pending bits including retransmission-free backlog
    bool fullBuffer = false;
    double spectralEfficiency = 0.0;
    int mcs = 0;
    double avgThroughput = 0.0;       // bits per slot
    Micros holDelay = 0;
    Micros psdb = Ms(10);
    std::uint64_t headSetBits = 0;
    std::uint64_t headSentBits = 0;
    Micros remainingBudget = 0;
};

struct Allocation {
    int ue = 0;
    Direction direction = Direction::Downlink;
    std::int64_t slot = 0;
    int rbStart = 0;
    int rbCount = 0;
    int mcs = 0;
    std::uint64_t tbBits = 0;
    std::vector<PduId> pdus;
    bool retransmission = false;
};

/// Scores for every candidate under the active policy. Expired sets receive
/// the floor (smallest positive score in the set times the floor factor).
inline std::vector<double> ComputeMetrics(std::span<const DlCandidate> c, const SchedulerPolicy& p, int dataSymbols)
{
    std::vector<double> score(c.size(), 0.0);
    std::vector<bool> expired(c.size(), false);
    for (std::size_t i = 0; i < c.size(); ++i) {
        double inst = c[i].spectralEfficiency * 12.0 * dataSymbols * kNumRb;
        switch (p.kind) {
        case SchedulerKind::ProportionalFair: score[i] = PfMetric(inst, c[i].avgThroughput); break;
        case SchedulerKind::Mlwdf:
            score[i] = MlwdfMetric(inst, c[i].avgThroughput, ToMs(c[i].holDelay), ToMs(c[i].psdb), p.mlwdfTargetLoss);
            break;
        case SchedulerKind::PduSetAware: {
            auto m = PduSetMetric(c[i].headSentBits, std::max<std::uint64_t>(c[i].headSetBits, 1),
                                  c[i].remainingBudget, p);
            if (m) {
                score[i] = *m;
            } else {
                expired[i] = true;
            }
            break;
        }
        }
    }
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!expired[i] && score[i] > 0.0) {
            smallest = std::min(smallest, score[i]);
        }
    }
    if (!std::isfinite(smallest)) {
        smallest = 1.0;
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (expired[i]) {
            score[i] = smallest * p.floorFactor;
        }
    }
    return score;
}

/// Candidate order by descending score, ties by UE id.
inline std::vector<std::size_t> RankByScore(std::span<const double> score, std::span<const DlCandidate> c)
{
    std::vector<std::size_t> idx(c.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) {
            return score[a] > score[b];
        }
        return c[a].ue < c[b].ue;
    });
    return idx;
}

/// DL allocation for one slot. XR UEs have hard priority ordered by the
/// policy metric; eMBB UEs share what is left by PF. RBs are handed out as
/// contiguous chunks starting at `firstRb`.
inline std::vector<Allocation> AllocateDl(std::int64_t slot, std::span<const DlCandidate> candidates,
                                          const SchedulerPolicy& policy, int availableRb = kNumRb, int firstRb = 0)
{
    std::vector<Allocation> out;
    int sym = DataSymbols(SlotTypeOf(slot), Direction::Downlink);
    if (sym == 0 || candidates.empty() || availableRb <= 0) {
        return out;
    }
    std::vector<DlCandidate> xr;
    std::vector<DlCandidate> embb;
    for (const auto& c : candidates) {
        if (!c.fullBuffer && c.queuedBits == 0) {
            continue;
        }
        (c.xr ? xr : embb).push_back(c);
    }
    int next = firstRb;
    int left = availableRb;
    auto grant = [&](const DlCandidate& c) {
        int need = c.fullBuffer ? left : RbsForBits(c.queuedBits, c.spectralEfficiency, sym, left);
        if (need <= 0) {
            return;
        }
        Allocation a;
        a.ue = c.ue;
        a.direction = Direction::Downlink;
        a.slot = slot;
        a.rbStart = next;
        a.rbCount = need;
        a.mcs = c.mcs;
        a.tbBits = TbBits(c.spectralEfficiency, need, sym);
        out.push_back(std::move(a));
        next += need;
        left -= need;
    };

    auto xrScore = ComputeMetrics(xr, policy, sym);
    for (auto i : RankByScore(xrScore, xr)) {
        if (left == 0) {
            break;
        }
        grant(xr[i]);
    }
    SchedulerPolicy pf = policy;
    pf.kind = SchedulerKind::ProportionalFair;
    auto embbScore = ComputeMetrics(embb, pf, sym);
    for (auto i : RankByScore(embbScore, embb)) {
        if (left == 0) {
            break;
        }
        grant(embb[i]);
    }
    return out;
}

struct UlCandidate {
    int ue = 0;
    std::uint64_t estimatedBytes = 0;   // gNB view of the UE buffer incl. report overhead
    double spectralEfficiency = 0.0;
    int mcs = 0;
    double pathlossDb = 0.0;
    Micros waiting = 0;                 // age of the oldest unserved report
};

/// Dynamic UL grants for one U slot. Every UE with a positive estimate is
/// ranked by waiting time. If demand fits, everyone gets its need; otherwise
/// RBs are shared in proportion to need, and any remainder goes out in rank
/// order. Each grant is capped so the UE stays out of power limitation.
/// RBs [availableRb, 273) are held by configured grants.
inline std::vector<Allocation> AllocateUl(std::int64_t slot, std::span<const UlCandidate> candidates,
                                          int availableRb = kNumRb)
{
    std::vector<Allocation> out;
    int sym = DataSymbols(SlotTypeOf(slot), Direction::Uplink);
    if (sym == 0) {
        return out;
    }
    int avail = std::clamp(availableRb, 0, kNumRb);
    std::vector<std::size_t> order;
    std::vector<int> need(candidates.size(), 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (c.estimatedBytes == 0) {
            continue;
        }
        int cap = MaxRbWithoutPowerLimit(c.pathlossDb);
        need[i] = std::min(RbsForBits(c.estimatedBytes * 8, c.spectralEfficiency, sym, kNumRb), cap);
        order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidates[a].waiting != candidates[b].waiting) {
            return candidates[a].waiting > candidates[b].waiting;
        }
        return candidates[a].ue < candidates[b].ue;
    });
    std::int64_t total = 0;
    for (auto i : order) {
        total += need[i];
    }
    std::vector<int> give(candidates.size(), 0);
    if (total <= avail) {
        for (auto i : order) {
            give[i] = need[i];
        }
    } else {
        int used = 0;
        for (auto i : order) {
            give[i] = static_cast<int>(static_cast<std::int64_t>(avail) * need[i] / total);
            used += give[i];
        }
        for (auto i : order) {
            int extra = std::min(need[i] - give[i], avail - used);
            give[i] += extra;
            used += extra;
        }
    }
    int pos = 0;
    for (auto i : order) {
        if (give[i] <= 0) {
            continue;
        }
        Allocation a;
        a.ue = candidates[i].ue;
        a.direction = Direction::Uplink;
        a.slot = slot;
        a.rbStart = pos;
        a.rbCount = give[i];
        a.mcs = candidates[i].mcs;
        a.tbBits = TbBits(candidates[i].spectralEfficiency, give[i], sym);
        pos += give[i];
        out.push_back(std::move(a));
    }
    return out;
}

/// True when no two allocations share an RB and the total fits the carrier.
inline bool RbDisjoint(std::span<const Allocation> allocs)
{
    std::vector<bool> used(kNumRb, false);
    for (const auto& a : allocs) {
        if (a.rbStart < 0 || a.rbCount < 0 || a.rbStart + a.rbCount > kNumRb) {
            return false;
        }
        for (int r = a.rbStart; r < a.rbStart + a.rbCount; ++r) {
            if (used[r]) {
                return false;
            }
            used[r] = true;
        }
    }
    return true;
}

} // namespace xrsim
