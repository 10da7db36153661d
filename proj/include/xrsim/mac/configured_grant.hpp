#pragma once

#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/radio/link_adaptation.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct CgConfig {
    Rational periodicityMs{50, 3};
    int occasionsPerPeriod = 1;
    int rbPerOccasion = 40;
    int mcs = 20;
    bool trackCsi = false;        // use the CSI-selected MCS instead of `mcs`
    int utoUciWindow = 4;         // N
    Rational startOffsetMs{0};

    void Validate() const
    {
        if (periodicityMs <= 0 || occasionsPerPeriod < 1 || rbPerOccasion < 1 || rbPerOccasion > kNumRb
            || mcs < 0 || mcs >= kNumMcs || utoUciWindow < 1 || startOffsetMs < 0) {
            throw std::invalid_argument("invalid configured grant parameters");
        }
        // consecutive U slots recur once per TDD period
        Rational span = Rational(occasionsPerPeriod * kTddPeriod * kSlotUs, kMsUs);
        if (periodicityMs < span) {
            throw std::invalid_argument("CG period is shorter than its occasions");
        }
    }
};

struct CgOccasion {
    std::int64_t slot = 0;
    std::int64_t period = 0;
    int indexInPeriod = 0;
    int rbCount = 0;
    int mcs = 0;
};

/// Start of period k in exact arithmetic (ms).
inline Rational CgPeriodStartMs(const CgConfig& cfg, std::int64_t k)
{
    return cfg.startOffsetMs + cfg.periodicityMs * Rational(k);
}

/// Occasions on the first `occasionsPerPeriod` U slots at or after each
/// period start, for every period starting before `horizon`.
inline std::vector<CgOccasion> CgOccasions(const CgConfig& cfg, Micros horizon)
{
    cfg.Validate();
    std::vector<CgOccasion> out;
    const Rational slotMs(kSlotUs, kMsUs);
    for (std::int64_t k = 0;; ++k) {
        Rational start = CgPeriodStartMs(cfg, k);
        if (FloorMicros(start) >= horizon) {
            break;
        }
        Rational slots = start / slotMs;
        std::int64_t first = slots.numerator() / slots.denominator();
        if (slots.numerator() % slots.denominator() != 0) {
            ++first;
        }
        std::int64_t s = NextSlotFor(Direction::Uplink, first);
        for (int i = 0; i < cfg.occasionsPerPeriod; ++i) {
            out.push_back(CgOccasion{s, k, i, cfg.rbPerOccasion, cfg.mcs});
            s = NextSlotFor(Direction::Uplink, s + 1);
        }
    }
    return out;
}

/// Bit i = 1 when occasion i would carry no payload after draining the
/// buffer through the next N occasions in order.
inline std::vector<bool> BuildUtoUci(std::uint64_t bufferBytes, std::span<const std::uint64_t> capacityBytes, int n)
{
    if (n < 1) {
        throw std::invalid_argument("UTO-UCI window must be at least one occasion");
    }
    if (capacityBytes.size() < static_cast<std::size_t>(n)) {
        throw std::invalid_argument("fewer occasion capacities than the UTO-UCI window");
    }
    std::vector<bool> bits(n, true);
    for (int i = 0; i < n; ++i) {
        std::uint64_t carry = std::min(bufferBytes, capacityBytes[i]);
        bits[i] = carry == 0;
        bufferBytes -= carry;
    }
    return bits;
}

struct ReclaimedRbs {
    std::int64_t slot = 0;
    int rbCount = 0;
};

/// Occasions flagged unused return their RBs to the dynamic pool. Entries
/// for occasions already in the past are ignored.
inline std::vector<ReclaimedRbs> ReclaimUnused(const std::vector<bool>& bitmap, std::span<const CgOccasion> window,
                                               std::int64_t nowSlot)
{
    std::vector<ReclaimedRbs> out;
    std::size_t n = std::min(bitmap.size(), window.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (bitmap[i] && window[i].slot >= nowSlot) {
            out.push_back(ReclaimedRbs{window[i].slot, window[i].rbCount});
        }
    }
    return out;
}

} // namespace xrsim
