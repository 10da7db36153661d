#pragma once

#include "xrsim/core/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace xrsim {

inline constexpr int kNumMcs = 28;
inline constexpr double kSeCap = 7.8;         // 8 bits/symbol x 0.975
inline constexpr double kSeAttenuation = 0.75;
inline constexpr double kTargetBler = 0.1;
inline constexpr int kHarqRttSlots = 8;
inline constexpr int kHarqMaxRetx = 3;
inline constexpr double kChaseCombiningGainDb = 3.0;

/// 256-QAM MCS ladder: the NR 256-QAM table efficiencies rescaled so the top
/// entry equals the SE cap.
inline const std::array<double, kNumMcs>& McsSpectralEfficiency()
{
    static const std::array<double, kNumMcs> table = [] {
        constexpr std::array<double, kNumMcs> nr{
            0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.6953, 1.9141, 2.1602, 2.4063,
            2.5703, 2.7305, 3.0293, 3.3223, 3.6094, 3.9023, 4.2129, 4.5234, 4.8164, 5.1152,
            5.3320, 5.5547, 5.8906, 6.2266, 6.5703, 6.9141, 7.1602, 7.4063};
        std::array<double, kNumMcs> out{};
        for (int i = 0; i < kNumMcs; ++i) {
            out[i] = nr[i] * kSeCap / nr[kNumMcs - 1];
        }
        return out;
    }();
    return table;
}

/// Shannon-gap mapping before quantization.
inline double ContinuousSe(double sinrDb)
{
    double lin = std::pow(10.0, sinrDb / 10.0);
    return std::min(kSeCap, kSeAttenuation * std::log2(1.0 + lin));
}

/// SINR at which an MCS has exactly the target first-transmission BLER.
inline double McsThresholdDb(int mcs)
{
    double se = McsSpectralEfficiency().at(mcs);
    return 10.0 * std::log10(std::exp2(se / kSeAttenuation) - 1.0);
}

struct McsChoice {
    int index = 0;
    double spectralEfficiency = 0.0;
};

/// Highest MCS whose BLER at the CSI SINR stays within target; MCS 0 in outage.
inline McsChoice SelectMcs(double csiSinrDb)
{
    int best = 0;
    for (int m = 0; m < kNumMcs; ++m) {
        if (McsThresholdDb(m) <= csiSinrDb) {
            best = m;
        }
    }
    return McsChoice{best, McsSpectralEfficiency()[best]};
}

inline std::uint64_t TbBits(double spectralEfficiency, int nRb, int dataSymbols)
{
    if (nRb <= 0 || dataSymbols <= 0) {
        return 0;
    }
    return static_cast<std::uint64_t>(std::floor(spectralEfficiency * nRb * 12.0 * dataSymbols + 1e-9));
}

inline std::uint64_t TbBitsForMcs(int mcs, int nRb, int dataSymbols)
{
    return TbBits(McsSpectralEfficiency().at(mcs), nRb, dataSymbols);
}

/// Smallest RB count whose TB carries at least `bits`, capped at maxRb.
inline int RbsForBits(std::uint64_t bits, double se, int dataSymbols, int maxRb)
{
    if (bits == 0) {
        return 0;
    }
    double perRb = se * 12.0 * dataSymbols;
    int n = static_cast<int>(std::ceil(static_cast<double>(bits) / perRb));
    n = std::max(n, 1);
    while (n < maxRb && TbBits(se, n, dataSymbols) < bits) {
        ++n;
    }
    return std::min(n, maxRb);
}

/// Logistic BLER curve: one decade of error per dB in the tail, positioned
/// so BLER(threshold) equals the target.
inline double Bler(int mcs, double effectiveSinrDb)
{
    const double k = 1.0 / std::log(10.0);
    const double mid = McsThresholdDb(mcs) - k * std::log((1.0 - kTargetBler) / kTargetBler);
    return 1.0 / (1.0 + std::exp((effectiveSinrDb - mid) / k));
}

enum class HarqOutcome { Ack, Nack };

struct HarqProcess {
    std::uint64_t tbBits = 0;
    int mcs = 0;
    int maxRetx = kHarqMaxRetx;
    int attempts = 0;
    std::vector<HarqOutcome> outcomes;

    bool Exhausted() const { return attempts >= maxRetx + 1; }
    bool Succeeded() const { return !outcomes.empty() && outcomes.back() == HarqOutcome::Ack; }
};

/// One transmission attempt. Each retransmission adds the Chase-combining
/// gain to the effective SINR.
inline HarqOutcome HarqAttempt(HarqProcess& p, double sinrDb, Rng& rng)
{
    if (p.Exhausted()) {
        throw std::logic_error("HARQ attempts exhausted");
    }
    double eff = sinrDb + kChaseCombiningGainDb * p.attempts;
    ++p.attempts;
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto out = u < Bler(p.mcs, eff) ? HarqOutcome::Nack : HarqOutcome::Ack;
    p.outcomes.push_back(out);
    return out;
}

} // namespace xrsim
