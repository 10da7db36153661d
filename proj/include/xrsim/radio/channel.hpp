#pragma once

#include "xrsim/core/tdd.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace xrsim {

// FR1 InH link budget constants.
inline constexpr double kCarrierGhz = 4.0;
inline constexpr double kBsTxPowerDbm = 31.0;
inline constexpr double kBsAntennaGainDbi = 5.0;
inline constexpr double kUeAntennaGainDbi = 0.0;
inline constexpr double kBsNoiseFigureDb = 5.0;
inline constexpr double kUeNoiseFigureDb = 9.0;
inline constexpr double kThermalNoiseDbmHz = -174.0;
inline constexpr double kSubcarrierHz = 30e3;
inline constexpr double kUeMaxTxPowerDbm = 23.0;
inline constexpr double kUlP0Dbm = -93.0;
inline constexpr double kUlAlpha = 1.0;
inline constexpr double kShadowingStdDb = 3.0;

inline double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }
inline double LinearToDb(double lin) { return 10.0 * std::log10(lin); }

/// InH-Office LOS pathloss, no shadowing. Distances under 1 m are clamped.
inline double PathlossDb(double distance3dM, double fcGhz = kCarrierGhz)
{
    double d = std::max(distance3dM, 1.0);
    return 32.4 + 17.3 * std::log10(d) + 20.0 * std::log10(fcGhz);
}

/// Noise power in one RB (12 subcarriers).
inline double NoisePerRbDbm(double noiseFigureDb)
{
    return kThermalNoiseDbmHz + LinearToDb(12.0 * kSubcarrierHz) + noiseFigureDb;
}

/// Received signal/interference are per-RB powers in dBm.
inline double SinrDb(double signalDbm, std::span<const double> interferenceDbm, double noiseDbm)
{
    double denom = DbToLinear(noiseDbm);
    for (double i : interferenceDbm) {
        denom += DbToLinear(i);
    }
    return signalDbm - LinearToDb(denom);
}

/// BS power is spread evenly over the full carrier.
inline double DlTxPsdDbm() { return kBsTxPowerDbm - LinearToDb(kNumRb); }

/// DL per-RB SINR from the serving coupling loss and the interferers'
/// coupling losses weighted by the fraction of the band each one occupies.
struct DlInterferer {
    double couplingLossDb;
    double activity;   // 0..1 share of RBs in use
};

inline double DlSinrDb(double servingCouplingLossDb, std::span<const DlInterferer> interferers)
{
    double s = DlTxPsdDbm() - servingCouplingLossDb;
    double denom = DbToLinear(NoisePerRbDbm(kUeNoiseFigureDb));
    for (const auto& i : interferers) {
        if (i.activity > 0.0) {
            denom += i.activity * DbToLinear(DlTxPsdDbm() - i.couplingLossDb);
        }
    }
    return s - LinearToDb(denom);
}

/// Open-loop UL power control with full pathloss compensation.
inline double UlTxPowerDbm(int nRb, double pathlossDb)
{
    nRb = std::clamp(nRb, 1, kNumRb);
    return std::min(kUeMaxTxPowerDbm, kUlP0Dbm + LinearToDb(nRb) + kUlAlpha * pathlossDb);
}

/// Received PSD per RB at the BS for the given allocation size.
inline double UlRxPsdDbm(int nRb, double pathlossDb)
{
    return UlTxPowerDbm(nRb, pathlossDb) - LinearToDb(std::clamp(nRb, 1, kNumRb)) - pathlossDb;
}

/// Largest allocation that still reaches P0 per RB.
inline int MaxRbWithoutPowerLimit(double pathlossDb)
{
    double headroom = kUeMaxTxPowerDbm - kUlP0Dbm - kUlAlpha * pathlossDb;
    if (headroom < 0.0) {
        return 1;
    }
    double n = std::floor(DbToLinear(headroom) + 1e-9);
    return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(kNumRb)));
}

} // namespace xrsim
