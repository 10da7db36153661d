#pragma once

#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/traffic/pdu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct QosFlowProfile {
    Micros psdb = Ms(10);
    double pser = 0.01;
    bool psihi = false;
    int psiLevels = 2;                  // levels 0..psiLevels-1, top level never PSI-dropped
    Direction direction = Direction::Downlink;
    Micros discardTimer = kNoDeadline;  // kNoDeadline disables timer discard
    double psiCongestionFraction = 0.8; // congestion when projected sojourn > fraction x PSDB
    bool psiDiscard = false;

    void Validate() const
    {
        if (psdb <= 0) {
            throw std::invalid_argument("PSDB must be positive");
        }
        if (pser < 0.0 || pser > 1.0) {
            throw std::invalid_argument("PSER must lie in [0, 1]");
        }
        if (psiLevels < 1) {
            throw std::invalid_argument("need at least one PSI level");
        }
        if (discardTimer <= 0) {
            throw std::invalid_argument("discard timer must be positive");
        }
    }
};

/// QoS flow : DRB : logical channel mapping alternatives.
enum class MappingConfig { OneOneOne, NOneOne, NNOne };

inline const char* ToString(MappingConfig m)
{
    switch (m) {
    case MappingConfig::OneOneOne: return "1:1:1";
    case MappingConfig::NOneOne: return "N:1:1";
    case MappingConfig::NNOne: return "N:N:1";
    }
    return "?";
}

/// Stamps the per-PDU metadata the RAN would learn from the user-plane
/// headers. Under N:N:1 the set boundaries are only exposed to the scheduler
/// when `nnOneVisible` is set; ids stay on the PDUs for accounting either way.
inline void AnnotateMetadata(std::vector<PduSet>& sets, MappingConfig mapping, bool nnOneVisible = false)
{
    bool visible = mapping != MappingConfig::NNOne || nnOneVisible;
    for (auto& s : sets) {
        auto n = static_cast<std::uint32_t>(s.pdus.size());
        for (std::size_t i = 0; i < s.pdus.size(); ++i) {
            auto& p = s.pdus[i];
            p.setId = s.id;
            p.frameId = s.frameId;
            p.setBytes = static_cast<std::uint32_t>(s.totalBytes);
            p.setPduCount = n;
            p.psi = s.psi;
            p.lastOfSet = (i + 1 == s.pdus.size());
            p.setVisible = visible;
        }
    }
}

/// Best rational approximation with bounded denominator (continued fractions).
inline Rational ApproximateRational(double x, std::int64_t maxDenominator, double tolerance)
{
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double v = x;
    for (int iter = 0; iter < 64; ++iter) {
        auto a = static_cast<std::int64_t>(std::floor(v));
        std::int64_t h2 = a * h1 + h0;
        std::int64_t k2 = a * k1 + k0;
        if (k2 > maxDenominator) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= tolerance) {
            break;
        }
        double frac = v - static_cast<double>(a);
        if (frac < 1e-12) {
            break;
        }
        v = 1.0 / frac;
    }
    if (k1 == 0) {
        return Rational(static_cast<std::int64_t>(std::llround(x)));
    }
    return Rational(h1, k1);
}

struct UaiMessage {
    int flowId = 0;
    Micros time = 0;
    Micros expectedArrival = 0;
    Rational periodicityMs{0};
    Micros jitterMin = 0;
    Micros jitterMax = 0;
    std::vector<int> psiLevels;
};

/// UE-side assistance information for one UL flow, rate limited by a
/// prohibit timer that restarts on every emission.
class UaiBuilder {
public:
    UaiBuilder(int flowId, Micros prohibitTimer) : m_flowId(flowId), m_prohibit(prohibitTimer) {}

    void Observe(Micros arrival, int psi = kPsiHigh)
    {
        m_arrivals.push_back(arrival);
        if (std::find(m_psi.begin(), m_psi.end(), psi) == m_psi.end()) {
            m_psi.push_back(psi);
        }
    }

    std::optional<UaiMessage> Build(Micros now)
    {
        if (m_arrivals.size() < 2) {
            return std::nullopt;
        }
        if (m_lastEmit && now - *m_lastEmit < m_prohibit) {
            return std::nullopt;
        }
        std::size_t n = m_arrivals.size();
        double meanUs = static_cast<double>(m_arrivals.back() - m_arrivals.front()) / static_cast<double>(n - 1);
        // 1 us tolerance absorbs the integer-microsecond arrival clock
        Rational period = ApproximateRational(meanUs / 1000.0, 1000, 1e-3);
        Micros jMin = 0, jMax = 0;
        for (std::size_t k = 0; k < n; ++k) {
            Micros nominal = m_arrivals.front()
                             + FloorMicros(period * Rational(static_cast<std::int64_t>(k)));
            Micros d = m_arrivals[k] - nominal;
            jMin = std::min(jMin, d);
            jMax = std::max(jMax, d);
        }
        UaiMessage m;
        m.flowId = m_flowId;
        m.time = now;
        m.periodicityMs = period;
        m.expectedArrival = m_arrivals.front() + FloorMicros(period * Rational(static_cast<std::int64_t>(n)));
        m.jitterMin = jMin;
        m.jitterMax = jMax;
        m.psiLevels = m_psi;
        m_lastEmit = now;
        return m;
    }

private:
    int m_flowId;
    Micros m_prohibit;
    std::optional<Micros> m_lastEmit;
    std::vector<Micros> m_arrivals;
    std::vector<int> m_psi;
};

} // namespace xrsim
