#pragma once

#include "xrsim/core/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

namespace xrsim {

enum class AdrxMode { OnOnly, OnAndStart };

struct AdrxConfig {
    AdrxMode mode = AdrxMode::OnAndStart;
    std::vector<Rational> onDurationsMs{2, 4, 6, 8, 10, 12};
    std::vector<Rational> offsetShiftsMs{-2, -1, 0, 1, 2};
    double v = 10.0;
    double targetViolationsPerCycle = 0.0025;
    int horizonCycles = 60;
    std::size_t historyFrames = 120;
    Rational cycleMs{50, 3};
    Micros psdb = Ms(10);

    void Validate() const
    {
        if (onDurationsMs.empty() || (mode == AdrxMode::OnAndStart && offsetShiftsMs.empty())) {
            throw std::invalid_argument("A-DRX candidate grid is empty");
        }
        if (v < 0.0 || targetViolationsPerCycle < 0.0 || horizonCycles < 1 || historyFrames < 2 || cycleMs <= 0
            || psdb <= 0) {
            throw std::invalid_argument("invalid A-DRX parameters");
        }
        for (const auto& on : onDurationsMs) {
            if (on <= 0 || on > cycleMs) {
                throw std::invalid_argument("A-DRX on-duration outside (0, cycle]");
            }
        }
    }
};

/// One frame observed during a cycle. Phase is the arrival time relative to
/// the unshifted cycle start; service is the time from the first monitored
/// slot after arrival to delivery.
struct AdrxFrameSample {
    double phaseMs = 0.0;
    double serviceMs = 0.0;
};

struct AdrxFeedback {
    int violations = 0;   // frames that missed the PSDB (from PSDB and EoDB observations)
    std::vector<AdrxFrameSample> frames;
};

struct AdrxDecision {
    Rational offsetShiftMs{0};
    Rational onDurationMs{8};
};

/// Drift-plus-penalty DRX adaptation. A virtual queue Q tracks violations
/// in excess of the target rate; each cycle the candidate minimizing
/// Q x H x predicted violation probability + V x awake fraction is chosen.
/// Arrival phase is predicted by a Gaussian fitted to the recent history.
class AdrxController {
public:
    AdrxController(AdrxConfig cfg, AdrxDecision initial) : m_cfg(std::move(cfg)), m_current(initial)
    {
        m_cfg.Validate();
    }

    double VirtualQueue() const { return m_q; }
    const AdrxDecision& Current() const { return m_current; }

    AdrxDecision Update(const AdrxFeedback& fb)
    {
        m_q = std::max(m_q + fb.violations - m_cfg.targetViolationsPerCycle, 0.0);
        for (const auto& f : fb.frames) {
            m_history.push_back(f);
            if (m_history.size() > m_cfg.historyFrames) {
                m_history.pop_front();
            }
        }
        std::vector<Rational> shifts{m_current.offsetShiftMs};
        if (m_cfg.mode == AdrxMode::OnAndStart) {
            shifts = m_cfg.offsetShiftsMs;
        }
        // the current setting wins ties
        double best = Cost(m_current.offsetShiftMs, m_current.onDurationMs);
        AdrxDecision choice = m_current;
        for (const auto& s : shifts) {
            for (const auto& on : m_cfg.onDurationsMs) {
                double cost = Cost(s, on);
                if (cost < best - 1e-12) {
                    best = cost;
                    choice = AdrxDecision{s, on};
                }
            }
        }
        m_current = choice;
        return choice;
    }

    /// Probability that a frame misses the budget with the on-duration window
    /// [shift, shift + on) in cycle-relative time.
    double PredictedViolation(Rational shiftMs, Rational onMs) const
    {
        if (m_history.size() < 2) {
            return 0.0;
        }
        double mu = 0.0;
        double svc = 0.0;
        for (const auto& f : m_history) {
            mu += f.phaseMs;
            svc += f.serviceMs;
        }
        mu /= static_cast<double>(m_history.size());
        svc /= static_cast<double>(m_history.size());
        double var = 0.0;
        for (const auto& f : m_history) {
            var += (f.phaseMs - mu) * (f.phaseMs - mu);
        }
        double sigma = std::max(std::sqrt(var / static_cast<double>(m_history.size() - 1)), 0.25);
        double cycle = ToDouble(m_cfg.cycleMs);
        double a = ToDouble(shiftMs);
        double on = ToDouble(onMs);
        double budget = ToMs(m_cfg.psdb);
        constexpr int kSteps = 400;
        constexpr double kSlotMs = static_cast<double>(kSlotUs) / kMsUs;
        double lo = mu - 4.0 * sigma;
        double step = 8.0 * sigma / kSteps;
        double p = 0.0;
        double mass = 0.0;
        for (int i = 0; i < kSteps; ++i) {
            double phi = lo + (i + 0.5) * step;
            double z = (phi - mu) / sigma;
            double w = std::exp(-0.5 * z * z);
            mass += w;
            double rel = std::fmod(phi - a, cycle);
            if (rel < 0.0) {
                rel += cycle;
            }
            // an arrival in the last slot of the window misses it
            double wait = rel < on - kSlotMs ? 0.0 : cycle - rel;
            if (wait + svc > budget) {
                p += w;
            }
        }
        return mass > 0.0 ? p / mass : 0.0;
    }

    double Cost(Rational shiftMs, Rational onMs) const
    {
        double awake = ToDouble(onMs) / ToDouble(m_cfg.cycleMs);
        return m_q * m_cfg.horizonCycles * PredictedViolation(shiftMs, onMs) + m_cfg.v * awake;
    }

private:
    AdrxConfig m_cfg;
    AdrxDecision m_current;
    double m_q = 0.0;
    std::deque<AdrxFrameSample> m_history;
};

} // namespace xrsim
