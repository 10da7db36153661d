#pragma once

#include "xrsim/core/time.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct DrxShortCycle {
    Rational cycleMs{8};
    int timerCycles = 2;
};

struct DrxConfig {
    Rational cycleMs{50, 3};
    Rational onDurationMs{8};
    Rational inactivityMs{8};
    Rational startOffsetMs{0};
    std::optional<DrxShortCycle> shortCycle;
    bool retxMonitoring = true;

    void Validate() const
    {
        if (cycleMs <= 0 || onDurationMs <= 0 || inactivityMs < 0 || startOffsetMs < 0) {
            throw std::invalid_argument("DRX timers must be positive");
        }
        if (onDurationMs > cycleMs) {
            throw std::invalid_argument("DRX on-duration exceeds the cycle");
        }
        if (shortCycle && (shortCycle->cycleMs <= 0 || shortCycle->timerCycles < 1 || shortCycle->cycleMs > cycleMs)) {
            throw std::invalid_argument("invalid DRX short cycle");
        }
    }
};

/// Exact start of on-duration k (ms).
inline Rational OnDurationStartMs(const DrxConfig& cfg, std::int64_t k)
{
    return cfg.startOffsetMs + cfg.cycleMs * Rational(k);
}

/// First n on-duration starts, each floored to its slot boundary.
inline std::vector<Micros> OnDurationStarts(const DrxConfig& cfg, std::int64_t n)
{
    if (n < 1) {
        throw std::invalid_argument("need at least one on-duration");
    }
    std::vector<Micros> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        out.push_back(SlotFloor(FloorMicros(OnDurationStartMs(cfg, k))));
    }
    return out;
}

enum class DrxMode { OnDuration, InactivityExtended, Sleep };

inline const char* ToString(DrxMode m)
{
    switch (m) {
    case DrxMode::OnDuration: return "on";
    case DrxMode::InactivityExtended: return "inactivity";
    case DrxMode::Sleep: return "sleep";
    }
    return "?";
}

/// Per-UE connected-mode DRX, stepped once per slot. On-duration starts are
/// derived from the exact rational cycle, so fractional cycles never drift.
/// `SetOnDuration` and `SetOffsetShift` take effect from the next cycle.
class DrxMachine {
public:
    explicit DrxMachine(DrxConfig cfg) : m_cfg(cfg) { m_cfg.Validate(); }

    const DrxConfig& Config() const { return m_cfg; }
    DrxMode Mode() const { return m_mode; }
    std::int64_t CycleIndex() const { return m_cycle; }

    void SetOnDuration(Rational ms)
    {
        if (ms <= 0 || ms > m_cfg.cycleMs) {
            throw std::invalid_argument("on-duration outside (0, cycle]");
        }
        m_pendingOn = ms;
    }

    void SetOffsetShift(Rational ms) { m_pendingShift = ms; }

    Rational OffsetShift() const { return m_shift; }

    /// Start of the current (most recently entered) cycle in exact ms.
    Rational CurrentCycleStartMs() const { return CycleStartMs(m_cycle); }

    /// Call at every slot boundary in order; returns true when the UE
    /// monitors PDCCH in this slot.
    bool BeginSlot(std::int64_t slot)
    {
        Micros t = slot * kSlotUs;
        while (SlotFloor(FloorMicros(CycleStartMs(m_cycle + 1, m_pendingShift.value_or(m_shift)))) <= t) {
            ++m_cycle;
            if (m_pendingOn) {
                m_cfg.onDurationMs = *m_pendingOn;
                m_pendingOn.reset();
            }
            if (m_pendingShift) {
                m_shift = *m_pendingShift;
                m_pendingShift.reset();
            }
            m_onStart = SlotFloor(FloorMicros(CycleStartMs(m_cycle)));
            m_onEnd = m_onStart + SlotCeil(FloorMicros(m_cfg.onDurationMs));
            m_shortUntil.reset();
        }
        bool on = t >= m_onStart && t < m_onEnd;
        bool inact = t < m_inactivityEnd;
        if (!on && !inact && m_cfg.shortCycle) {
            on = InShortOnDuration(t);
        }
        if (m_wasAwake && !on && !inact && m_cfg.shortCycle && !m_shortUntil) {
            Rational sc = m_cfg.shortCycle->cycleMs;
            m_shortUntil = t + FloorMicros(sc * Rational(m_cfg.shortCycle->timerCycles));
            on = InShortOnDuration(t);
        }
        m_mode = on ? DrxMode::OnDuration : (inact ? DrxMode::InactivityExtended : DrxMode::Sleep);
        m_wasAwake = m_mode != DrxMode::Sleep;
        m_slot = slot;
        return m_wasAwake;
    }

    /// PDCCH scheduling new data received in `slot`: (re)start the
    /// inactivity timer from the end of that slot.
    void NotifyNewData(std::int64_t slot)
    {
        m_inactivityEnd = std::max(m_inactivityEnd, (slot + 1) * kSlotUs + FloorMicros(m_cfg.inactivityMs));
        m_shortUntil.reset();
    }

    bool Monitoring() const { return m_mode != DrxMode::Sleep; }

private:
    Rational CycleStartMs(std::int64_t k) const { return CycleStartMs(k, m_shift); }

    Rational CycleStartMs(std::int64_t k, Rational shift) const
    {
        return m_cfg.startOffsetMs + shift + m_cfg.cycleMs * Rational(k);
    }

    bool InShortOnDuration(Micros t) const
    {
        if (!m_shortUntil || t >= *m_shortUntil) {
            return false;
        }
        Rational sc = m_cfg.shortCycle->cycleMs;
        Rational tMs(t, kMsUs);
        Rational rel = tMs - m_cfg.startOffsetMs - m_shift;
        auto q = rel / sc;
        std::int64_t k = q.numerator() / q.denominator();
        if (q.numerator() < 0 && q.numerator() % q.denominator() != 0) {
            --k;
        }
        Micros start = SlotFloor(FloorMicros(m_cfg.startOffsetMs + m_shift + sc * Rational(k)));
        return t >= start && t < start + SlotCeil(FloorMicros(m_cfg.onDurationMs));
    }

    DrxConfig m_cfg;
    std::int64_t m_cycle = -1;
    Micros m_onStart = 0;
    Micros m_onEnd = 0;
    Micros m_inactivityEnd = 0;
    std::optional<Micros> m_shortUntil;
    std::optional<Rational> m_pendingOn;
    std::optional<Rational> m_pendingShift;
    Rational m_shift{0};
    DrxMode m_mode = DrxMode::Sleep;
    bool m_wasAwake = false;
    std::int64_t m_slot = -1;
};

} // namespace xrsim
