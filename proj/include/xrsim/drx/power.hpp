#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace xrsim {

enum class PowerState { DeepSleep, LightSleep, PdcchOnly, PdcchPdsch };

/// What the UE did in a slot, before sleep depth is decided.
enum class SlotActivity { Sleep, Monitor, Data };

/// Relative per-slot power and deep-sleep transition cost, in slot-units of
/// PDCCH-only power.
struct PowerModel {
    double deepSleep = 0.04;
    double lightSleep = 0.4;
    double pdcchOnly = 1.0;
    double pdcchPdsch = 3.0;
    double deepSleepTransition = 4.0;   // entry + exit energy per deep sleep
    int minDeepSleepSlots = 6;

    void Validate() const
    {
        if (!(0.0 <= deepSleep && deepSleep < lightSleep && lightSleep < pdcchOnly && pdcchOnly < pdcchPdsch)) {
            throw std::invalid_argument("power states must satisfy deep < light < pdcch < pdcch+pdsch");
        }
        if (deepSleepTransition < 0.0 || minDeepSleepSlots < 1) {
            throw std::invalid_argument("invalid deep sleep transition parameters");
        }
    }

    double Power(PowerState s) const
    {
        switch (s) {
        case PowerState::DeepSleep: return deepSleep;
        case PowerState::LightSleep: return lightSleep;
        case PowerState::PdcchOnly: return pdcchOnly;
        case PowerState::PdcchPdsch: return pdcchPdsch;
        }
        return 0.0;
    }
};

/// Sleep runs of at least minDeepSleepSlots are DeepSleep, shorter ones
/// LightSleep.
inline std::vector<PowerState> ClassifyTrace(std::span<const SlotActivity> activity, const PowerModel& m)
{
    std::vector<PowerState> out(activity.size(), PowerState::PdcchOnly);
    std::size_t i = 0;
    while (i < activity.size()) {
        if (activity[i] != SlotActivity::Sleep) {
            out[i] = activity[i] == SlotActivity::Data ? PowerState::PdcchPdsch : PowerState::PdcchOnly;
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < activity.size() && activity[j] == SlotActivity::Sleep) {
            ++j;
        }
        auto state = static_cast<int>(j - i) >= m.minDeepSleepSlots ? PowerState::DeepSleep : PowerState::LightSleep;
        for (std::size_t k = i; k < j; ++k) {
            out[k] = state;
        }
        i = j;
    }
    return out;
}

/// Time-weighted mean power; each maximal deep sleep run adds the
/// transition energy once.
inline double PowerForRun(std::span<const PowerState> trace, const PowerModel& m)
{
    if (trace.empty()) {
        return 0.0;
    }
    double energy = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        energy += m.Power(trace[i]);
        if (trace[i] == PowerState::DeepSleep && (i == 0 || trace[i - 1] != PowerState::DeepSleep)) {
            energy += m.deepSleepTransition;
        }
    }
    return energy / static_cast<double>(trace.size());
}

/// Percent saved relative to the always-on reference.
inline double PowerSavingGain(double pTechnique, double pAlwaysOn)
{
    if (pAlwaysOn <= 0.0) {
        throw std::invalid_argument("always-on power must be positive");
    }
    if (pTechnique < 0.0) {
        throw std::invalid_argument("power must be non-negative");
    }
    return (1.0 - pTechnique / pAlwaysOn) * 100.0;
}

} // namespace xrsim
