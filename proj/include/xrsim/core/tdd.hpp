#pragma once

#include "xrsim/core/time.hpp"

#include <cstdint>
#include <stdexcept>

namespace xrsim {

enum class SlotType { Downlink, Special, Uplink };

enum class Direction { Downlink, Uplink };

inline const char* ToString(Direction d) { return d == Direction::Downlink ? "DL" : "UL"; }

inline constexpr int kTddPeriod = 5;
inline constexpr int kSymbolsPerSlot = 14;
inline constexpr int kNumRb = 273;   // 100 MHz at 30 kHz SCS

/// DDDSU pattern.
inline SlotType SlotTypeOf(std::int64_t slotIndex)
{
    if (slotIndex < 0) {
        throw std::invalid_argument("negative slot index");
    }
    switch (slotIndex % kTddPeriod) {
    case 3: return SlotType::Special;
    case 4: return SlotType::Uplink;
    default: return SlotType::Downlink;
    }
}

inline bool CarriesDownlink(SlotType t) { return t != SlotType::Uplink; }
inline bool CarriesUplink(SlotType t) { return t == SlotType::Uplink; }

// D slots lose 2 symbols to PDCCH; the S slot gives 10 symbols to DL data and
// the rest to guard and UL control; U slots lose 2 symbols to DMRS/PUCCH.
inline int DataSymbols(SlotType t, Direction d)
{
    if (d == Direction::Downlink) {
        switch (t) {
        case SlotType::Downlink: return 12;
        case SlotType::Special: return 10;
        case SlotType::Uplink: return 0;
        }
    }
    return t == SlotType::Uplink ? 12 : 0;
}

/// First slot index >= from whose type carries the given direction.
inline std::int64_t NextSlotFor(Direction d, std::int64_t from)
{
    for (std::int64_t s = from;; ++s) {
        auto t = SlotTypeOf(s);
        if (d == Direction::Downlink ? CarriesDownlink(t) : CarriesUplink(t)) {
            return s;
        }
    }
}

struct SimClock {
    std::int64_t slotIndex = 0;
    Micros slotDuration = kSlotUs;

    Micros Now() const { return slotIndex * slotDuration; }
    SlotType Type() const { return SlotTypeOf(slotIndex); }
    void Advance() { ++slotIndex; }
};

} // namespace xrsim
