#pragma once

#include "xrsim/core/time.hpp"

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace xrsim {

using PduId = std::uint64_t;
using PduSetId = std::uint64_t;
using FrameId = std::uint64_t;

inline constexpr Micros kNoDeadline = std::numeric_limits<Micros>::max();

// PSI: larger value = more important. 0 is the lowest level.
inline constexpr int kPsiLow = 0;
inline constexpr int kPsiHigh = 1;

struct Pdu {
    PduId id = 0;
    PduSetId setId = 0;
    FrameId frameId = 0;
    std::uint32_t bytes = 0;
    Micros arrival = 0;
    Micros deadline = kNoDeadline;
    int psi = kPsiHigh;
    bool lastOfSet = false;
    bool endOfBurst = false;
    // metadata copied from the set so a queue holding loose PDUs can still
    // reason about the whole set
    std::uint32_t setBytes = 0;
    std::uint32_t setPduCount = 0;
    bool setVisible = true;
    bool ecnCe = false;
};

struct PduSet {
    PduSetId id = 0;
    FrameId frameId = 0;
    std::vector<Pdu> pdus;
    std::uint64_t totalBytes = 0;
    int psi = kPsiHigh;
    Micros arrival = 0;

    std::uint64_t SumOfPdus() const
    {
        return std::accumulate(pdus.begin(), pdus.end(), std::uint64_t{0},
                               [](std::uint64_t acc, const Pdu& p) { return acc + p.bytes; });
    }
};

struct DataBurst {
    std::uint64_t id = 0;
    std::vector<PduSet> pduSets;
};

/// Monotone id allocator shared by all sources feeding one queue family.
struct IdSource {
    PduId nextPdu = 1;
    PduSetId nextSet = 1;
    std::uint64_t nextBurst = 1;
};

} // namespace xrsim
