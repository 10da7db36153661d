#pragma once

#include "xrsim/core/random.hpp"
#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/traffic/pdu.hpp"
#include "xrsim/traffic/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct VideoStreamConfig {
    double avgRateBps = 30e6;
    Rational fps{60};
    double sizeStdFrac = 0.105;
    double sizeMinFrac = 0.5;
    double sizeMaxFrac = 1.5;
    double jitterStdMs = 2.0;
    double jitterMinMs = -4.0;
    double jitterMaxMs = 4.0;
    Micros psdb = Ms(10);
    Direction direction = Direction::Downlink;

    Rational PeriodMs() const { return Rational(1000) / fps; }

    double MeanFrameBytes() const { return avgRateBps / ToDouble(fps) / 8.0; }

    bool JitterEnabled() const
    {
        return direction == Direction::Downlink && jitterStdMs > 0.0;
    }

    void Validate() const
    {
        if (avgRateBps <= 0.0 || fps <= 0) {
            throw std::invalid_argument("video stream needs positive rate and fps");
        }
        if (!(sizeMinFrac < 1.0 && 1.0 < sizeMaxFrac) || sizeStdFrac < 0.0) {
            throw std::invalid_argument("video frame size bounds must straddle the mean");
        }
        if (!(jitterMinMs <= 0.0 && 0.0 <= jitterMaxMs) || jitterStdMs < 0.0) {
            throw std::invalid_argument("video jitter bounds must straddle zero");
        }
        if (psdb <= 0) {
            throw std::invalid_argument("video PSDB must be positive");
        }
    }
};

struct VideoFrame {
    FrameId index = 0;
    Micros arrival = 0;
    std::uint32_t bytes = 0;
};

/// Frame-level XR video model: truncated Gaussian sizes at a rational frame
/// period, with truncated Gaussian arrival jitter on the downlink.
class VideoSource {
public:
    explicit VideoSource(VideoStreamConfig cfg, Micros startOffset = 0)
        : m_cfg(cfg), m_startOffset(startOffset),
          m_size(1.0, cfg.sizeStdFrac, cfg.sizeMinFrac, cfg.sizeMaxFrac),
          m_jitter(0.0, cfg.jitterStdMs, cfg.jitterMinMs, cfg.jitterMaxMs)
    {
        m_cfg.Validate();
    }

    const VideoStreamConfig& Config() const { return m_cfg; }
    FrameId FramesEmitted() const { return m_next; }

    /// Nominal (jitter-free) arrival of frame n: offset + n / fps.
    Micros NominalArrival(FrameId n) const
    {
        return m_startOffset + FloorMicros(m_cfg.PeriodMs() * Rational(static_cast<std::int64_t>(n)));
    }

    double MeanFrameBytes() const { return m_cfg.avgRateBps / ToDouble(m_cfg.fps) / 8.0; }

    /// Rate changes (L4S adaptation) take effect from the next frame.
    void SetAvgRate(double bps)
    {
        if (bps <= 0.0) {
            throw std::invalid_argument("rate must be positive");
        }
        m_cfg.avgRateBps = bps;
    }

    VideoFrame NextFrame(Rng& rng)
    {
        VideoFrame f;
        f.index = m_next++;
        double mean = MeanFrameBytes();
        f.bytes = static_cast<std::uint32_t>(std::llround(mean * m_size(rng)));
        Micros t = NominalArrival(f.index);
        if (m_cfg.JitterEnabled()) {
            t += static_cast<Micros>(std::llround(m_jitter(rng) * kMsUs));
        }
        f.arrival = t < 0 ? 0 : t;
        return f;
    }

private:
    VideoStreamConfig m_cfg;
    Micros m_startOffset;
    FrameId m_next = 0;
    TruncatedNormal m_size;     // in units of the mean
    TruncatedNormal m_jitter;   // ms
};

/// Cyclic PSI assignment per PDU set. Default high, low, low.
class PsiPattern {
public:
    PsiPattern() : m_levels{kPsiHigh, kPsiLow, kPsiLow} {}
    explicit PsiPattern(std::vector<int> levels) : m_levels(std::move(levels))
    {
        if (m_levels.empty()) {
            throw std::invalid_argument("empty PSI pattern");
        }
    }

    int Next() { return m_levels[m_pos++ % m_levels.size()]; }

private:
    std::vector<int> m_levels;
    std::size_t m_pos = 0;
};

struct FragmentOptions {
    std::uint32_t mtu = 1500;
    int setsPerFrame = 1;
    Micros psdb = kNoDeadline;   // relative budget; kNoDeadline for none
};

/// Splits a frame into PDU sets (even split, remainder to the last set) and
/// each set into MTU-sized PDUs. The final PDU of the frame carries EoDB.
inline std::vector<PduSet> FragmentFrame(const VideoFrame& frame, const FragmentOptions& opt, IdSource& ids,
                                         PsiPattern* psi = nullptr)
{
    if (opt.mtu == 0 || opt.setsPerFrame < 1) {
        throw std::invalid_argument("fragment_frame needs mtu > 0 and at least one set");
    }
    std::vector<PduSet> sets;
    if (frame.bytes == 0) {
        return sets;
    }
    auto nSets = static_cast<std::uint64_t>(opt.setsPerFrame);
    std::uint64_t base = frame.bytes / nSets;
    Micros deadline = opt.psdb == kNoDeadline ? kNoDeadline : frame.arrival + opt.psdb;

    for (std::uint64_t s = 0; s < nSets; ++s) {
        std::uint64_t setBytes = base + (s + 1 == nSets ? frame.bytes % nSets : 0);
        if (setBytes == 0) {
            continue;
        }
        PduSet set;
        set.id = ids.nextSet++;
        set.frameId = frame.index;
        set.arrival = frame.arrival;
        set.totalBytes = setBytes;
        set.psi = psi ? psi->Next() : kPsiHigh;
        auto nPdus = static_cast<std::uint32_t>((setBytes + opt.mtu - 1) / opt.mtu);
        std::uint64_t left = setBytes;
        for (std::uint32_t k = 0; k < nPdus; ++k) {
            Pdu p;
            p.id = ids.nextPdu++;
            p.setId = set.id;
            p.frameId = frame.index;
            p.bytes = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, opt.mtu));
            left -= p.bytes;
            p.arrival = frame.arrival;
            p.deadline = deadline;
            p.psi = set.psi;
            p.lastOfSet = (k + 1 == nPdus);
            p.setBytes = static_cast<std::uint32_t>(setBytes);
            p.setPduCount = nPdus;
            set.pdus.push_back(p);
        }
        sets.push_back(std::move(set));
    }
    if (!sets.empty()) {
        sets.back().pdus.back().endOfBurst = true;
    }
    return sets;
}

inline DataBurst MakeBurst(std::vector<PduSet> sets, IdSource& ids)
{
    DataBurst b;
    b.id = ids.nextBurst++;
    b.pduSets = std::move(sets);
    return b;
}

} // namespace xrsim
