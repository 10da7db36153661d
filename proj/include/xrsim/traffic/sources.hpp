#pragma once

#include "xrsim/core/random.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/traffic/pdu.hpp"
#include "xrsim/traffic/video.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace xrsim {

/// Periodic pose/control packets: one fixed-size PDU per period, no jitter.
/// Each packet is its own PDU set and its own data burst.
class PoseSource {
public:
    explicit PoseSource(Micros period = Ms(4), std::uint32_t bytes = 100, Micros startOffset = 0)
        : m_period(period), m_bytes(bytes), m_startOffset(startOffset)
    {
        if (period <= 0 || bytes == 0) {
            throw std::invalid_argument("pose source needs positive period and size");
        }
    }

    Micros Period() const { return m_period; }

    PduSet Next(IdSource& ids, Micros psdb = kNoDeadline)
    {
        VideoFrame f{m_next, m_startOffset + static_cast<Micros>(m_next) * m_period, m_bytes};
        ++m_next;
        FragmentOptions opt;
        opt.mtu = m_bytes;
        opt.psdb = psdb;
        auto sets = FragmentFrame(f, opt, ids);
        return std::move(sets.front());
    }

private:
    Micros m_period;
    std::uint32_t m_bytes;
    Micros m_startOffset;
    FrameId m_next = 0;
};

struct FtpFile {
    FrameId index = 0;
    Micros arrival = 0;
    std::uint32_t bytes = 0;
};

/// FTP model 3: fixed-size files with exponential inter-arrival gaps.
class Ftp3Source {
public:
    explicit Ftp3Source(std::uint32_t fileBytes = 125000, double meanInterarrivalS = 1.0, Micros startOffset = 0)
        : m_fileBytes(fileBytes), m_meanGapS(meanInterarrivalS), m_t(startOffset)
    {
        if (fileBytes == 0 || meanInterarrivalS <= 0.0) {
            throw std::invalid_argument("FTP3 source parameters must be positive");
        }
    }

    double OfferedLoadBps() const { return m_fileBytes * 8.0 / m_meanGapS; }

    Micros NextGap(Rng& rng) const
    {
        std::exponential_distribution<double> e(1.0 / m_meanGapS);
        return static_cast<Micros>(std::llround(e(rng) * kSecondUs));
    }

    FtpFile Next(Rng& rng)
    {
        m_t += NextGap(rng);
        return FtpFile{m_next++, m_t, m_fileBytes};
    }

    /// File split at the MTU into plain PDUs (no set semantics, no deadline).
    static std::vector<Pdu> Packetize(const FtpFile& f, std::uint32_t mtu, IdSource& ids)
    {
        std::vector<Pdu> out;
        std::uint32_t left = f.bytes;
        while (left > 0) {
            Pdu p;
            p.id = ids.nextPdu++;
            p.setId = ids.nextSet++;
            p.frameId = f.index;
            p.bytes = std::min(left, mtu);
            left -= p.bytes;
            p.arrival = f.arrival;
            p.lastOfSet = true;
            p.endOfBurst = (left == 0);
            p.setBytes = p.bytes;
            p.setPduCount = 1;
            p.setVisible = false;
            out.push_back(p);
        }
        return out;
    }

private:
    std::uint32_t m_fileBytes;
    double m_meanGapS;
    Micros m_t;
    FrameId m_next = 0;
};

} // namespace xrsim
