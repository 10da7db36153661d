#include "xrsim/traffic/sources.hpp"
#include "xrsim/traffic/truncated_normal.hpp"
#include "xrsim/traffic/video.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace xrsim;

namespace {

// std of N(0, s) restricted to [a, b] by midpoint integration
double TruncatedStd(double s, double a, double b)
{
    const int n = 200000;
    double h = (b - a) / n, m0 = 0, m1 = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * h;
        double w = std::exp(-0.5 * x * x / (s * s));
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    double mu = m1 / m0;
    return std::sqrt(m2 / m0 - mu * mu);
}

} // namespace

TEST(TruncatedNormal, OracleMoments)
{
    EXPECT_NEAR(TruncatedStd(2.0, -4.0, 4.0), 1.75925, 1e-5);
    EXPECT_NEAR(TruncatedStd(0.105, -0.5, 0.5), 0.1049976, 1e-7);
}

TEST(TruncatedNormal, StaysInBounds)
{
    TruncatedNormal t(0.0, 5.0, -1.0, 2.0);
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        double x = t(rng);
        ASSERT_GE(x, -1.0);
        ASSERT_LE(x, 2.0);
    }
    EXPECT_THROW(TruncatedNormal(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(TruncatedNormal(3.0, 1.0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(TruncatedNormal(0.0, -1.0, -1.0, 1.0), std::invalid_argument);
    EXPECT_EQ(TruncatedNormal(0.5, 0.0, 0.0, 1.0)(rng), 0.5);
}

TEST(VideoSource, NominalArrivalsFollowTheExactPeriod)
{
    VideoStreamConfig cfg;
    cfg.jitterStdMs = 0.0;
    VideoSource v(cfg, 250);
    EXPECT_EQ(v.NominalArrival(0), 250);
    EXPECT_EQ(v.NominalArrival(1), 250 + 16666);
    EXPECT_EQ(v.NominalArrival(3), 250 + 50000);
    EXPECT_EQ(v.NominalArrival(60000), 250 + Seconds(1000));
    EXPECT_DOUBLE_EQ(v.MeanFrameBytes(), 62500.0);
}

TEST(VideoSource, SizesAndJitterWithinBounds)
{
    VideoSource v(VideoStreamConfig{});
    Rng rng(11);
    for (FrameId n = 0; n < 5000; ++n) {
        auto f = v.NextFrame(rng);
        ASSERT_EQ(f.index, n);
        ASSERT_GE(f.bytes, 31250u);
        ASSERT_LE(f.bytes, 93750u);
        Micros d = f.arrival - v.NominalArrival(n);
        if (v.NominalArrival(n) >= Ms(4)) {
            ASSERT_GE(d, -Ms(4));
        }
        ASSERT_LE(d, Ms(4));
    }
}

TEST(VideoSource, UplinkHasNoJitter)
{
    VideoStreamConfig cfg;
    cfg.direction = Direction::Uplink;
    VideoSource v(cfg, 1000);
    Rng rng(5);
    for (FrameId n = 0; n < 100; ++n) {
        ASSERT_EQ(v.NextFrame(rng).arrival, v.NominalArrival(n));
    }
}

TEST(VideoSource, RejectsBadConfig)
{
    VideoStreamConfig cfg;
    cfg.sizeMinFrac = 1.2;
    EXPECT_THROW(VideoSource{cfg}, std::invalid_argument);
    cfg = {};
    cfg.jitterMinMs = 1.0;
    EXPECT_THROW(VideoSource{cfg}, std::invalid_argument);
    cfg = {};
    cfg.avgRateBps = 0.0;
    EXPECT_THROW(VideoSource{cfg}, std::invalid_argument);
}

TEST(Fragmentation, ConservesBytesAndRespectsMtu)
{
    IdSource ids;
    PsiPattern psi;
    VideoFrame f{7, Ms(3), 62501};
    FragmentOptions opt;
    opt.setsPerFrame = 3;
    opt.psdb = Ms(10);
    auto sets = FragmentFrame(f, opt, ids, &psi);
    ASSERT_EQ(sets.size(), 3u);
    std::uint64_t total = 0;
    int eodb = 0;
    for (const auto& s : sets) {
        EXPECT_EQ(s.SumOfPdus(), s.totalBytes);
        total += s.totalBytes;
        for (const auto& p : s.pdus) {
            EXPECT_LE(p.bytes, 1500u);
            EXPECT_EQ(p.deadline, Ms(13));
            EXPECT_EQ(p.setId, s.id);
            EXPECT_EQ(p.frameId, 7u);
            eodb += p.endOfBurst;
        }
        EXPECT_TRUE(s.pdus.back().lastOfSet);
    }
    EXPECT_EQ(total, 62501u);
    EXPECT_EQ(eodb, 1);
    EXPECT_TRUE(sets.back().pdus.back().endOfBurst);
    EXPECT_EQ(sets[0].totalBytes, 20833u);
    EXPECT_EQ(sets[2].totalBytes, 20835u);
    EXPECT_EQ(sets[0].psi, kPsiHigh);
    EXPECT_EQ(sets[1].psi, kPsiLow);
    EXPECT_EQ(sets[2].psi, kPsiLow);
    EXPECT_EQ(sets[0].pdus.size(), 14u);
}

TEST(Fragmentation, EdgeCases)
{
    IdSource ids;
    EXPECT_TRUE(FragmentFrame(VideoFrame{0, 0, 0}, {}, ids).empty());
    FragmentOptions bad;
    bad.mtu = 0;
    EXPECT_THROW(FragmentFrame(VideoFrame{0, 0, 10}, bad, ids), std::invalid_argument);
    auto one = FragmentFrame(VideoFrame{0, 0, 1500}, {}, ids);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].pdus.size(), 1u);
    EXPECT_EQ(one[0].pdus[0].deadline, kNoDeadline);
    auto burst = MakeBurst(std::move(one), ids);
    EXPECT_EQ(burst.pduSets.size(), 1u);
}

TEST(PoseSource, PeriodicSinglePduSets)
{
    PoseSource pose(Ms(4), 100, 300);
    IdSource ids;
    for (int k = 0; k < 10; ++k) {
        auto s = pose.Next(ids, Ms(10));
        ASSERT_EQ(s.pdus.size(), 1u);
        EXPECT_EQ(s.arrival, 300 + k * Ms(4));
        EXPECT_EQ(s.pdus[0].bytes, 100u);
        EXPECT_EQ(s.pdus[0].deadline, s.arrival + Ms(10));
        EXPECT_TRUE(s.pdus[0].endOfBurst);
    }
    EXPECT_THROW(PoseSource(0, 100), std::invalid_argument);
}

TEST(Ftp3Source, PoissonArrivalsAndPacketization)
{
    Ftp3Source ftp(125000, 0.5);
    EXPECT_DOUBLE_EQ(ftp.OfferedLoadBps(), 2e6);
    Rng rng(9);
    const int n = 20000;
    Micros last = 0;
    for (int i = 0; i < n; ++i) {
        auto f = ftp.Next(rng);
        ASSERT_GE(f.arrival, last);
        last = f.arrival;
    }
    EXPECT_NEAR(static_cast<double>(last) / kSecondUs / n, 0.5, 0.02);
    IdSource ids;
    auto pdus = Ftp3Source::Packetize(FtpFile{0, 0, 4000}, 1500, ids);
    ASSERT_EQ(pdus.size(), 3u);
    EXPECT_EQ(pdus[2].bytes, 1000u);
    EXPECT_TRUE(pdus[2].endOfBurst);
    EXPECT_FALSE(pdus[0].endOfBurst);
}
