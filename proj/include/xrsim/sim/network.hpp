#pragma once

#include "xrsim/core/event_queue.hpp"
#include "xrsim/core/random.hpp"
#include "xrsim/core/tdd.hpp"
#include "xrsim/core/time.hpp"
#include "xrsim/drx/adrx.hpp"
#include "xrsim/drx/drx.hpp"
#include "xrsim/drx/power.hpp"
#include "xrsim/mac/configured_grant.hpp"
#include "xrsim/mac/scheduler.hpp"
#include "xrsim/qos/flow_queue.hpp"
#include "xrsim/qos/profile.hpp"
#include "xrsim/radio/channel.hpp"
#include "xrsim/radio/deployment.hpp"
#include "xrsim/radio/link_adaptation.hpp"
#include "xrsim/reporting/buffer_status.hpp"
#include "xrsim/reporting/delay_status.hpp"
#include "xrsim/traffic/sources.hpp"
#include "xrsim/traffic/video.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace xrsim {

enum class EmbbTraffic { None, Ftp3, FullBuffer };
enum class DrxMode2 { Off, Fixed, Adaptive };

inline const char* ToString(DrxMode2 m)
{
    switch (m) {
    case DrxMode2::Off: return "off";
    case DrxMode2::Fixed: return "fixed";
    case DrxMode2::Adaptive: return "adaptive";
    }
    return "?";
}

inline DrxMode2 ParseDrxMode(const std::string& s)
{
    if (s == "off") {
        return DrxMode2::Off;
    }
    if (s == "fixed") {
        return DrxMode2::Fixed;
    }
    if (s == "adaptive") {
        return DrxMode2::Adaptive;
    }
    throw std::invalid_argument("unknown DRX mode '" + s + "' (expected off, fixed or adaptive)");
}

inline EmbbTraffic ParseEmbbTraffic(const std::string& s)
{
    if (s == "none") {
        return EmbbTraffic::None;
    }
    if (s == "ftp3") {
        return EmbbTraffic::Ftp3;
    }
    if (s == "full_buffer") {
        return EmbbTraffic::FullBuffer;
    }
    throw std::invalid_argument("unknown eMBB traffic '" + s + "' (expected none, ftp3 or full_buffer)");
}

struct NetworkConfig {
    DeploymentConfig deployment;
    int xrUesPerCell = 4;
    int embbUesPerCell = 0;
    EmbbTraffic embbTraffic = EmbbTraffic::Ftp3;

    bool dlVideo = true;
    VideoStreamConfig dlStream{};
    bool ulVideo = false;
    VideoStreamConfig ulStream{10e6, Rational(60), 0.105, 0.5, 1.5, 2.0, -4.0, 4.0, Ms(30), Direction::Uplink};
    bool ulPose = false;
    Micros posePeriod = Ms(4);
    std::uint32_t poseBytes = 100;

    std::uint32_t mtu = 1500;
    int setsPerFrame = 1;
    std::vector<int> psiPattern{kPsiHigh, kPsiLow, kPsiLow};
    MappingConfig mapping = MappingConfig::OneOneOne;
    bool nnOneVisible = false;
    QosFlowProfile dlProfile{};
    QosFlowProfile ulProfile{Ms(30)};

    SchedulerPolicy scheduler{};
    int csiPeriodSlots = 4;   // 2 ms

    BsTableKind bsrMode = BsTableKind::Long;
    bool idealBsr = false;
    std::uint32_t srGrantBytes = 500;
    bool dsr = false;
    Micros dsrThreshold = Ms(10);

    std::optional<CgConfig> cg;
    bool utoUci = false;

    DrxMode2 drxMode = DrxMode2::Off;
    DrxConfig drx{Rational(50, 3), Rational(10), Rational(8), Rational(0), std::nullopt, true};
    /// Added to each UE's expected DL frame arrival to place the on-duration.
    Rational drxLeadMs{-4};
    AdrxConfig adrx{};
    PowerModel power{};

    Micros warmup = Seconds(1);
    Micros duration = Seconds(10);
    bool logEvents = false;
    Micros uaiProhibit = Ms(100);

    void Validate() const
    {
        if (xrUesPerCell < 0 || embbUesPerCell < 0) {
            throw std::invalid_argument("UE counts must be non-negative");
        }
        if (duration <= 0 || warmup < 0) {
            throw std::invalid_argument("duration must be positive and warm-up non-negative");
        }
        if (csiPeriodSlots < 1) {
            throw std::invalid_argument("CSI period must be at least one slot");
        }
        dlStream.Validate();
        ulStream.Validate();
        dlProfile.Validate();
        ulProfile.Validate();
        scheduler.Validate();
        drx.Validate();
        power.Validate();
        if (cg) {
            cg->Validate();
        }
        if (drxMode == DrxMode2::Adaptive) {
            adrx.Validate();
        }
    }
};

struct FlowOutcome {
    std::uint64_t frames = 0;
    std::uint64_t inBudget = 0;

    double Fraction() const { return frames ? static_cast<double>(inBudget) / static_cast<double>(frames) : 0.0; }
};

struct UeResult {
    int ue = 0;
    int cell = 0;
    bool xr = true;
    FlowOutcome dl;
    FlowOutcome ul;
    double throughputBps = 0.0;
    double meanPower = 0.0;
    std::uint64_t paddingBytes = 0;
    std::uint64_t ulDynamicTbs = 0;
    std::uint64_t lostSets = 0;
    std::uint64_t totalSets = 0;
    std::uint64_t uaiMessages = 0;

    double MeanPadding() const { return ulDynamicTbs ? static_cast<double>(paddingBytes) / ulDynamicTbs : 0.0; }
};

struct EventRow {
    Micros time = 0;
    int ue = 0;
    std::string event;
    std::string detail;
};

struct RunResult {
    std::vector<UeResult> ues;
    std::vector<double> paddingSamples;   // per dynamic UL TB
    std::vector<double> rbUtilization;    // per cell per DL/UL slot
    std::vector<EventRow> events;
    RunStats engine;
};

/// Slot-level multi-cell system simulation driven by the event queue.
class Network {
public:
    /// The flow profiles take their PSDB and direction from the streams.
    Network(NetworkConfig cfg, std::uint64_t seed) : m_cfg(std::move(cfg)), m_streams(seed)
    {
        m_cfg.dlProfile.psdb = m_cfg.dlStream.psdb;
        m_cfg.dlProfile.direction = Direction::Downlink;
        m_cfg.ulProfile.psdb = m_cfg.ulStream.psdb;
        m_cfg.ulProfile.direction = Direction::Uplink;
        m_cfg.Validate();
        Build();
    }

    RunResult Run()
    {
        m_end = m_cfg.warmup + m_cfg.duration;
        for (auto& u : m_ues) {
            ScheduleNextArrival(u);
        }
        m_eq.Schedule(0, EventKind::SlotBoundary, [this] { OnSlot(); });
        m_eq.RunUntil(m_end);
        return Collect();
    }

private:
    struct FrameRec {
        Micros arrival = 0;
        Micros deadline = 0;
        std::uint32_t pdusLeft = 0;
        bool lost = false;
        Micros completion = -1;
        Micros firstAwake = -1;
        bool counted = false;
    };

    struct Tb {
        int ue = 0;
        Direction dir = Direction::Downlink;
        int rbCount = 0;
        int mcs = 0;
        std::uint64_t tbBits = 0;
        HarqProcess harq;
        std::vector<Segment> segs;
        std::int64_t dueSlot = 0;
        std::optional<BsrReport> bsr;
        std::optional<DsrReport> dsr;
        std::uint64_t idealBuffer = 0;
        bool dynamic = false;
    };

    struct Ue {
        int id = 0;
        int cell = 0;
        bool xr = true;
        std::vector<double> cl;   // coupling loss per cell
        double csiDl = 30.0;
        double csiUl = 20.0;
        double pfAvg = 0.0;
        std::uint64_t deliveredBits = 0;

        // DL
        std::unique_ptr<VideoSource> dlVideo;
        std::unique_ptr<FlowQueue> dlQ;
        Rng traffic;
        Rng harqRng;
        PsiPattern psi;
        std::unique_ptr<Ftp3Source> ftp;
        std::unordered_map<FrameId, FrameRec> dlFrames;
        std::unordered_map<PduSetId, FrameId> dlSetFrame;
        std::vector<FrameId> dlOpen;
        bool newDlData = false;

        // UL
        std::unique_ptr<VideoSource> ulVideo;
        std::unique_ptr<PoseSource> pose;
        std::unique_ptr<FlowQueue> ulQ;
        std::unordered_map<FrameId, FrameRec> ulFrames;
        std::unordered_map<PduSetId, FrameId> ulSetFrame;
        std::unique_ptr<BsrGenerator> bsr;
        std::uint64_t gnbEstimate = 0;
        Micros gnbReportTime = 0;
        std::uint64_t outstanding = 0;   // UE view of what the gNB still expects
        bool srInFlight = false;
        bool srReceived = false;
        std::unique_ptr<DsrTracker> dsr;
        Micros dsrUrgentUntil = -1;
        std::vector<CgOccasion> cgOcc;
        std::size_t cgNext = 0;
        std::set<std::int64_t> reclaimed;
        std::unique_ptr<UaiBuilder> uai;

        // DRX and power
        std::unique_ptr<DrxMachine> drx;
        std::unique_ptr<AdrxController> adrx;
        Rational drxBaseMs{0};
        std::int64_t lastCycle = -1;
        AdrxFeedback feedback;
        bool awake = true;
        bool dataThisSlot = false;
        std::vector<SlotActivity> activity;

        std::uint64_t padding = 0;
        std::uint64_t dynTbs = 0;
        std::uint64_t uaiCount = 0;
        double ulTxPsd = 0.0;
    };

    void Build()
    {
        Rng dropRng = m_streams.Stream("deployment");
        int perCell = m_cfg.xrUesPerCell + m_cfg.embbUesPerCell;
        auto dep = Deployment::Drop(m_cfg.deployment, perCell, dropRng);
        m_cells = m_cfg.deployment.cells;
        std::vector<int> seen(m_cells, 0);
        const auto& drops = dep.Ues();
        m_ues.resize(drops.size());
        for (std::size_t i = 0; i < drops.size(); ++i) {
            Ue& u = m_ues[i];
            u.id = static_cast<int>(i);
            u.cell = drops[i].servingCell;
            u.cl = drops[i].couplingLossDb;
            u.xr = seen[u.cell]++ < m_cfg.xrUesPerCell;
            u.traffic = m_streams.Stream("traffic", i);
            u.harqRng = m_streams.Stream("harq", i);
            u.psi = PsiPattern(m_cfg.psiPattern);
            u.dlQ = std::make_unique<FlowQueue>(u.xr ? m_cfg.dlProfile : QosFlowProfile{Seconds(3600)});
            u.ulQ = std::make_unique<FlowQueue>(m_cfg.ulProfile);
            u.bsr = std::make_unique<BsrGenerator>(m_cfg.bsrMode);
            u.dsr = std::make_unique<DsrTracker>(m_cfg.dsrThreshold);
            u.uai = std::make_unique<UaiBuilder>(u.id, m_cfg.uaiProhibit);
            if (m_cfg.logEvents) {
                u.dlQ->SetEventLog(&m_pduLog[{u.id, 0}]);
                u.ulQ->SetEventLog(&m_pduLog[{u.id, 1}]);
            }
            Rng offRng = m_streams.Stream("offset", i);
            if (u.xr) {
                if (m_cfg.dlVideo) {
                    Micros period = FloorMicros(m_cfg.dlStream.PeriodMs());
                    Micros off = std::uniform_int_distribution<Micros>(0, period - 1)(offRng);
                    // keep the jittered first arrival non-negative
                    off += Ms(static_cast<std::int64_t>(std::ceil(-m_cfg.dlStream.jitterMinMs)));
                    u.dlVideo = std::make_unique<VideoSource>(m_cfg.dlStream, off);
                    SetupDrx(u, off);
                }
                if (m_cfg.ulVideo) {
                    Micros period = FloorMicros(m_cfg.ulStream.PeriodMs());
                    Micros off = std::uniform_int_distribution<Micros>(0, period - 1)(offRng);
                    VideoStreamConfig sc = m_cfg.ulStream;
                    sc.direction = Direction::Uplink;
                    u.ulVideo = std::make_unique<VideoSource>(sc, off);
                    if (m_cfg.cg) {
                        CgConfig c = *m_cfg.cg;
                        c.startOffsetMs = c.startOffsetMs + Rational(off, kMsUs);
                        u.cgOcc = CgOccasions(c, m_cfg.warmup + m_cfg.duration);
                    }
                }
                if (m_cfg.ulPose) {
                    Micros off = std::uniform_int_distribution<Micros>(0, m_cfg.posePeriod - 1)(offRng);
                    u.pose = std::make_unique<PoseSource>(m_cfg.posePeriod, m_cfg.poseBytes, off);
                }
            } else if (m_cfg.embbTraffic == EmbbTraffic::Ftp3) {
                u.ftp = std::make_unique<Ftp3Source>();
            }
        }
        m_cellActivityDl.assign(m_cells, 0.0);
        m_cellActivityUl.assign(m_cells, 0.0);
        m_retx.resize(m_cells);
        m_ulAllocPrev.resize(m_cells);
    }

    void SetupDrx(Ue& u, Micros videoOffset)
    {
        if (m_cfg.drxMode == DrxMode2::Off) {
            return;
        }
        DrxConfig c = m_cfg.drx;
        Rational base = Rational(videoOffset, kMsUs) + m_cfg.drxLeadMs;
        while (base < 0) {
            base += c.cycleMs;
        }
        c.startOffsetMs = base;
        u.drxBaseMs = base;
        u.drx = std::make_unique<DrxMachine>(c);
        if (m_cfg.drxMode == DrxMode2::Adaptive) {
            AdrxConfig ac = m_cfg.adrx;
            ac.cycleMs = c.cycleMs;
            ac.psdb = m_cfg.dlStream.psdb;
            u.adrx = std::make_unique<AdrxController>(ac, AdrxDecision{Rational(0), c.onDurationMs});
        }
    }

    // --- traffic -----------------------------------------------------------

    void ScheduleNextArrival(Ue& u)
    {
        if (u.dlVideo) {
            ScheduleDlFrame(u);
        }
        if (u.ulVideo) {
            ScheduleUlFrame(u);
        }
        if (u.pose) {
            SchedulePose(u);
        }
        if (u.ftp) {
            ScheduleFtp(u);
        }
    }

    void ScheduleDlFrame(Ue& u)
    {
        VideoFrame f = u.dlVideo->NextFrame(u.traffic);
        if (f.arrival >= m_end) {
            return;
        }
        int id = u.id;
        m_eq.Schedule(std::max(f.arrival, m_eq.Now()), EventKind::FrameArrival, [this, id, f] {
            Ue& v = m_ues[id];
            FragmentOptions opt{m_cfg.mtu, m_cfg.setsPerFrame, m_cfg.dlStream.psdb};
            auto sets = FragmentFrame(f, opt, m_ids, &v.psi);
            AnnotateMetadata(sets, m_cfg.mapping, m_cfg.nnOneVisible);
            RegisterFrame(v.dlFrames, v.dlSetFrame, f, sets, m_cfg.dlStream.psdb);
            if (v.adrx) {
                v.dlOpen.push_back(f.index);
            }
            for (auto& s : sets) {
                v.dlQ->Enqueue(s, m_eq.Now());
            }
            ScheduleDlFrame(v);
        });
    }

    void ScheduleUlFrame(Ue& u)
    {
        VideoFrame f = u.ulVideo->NextFrame(u.traffic);
        if (f.arrival >= m_end) {
            return;
        }
        int id = u.id;
        m_eq.Schedule(std::max(f.arrival, m_eq.Now()), EventKind::FrameArrival, [this, id, f] {
            Ue& v = m_ues[id];
            FragmentOptions opt{m_cfg.mtu, m_cfg.setsPerFrame, m_cfg.ulStream.psdb};
            auto sets = FragmentFrame(f, opt, m_ids, &v.psi);
            AnnotateMetadata(sets, m_cfg.mapping, m_cfg.nnOneVisible);
            RegisterFrame(v.ulFrames, v.ulSetFrame, f, sets, m_cfg.ulStream.psdb);
            for (auto& s : sets) {
                v.ulQ->Enqueue(s, m_eq.Now());
            }
            v.uai->Observe(f.arrival, sets.empty() ? kPsiHigh : sets.front().psi);
            if (auto msg = v.uai->Build(m_eq.Now())) {
                ++v.uaiCount;
                LogEvent(v.id, "uai", "period_ms=" + std::to_string(msg->periodicityMs.numerator()) + "/"
                                          + std::to_string(msg->periodicityMs.denominator()));
            }
            ScheduleUlFrame(v);
        });
    }

    void SchedulePose(Ue& u)
    {
        int id = u.id;
        PduSet s = u.pose->Next(m_ids, m_cfg.ulStream.psdb);
        if (s.arrival >= m_end) {
            return;
        }
        m_eq.Schedule(std::max(s.arrival, m_eq.Now()), EventKind::FrameArrival, [this, id, s] {
            Ue& v = m_ues[id];
            v.ulQ->Enqueue(s, m_eq.Now());
            SchedulePose(v);
        });
    }

    void ScheduleFtp(Ue& u)
    {
        FtpFile f = u.ftp->Next(u.traffic);
        if (f.arrival >= m_end) {
            return;
        }
        int id = u.id;
        m_eq.Schedule(f.arrival, EventKind::FrameArrival, [this, id, f] {
            Ue& v = m_ues[id];
            for (const auto& p : Ftp3Source::Packetize(f, m_cfg.mtu, m_ids)) {
                v.dlQ->Enqueue(p, m_eq.Now());
            }
            ScheduleFtp(v);
        });
    }

    void RegisterFrame(std::unordered_map<FrameId, FrameRec>& frames, std::unordered_map<PduSetId, FrameId>& setFrame,
                       const VideoFrame& f, const std::vector<PduSet>& sets, Micros psdb)
    {
        FrameRec r;
        r.arrival = f.arrival;
        r.deadline = f.arrival + psdb;
        for (const auto& s : sets) {
            r.pdusLeft += static_cast<std::uint32_t>(s.pdus.size());
            setFrame[s.id] = f.index;
        }
        frames[f.index] = r;
    }

    // --- per slot ----------------------------------------------------------

    void OnSlot()
    {
        std::int64_t slot = m_eq.SlotIndex();
        Micros now = m_eq.Now();
        SlotType type = SlotTypeOf(slot);

        for (auto& u : m_ues) {
            Discards(u, now);
        }
        if (slot % m_cfg.csiPeriodSlots == 0) {
            UpdateCsi();
        }
        for (auto& u : m_ues) {
            BeginDrx(u, slot, now);
            u.dataThisSlot = false;
            u.newDlData = false;
        }
        if (CarriesDownlink(type)) {
            DownlinkSlot(slot, now);
        }
        if (CarriesUplink(type)) {
            UplinkSlot(slot, now);
        }
        for (auto& u : m_ues) {
            if (u.drx && u.newDlData) {
                u.drx->NotifyNewData(slot);
            }
            SlotActivity a = u.dataThisSlot ? SlotActivity::Data
                                            : (u.awake ? SlotActivity::Monitor : SlotActivity::Sleep);
            if (now >= m_cfg.warmup) {
                u.activity.push_back(a);
            }
        }
        Micros next = now + kSlotUs;
        if (next < m_end) {
            m_eq.Schedule(next, EventKind::SlotBoundary, [this] { OnSlot(); });
        }
    }

    void Discards(Ue& u, Micros now)
    {
        if (!u.xr) {
            return;
        }
        for (auto* q : {u.dlQ.get(), u.ulQ.get()}) {
            q->DiscardExpired(now);
            if (q->Profile().psiDiscard) {
                // full-cell drain: DL holds about 0.7 of the slots, UL 0.2
                double rate = q == u.dlQ.get() ? ContinuousSe(u.csiDl) * 12 * 12 * kNumRb * 2000.0 * 0.7
                                               : ContinuousSe(u.csiUl) * 12 * 12 * kNumRb * 2000.0 * 0.2;
                q->PsiDiscard(now, rate);
            }
        }
        MarkLostFrames(u, true);
        MarkLostFrames(u, false);
    }

    void MarkLostFrames(Ue& u, bool dl)
    {
        auto& q = dl ? *u.dlQ : *u.ulQ;
        auto& frames = dl ? u.dlFrames : u.ulFrames;
        auto& setFrame = dl ? u.dlSetFrame : u.ulSetFrame;
        for (PduSetId sid : q.TakeLostSets()) {
            auto it = setFrame.find(sid);
            if (it == setFrame.end()) {
                continue;
            }
            auto f = frames.find(it->second);
            if (f != frames.end()) {
                f->second.lost = true;
            }
            setFrame.erase(it);
        }
    }

    void UpdateCsi()
    {
        for (auto& u : m_ues) {
            u.csiDl = DlSinr(u, m_cellActivityDl);
            u.csiUl = UlSinrEstimate(u);
        }
    }

    double DlSinr(const Ue& u, const std::vector<double>& activity) const
    {
        std::vector<DlInterferer> intf;
        for (int c = 0; c < m_cells; ++c) {
            if (c != u.cell) {
                intf.push_back(DlInterferer{u.cl[c], activity[c]});
            }
        }
        return DlSinrDb(u.cl[u.cell], intf);
    }

    double UlInterferenceMw(int cell) const
    {
        double mw = 0.0;
        for (int c = 0; c < m_cells; ++c) {
            if (c == cell) {
                continue;
            }
            for (const auto& [ue, rb] : m_ulAllocPrev[c]) {
                const Ue& o = m_ues[ue];
                mw += DbToLinear(o.ulTxPsd - o.cl[cell]) * static_cast<double>(rb) / kNumRb;
            }
        }
        return mw;
    }

    double UlSinrEstimate(const Ue& u) const
    {
        double pl = u.cl[u.cell];
        double s = UlRxPsdDbm(1, pl);
        double n = DbToLinear(NoisePerRbDbm(kBsNoiseFigureDb)) + UlInterferenceMw(u.cell);
        return s - LinearToDb(n);
    }

    void BeginDrx(Ue& u, std::int64_t slot, Micros now)
    {
        if (!u.drx) {
            u.awake = true;
        } else {
            u.awake = u.drx->BeginSlot(slot);
            if (u.adrx && u.drx->CycleIndex() != u.lastCycle) {
                if (u.lastCycle >= 0) {
                    auto d = u.adrx->Update(u.feedback);
                    u.drx->SetOnDuration(d.onDurationMs);
                    u.drx->SetOffsetShift(d.offsetShiftMs);
                    u.feedback = AdrxFeedback{};
                }
                u.lastCycle = u.drx->CycleIndex();
            }
        }
        if (!u.adrx) {
            return;
        }
        // frames whose budget ran out unserved count as violations now
        std::erase_if(u.dlOpen, [&](FrameId id) {
            auto it = u.dlFrames.find(id);
            if (it == u.dlFrames.end()) {
                return true;
            }
            FrameRec& f = it->second;
            if (f.completion >= 0 || f.counted) {
                return true;
            }
            if (now > f.deadline) {
                f.counted = true;
                ++u.feedback.violations;
                return true;
            }
            if (u.awake && f.firstAwake < 0) {
                f.firstAwake = now;
            }
            return false;
        });
    }

    // --- downlink ------------------------------------------------------------

    void DownlinkSlot(std::int64_t slot, Micros now)
    {
        int sym = DataSymbols(SlotTypeOf(slot), Direction::Downlink);
        std::vector<std::vector<Tb>> tbs(m_cells);
        std::vector<int> used(m_cells, 0);
        for (int c = 0; c < m_cells; ++c) {
            // HARQ retransmissions first
            auto& pend = m_retx[c];
            for (auto it = pend.begin(); it != pend.end();) {
                if (it->dir == Direction::Downlink && it->dueSlot <= slot && used[c] + it->rbCount <= kNumRb) {
                    used[c] += it->rbCount;
                    m_ues[it->ue].dataThisSlot = true;
                    tbs[c].push_back(std::move(*it));
                    it = pend.erase(it);
                } else {
                    ++it;
                }
            }
            std::vector<DlCandidate> cand;
            for (auto& u : m_ues) {
                if (u.cell != c || !u.awake) {
                    continue;
                }
                bool full = !u.xr && m_cfg.embbTraffic == EmbbTraffic::FullBuffer;
                if (!full && u.dlQ->Empty()) {
                    continue;
                }
                auto mcs = SelectMcs(u.csiDl);
                DlCandidate d;
                d.ue = u.id;
                d.xr = u.xr;
                d.fullBuffer = full;
                d.queuedBits = u.dlQ->UnsentBytes() * 8;
                d.spectralEfficiency = mcs.spectralEfficiency;
                d.mcs = mcs.index;
                d.avgThroughput = u.pfAvg;
                d.psdb = m_cfg.dlStream.psdb;
                if (auto h = u.dlQ->HeadSet()) {
                    d.holDelay = now - h->arrival;
                    d.headSetBits = h->setBytes * 8;
                    d.headSentBits = h->sentBytes * 8;
                    d.remainingBudget = h->deadline == kNoDeadline ? d.psdb : h->deadline - now;
                }
                cand.push_back(d);
            }
            auto allocs = AllocateDl(slot, cand, m_cfg.scheduler, kNumRb - used[c], used[c]);
            for (auto& a : allocs) {
                Ue& u = m_ues[a.ue];
                Tb tb;
                tb.ue = a.ue;
                tb.dir = Direction::Downlink;
                tb.rbCount = a.rbCount;
                tb.mcs = a.mcs;
                tb.tbBits = a.tbBits;
                tb.harq.tbBits = a.tbBits;
                tb.harq.mcs = a.mcs;
                bool full = !u.xr && m_cfg.embbTraffic == EmbbTraffic::FullBuffer;
                if (!full) {
                    tb.segs = u.dlQ->Dequeue(a.tbBits / 8, now);
                }
                used[c] += a.rbCount;
                u.dataThisSlot = true;
                u.newDlData = true;
                tbs[c].push_back(std::move(tb));
            }
        }
        std::vector<double> activity(m_cells);
        for (int c = 0; c < m_cells; ++c) {
            activity[c] = static_cast<double>(used[c]) / kNumRb;
            m_rbUtil.push_back(activity[c]);
        }
        std::vector<std::uint64_t> served(m_ues.size(), 0);
        for (int c = 0; c < m_cells; ++c) {
            for (auto& tb : tbs[c]) {
                Ue& u = m_ues[tb.ue];
                double sinr = DlSinr(u, activity);
                auto out = HarqAttempt(tb.harq, sinr, u.harqRng);
                if (out == HarqOutcome::Ack) {
                    served[tb.ue] += tb.tbBits;
                    DeliverDl(u, tb, now + kSlotUs);
                } else if (tb.harq.Exhausted()) {
                    LoseTb(u, tb, now, true);
                } else {
                    tb.dueSlot = NextSlotFor(Direction::Downlink, slot + kHarqRttSlots);
                    m_retx[c].push_back(std::move(tb));
                }
            }
        }
        for (auto& u : m_ues) {
            u.pfAvg = UpdateAverage(u.pfAvg, static_cast<double>(served[u.id]), m_cfg.scheduler.pfAvgWindow);
        }
        (void)sym;
        m_cellActivityDl = activity;
    }

    void DeliverDl(Ue& u, const Tb& tb, Micros at)
    {
        if (!u.xr && m_cfg.embbTraffic == EmbbTraffic::FullBuffer) {
            if (at > m_cfg.warmup) {
                u.deliveredBits += tb.tbBits;
            }
            return;
        }
        auto done = u.dlQ->OnDelivered(tb.segs, at);
        for (const auto& d : done) {
            if (at > m_cfg.warmup) {
                u.deliveredBits += static_cast<std::uint64_t>(d.bytes) * 8;
            }
        }
        CompleteFrames(u, done, at, true);
    }

    void CompleteFrames(Ue& u, const std::vector<Segment>& done, Micros at, bool dl)
    {
        auto& frames = dl ? u.dlFrames : u.ulFrames;
        auto& setFrame = dl ? u.dlSetFrame : u.ulSetFrame;
        for (const auto& d : done) {
            auto it = setFrame.find(d.set);
            if (it == setFrame.end()) {
                continue;
            }
            auto f = frames.find(it->second);
            if (f == frames.end() || f->second.lost) {
                continue;
            }
            if (--f->second.pdusLeft == 0) {
                f->second.completion = at;
                if (dl && u.adrx) {
                    FrameRec& r = f->second;
                    if (!r.counted) {
                        r.counted = true;
                        if (at > r.deadline) {
                            ++u.feedback.violations;
                        }
                    }
                    double phase = ToDouble(Rational(r.arrival, kMsUs) - u.drxBaseMs);
                    double cyc = ToDouble(m_cfg.drx.cycleMs);
                    phase = std::fmod(phase, cyc);
                    if (phase < 0) {
                        phase += cyc;
                    }
                    Micros from = r.firstAwake >= 0 ? std::max(r.firstAwake, r.arrival) : r.arrival;
                    u.feedback.frames.push_back(AdrxFrameSample{phase, ToMs(at - from)});
                }
            }
        }
    }

    void LoseTb(Ue& u, const Tb& tb, Micros now, bool dl)
    {
        auto& q = dl ? *u.dlQ : *u.ulQ;
        q.OnLost(tb.segs, now);
        MarkLostFrames(u, dl);
        LogEvent(u.id, "harq_drop", std::string(dl ? "dl" : "ul") + " tb_bits=" + std::to_string(tb.tbBits));
    }

    // --- uplink --------------------------------------------------------------

    void UplinkSlot(std::int64_t slot, Micros now)
    {
        int sym = DataSymbols(SlotTypeOf(slot), Direction::Uplink);
        std::vector<std::vector<Tb>> tbs(m_cells);
        std::vector<std::vector<std::pair<int, int>>> allocNow(m_cells);
        for (int c = 0; c < m_cells; ++c) {
            int used = 0;
            auto& pend = m_retx[c];
            for (auto it = pend.begin(); it != pend.end();) {
                if (it->dir == Direction::Uplink && it->dueSlot <= slot && used + it->rbCount <= kNumRb) {
                    used += it->rbCount;
                    allocNow[c].push_back({it->ue, it->rbCount});
                    tbs[c].push_back(std::move(*it));
                    it = pend.erase(it);
                } else {
                    ++it;
                }
            }
            // configured grant occasions, packed at the top of the band
            int cgUsed = 0;
            for (auto& u : m_ues) {
                if (u.cell != c || u.cgOcc.empty()) {
                    continue;
                }
                while (u.cgNext < u.cgOcc.size() && u.cgOcc[u.cgNext].slot < slot) {
                    ++u.cgNext;
                }
                if (u.cgNext >= u.cgOcc.size() || u.cgOcc[u.cgNext].slot != slot) {
                    continue;
                }
                const CgOccasion& occ = u.cgOcc[u.cgNext];
                if (u.reclaimed.count(slot)) {
                    continue;
                }
                cgUsed += occ.rbCount;
                if (u.ulQ->Empty()) {
                    continue;
                }
                int mcs = m_cfg.cg->trackCsi ? SelectMcs(u.csiUl).index : occ.mcs;
                Tb tb = BuildUlTb(u, occ.rbCount, mcs, TbBitsForMcs(mcs, occ.rbCount, sym), now, false);
                if (m_cfg.utoUci) {
                    SendUtoUci(u, slot, sym);
                }
                allocNow[c].push_back({u.id, occ.rbCount});
                tbs[c].push_back(std::move(tb));
            }
            std::vector<UlCandidate> cand;
            for (auto& u : m_ues) {
                if (u.cell != c || !u.xr) {
                    continue;
                }
                std::uint64_t est = 0;
                if (m_cfg.idealBsr) {
                    est = u.ulQ->UnsentBytes();
                    if (est > 0) {
                        est += u.bsr->CeBytes();
                    }
                } else if (u.gnbEstimate > 0) {
                    est = u.gnbEstimate + u.bsr->CeBytes();
                } else if (u.srReceived) {
                    est = m_cfg.srGrantBytes;
                }
                if (est == 0) {
                    continue;
                }
                auto mcs = SelectMcs(u.csiUl);
                UlCandidate uc;
                uc.ue = u.id;
                uc.estimatedBytes = est;
                uc.spectralEfficiency = mcs.spectralEfficiency;
                uc.mcs = mcs.index;
                uc.pathlossDb = u.cl[c];
                uc.waiting = now - u.gnbReportTime;
                if (u.dsrUrgentUntil >= now) {
                    uc.waiting += Seconds(1);
                }
                cand.push_back(uc);
            }
            int avail = kNumRb - used - cgUsed;
            auto allocs = AllocateUl(slot, cand, avail);
            for (auto& a : allocs) {
                Ue& u = m_ues[a.ue];
                if (!m_cfg.idealBsr) {
                    std::uint64_t payload = a.tbBits / 8 > u.bsr->CeBytes() ? a.tbBits / 8 - u.bsr->CeBytes() : 0;
                    u.gnbEstimate = u.gnbEstimate > payload ? u.gnbEstimate - payload : 0;
                    u.srReceived = false;
                }
                Tb tb = BuildUlTb(u, a.rbCount, a.mcs, a.tbBits, now, true);
                u.srInFlight = false;
                allocNow[c].push_back({u.id, a.rbCount});
                tbs[c].push_back(std::move(tb));
            }
            m_rbUtil.push_back(static_cast<double>(used + cgUsed
                                                   + std::accumulate(allocs.begin(), allocs.end(), 0,
                                                                     [](int acc, const Allocation& a) {
                                                                         return acc + a.rbCount;
                                                                     }))
                               / kNumRb);
        }
        m_ulAllocPrev = allocNow;
        for (int c = 0; c < m_cells; ++c) {
            double intf = UlInterferenceMw(c);
            for (auto& tb : tbs[c]) {
                Ue& u = m_ues[tb.ue];
                u.dataThisSlot = true;
                double pl = u.cl[c];
                double s = UlRxPsdDbm(tb.rbCount, pl);
                double sinr = s - LinearToDb(DbToLinear(NoisePerRbDbm(kBsNoiseFigureDb)) + intf);
                auto out = HarqAttempt(tb.harq, sinr, u.harqRng);
                if (out == HarqOutcome::Ack) {
                    ReceiveUl(u, tb, now + kSlotUs);
                } else if (tb.harq.Exhausted()) {
                    LoseTb(u, tb, now, false);
                } else {
                    tb.dueSlot = NextSlotFor(Direction::Uplink, slot + kHarqRttSlots);
                    m_retx[c].push_back(std::move(tb));
                }
            }
        }
        // scheduling requests for data the gNB does not know about
        for (auto& u : m_ues) {
            if (!u.xr || m_cfg.idealBsr) {
                continue;
            }
            bool dsrDue = m_cfg.dsr && u.dsr->Triggered(u.ulQ->DsrView(), now);
            if ((u.ulQ->UnsentBytes() > 0 && u.outstanding == 0) || dsrDue) {
                if (!u.srInFlight) {
                    u.srInFlight = true;
                    u.srReceived = true;
                }
            }
        }
    }

    Tb BuildUlTb(Ue& u, int rbCount, int mcs, std::uint64_t tbBits, Micros now, bool dynamic)
    {
        Tb tb;
        tb.ue = u.id;
        tb.dir = Direction::Uplink;
        tb.rbCount = rbCount;
        tb.mcs = mcs;
        tb.tbBits = tbBits;
        tb.harq.tbBits = tbBits;
        tb.harq.mcs = mcs;
        tb.dynamic = dynamic;
        std::uint64_t ce = u.bsr->CeBytes();
        std::uint64_t tbBytes = tbBits / 8;
        std::uint64_t payload = tbBytes > ce ? tbBytes - ce : 0;
        tb.segs = u.ulQ->Dequeue(payload, now);
        std::uint64_t sent = 0;
        for (const auto& s : tb.segs) {
            sent += s.bytes;
        }
        std::uint64_t remaining = u.ulQ->UnsentBytes();
        if (m_cfg.dsr) {
            tb.dsr = u.dsr->Build(u.ulQ->DsrView(), now);
        }
        tb.bsr = u.bsr->Build(remaining, now);
        tb.idealBuffer = remaining;
        u.outstanding = m_cfg.idealBsr ? remaining : tb.bsr->reportedBytes;
        std::uint64_t pad = RealizedOverhead(payload, sent);
        if (dynamic && now >= m_cfg.warmup) {
            u.padding += pad;
            ++u.dynTbs;
            m_padding.push_back(static_cast<double>(pad));
        }
        if (m_cfg.logEvents) {
            LogEvent(u.id, "bsr", std::string(ToString(tb.bsr->kind)) + " index=" + std::to_string(tb.bsr->index)
                                      + " bytes=" + std::to_string(tb.bsr->reportedBytes)
                                      + " padding=" + std::to_string(pad));
        }
        return tb;
    }

    void SendUtoUci(Ue& u, std::int64_t slot, int sym)
    {
        int n = m_cfg.cg->utoUciWindow;
        std::vector<CgOccasion> window;
        std::vector<std::uint64_t> caps;
        for (std::size_t k = u.cgNext + 1; k < u.cgOcc.size() && static_cast<int>(window.size()) < n; ++k) {
            window.push_back(u.cgOcc[k]);
            int mcs = m_cfg.cg->trackCsi ? SelectMcs(u.csiUl).index : u.cgOcc[k].mcs;
            std::uint64_t cap = TbBitsForMcs(mcs, u.cgOcc[k].rbCount, sym) / 8;
            caps.push_back(cap > u.bsr->CeBytes() ? cap - u.bsr->CeBytes() : 0);
        }
        if (static_cast<int>(window.size()) < n) {
            return;
        }
        auto bits = BuildUtoUci(u.ulQ->UnsentBytes(), caps, n);
        for (const auto& r : ReclaimUnused(bits, window, slot + 1)) {
            u.reclaimed.insert(r.slot);
        }
    }

    void ReceiveUl(Ue& u, const Tb& tb, Micros at)
    {
        auto done = u.ulQ->OnDelivered(tb.segs, at);
        for (const auto& d : done) {
            if (at > m_cfg.warmup) {
                u.deliveredBits += static_cast<std::uint64_t>(d.bytes) * 8;
            }
        }
        CompleteFrames(u, done, at, false);
        if (tb.bsr && !m_cfg.idealBsr) {
            u.gnbEstimate = tb.bsr->reportedBytes;
            u.gnbReportTime = tb.bsr->timestamp;
        }
        if (tb.dsr) {
            u.dsrUrgentUntil = tb.dsr->referenceTime + tb.dsr->smallestRemaining;
        }
    }

    // --- results -------------------------------------------------------------

    void LogEvent(int ue, std::string ev, std::string detail)
    {
        if (m_cfg.logEvents) {
            m_events.push_back(EventRow{m_eq.Now(), ue, std::move(ev), std::move(detail)});
        }
    }

    FlowOutcome Outcome(const std::unordered_map<FrameId, FrameRec>& frames) const
    {
        FlowOutcome o;
        for (const auto& [id, f] : frames) {
            if (f.arrival < m_cfg.warmup || f.deadline > m_end) {
                continue;
            }
            ++o.frames;
            if (!f.lost && f.completion >= 0 && f.completion <= f.deadline) {
                ++o.inBudget;
            }
        }
        return o;
    }

    RunResult Collect()
    {
        RunResult r;
        double measured = ToMs(m_cfg.duration) / 1000.0;
        auto trace = [this](const Ue& u) {
            auto states = ClassifyTrace(u.activity, m_cfg.power);
            return PowerForRun(states, m_cfg.power);
        };
        for (const auto& u : m_ues) {
            UeResult x;
            x.ue = u.id;
            x.cell = u.cell;
            x.xr = u.xr;
            x.dl = Outcome(u.dlFrames);
            x.ul = Outcome(u.ulFrames);
            x.throughputBps = static_cast<double>(u.deliveredBits) / measured;
            x.meanPower = trace(u);
            x.paddingBytes = u.padding;
            x.ulDynamicTbs = u.dynTbs;
            x.lostSets = u.dlQ->LostSets() + u.ulQ->LostSets();
            x.totalSets = u.dlQ->TotalSets() + u.ulQ->TotalSets();
            x.uaiMessages = u.uaiCount;
            r.ues.push_back(x);
        }
        r.paddingSamples = std::move(m_padding);
        r.rbUtilization = std::move(m_rbUtil);
        if (m_cfg.logEvents) {
            for (const auto& [key, log] : m_pduLog) {
                for (const auto& e : log) {
                    if (e.kind == PduEventKind::Discarded || e.kind == PduEventKind::Lost) {
                        std::string d = std::string(key.second ? "ul" : "dl") + " set=" + std::to_string(e.set)
                                        + " pdu=" + std::to_string(e.pdu);
                        if (e.kind == PduEventKind::Discarded) {
                            d += std::string(" cause=") + ToString(e.cause);
                        }
                        m_events.push_back(EventRow{e.time, key.first, ToString(e.kind), d});
                    }
                }
            }
            std::stable_sort(m_events.begin(), m_events.end(), [](const EventRow& a, const EventRow& b) {
                if (a.time != b.time) {
                    return a.time < b.time;
                }
                return a.ue < b.ue;
            });
            r.events = std::move(m_events);
        }
        r.engine = m_eq.Stats();
        return r;
    }

    NetworkConfig m_cfg;
    RngStreams m_streams;
    EventQueue m_eq;
    IdSource m_ids;
    int m_cells = 1;
    Micros m_end = 0;
    std::vector<Ue> m_ues;
    std::vector<double> m_cellActivityDl;
    std::vector<double> m_cellActivityUl;
    std::vector<std::vector<Tb>> m_retx;
    std::vector<std::vector<std::pair<int, int>>> m_ulAllocPrev;
    std::vector<double> m_padding;
    std::vector<double> m_rbUtil;
    std::vector<EventRow> m_events;
    std::map<std::pair<int, int>, std::vector<PduEvent>> m_pduLog;
};

} // namespace xrsim
