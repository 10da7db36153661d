#pragma once

#include "xrsim/l4s/l4s.hpp"
#include "xrsim/sim/network.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace xrsim {

struct ExperimentConfig {
    NetworkConfig network;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int loadMin = 1;
    int loadMax = 1;
    bool l4s = false;
    L4sLoopConfig l4sLoop;
    int jobs = 1;

    void Validate() const
    {
        if (seeds.empty()) {
            throw std::invalid_argument("at least one seed is required");
        }
        if (loadMin < 1 || loadMax < loadMin) {
            throw std::invalid_argument("UEs-per-cell range must satisfy 1 <= min <= max");
        }
        if (jobs < 1) {
            throw std::invalid_argument("jobs must be at least 1");
        }
        NetworkConfig probe = network;
        probe.xrUesPerCell = loadMin;
        probe.Validate();
        if (l4s) {
            l4sLoop.source.Validate();
            l4sLoop.thresholds.Validate();
        }
    }
};

namespace detail {

inline std::string Trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double ToDoubleStrict(const std::string& s)
{
    std::string t = Trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    return v;
}

inline std::int64_t ToIntStrict(const std::string& s)
{
    std::string t = Trim(s);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    }
    return v;
}

inline bool ToBool(const std::string& s)
{
    std::string t = Trim(s);
    for (auto& c : t) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (t == "true" || t == "1" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "false" || t == "0" || t == "no" || t == "off") {
        return false;
    }
    throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

inline Micros MsToMicros(const std::string& s) { return FloorMicros(ParseRational(Trim(s))); }

} // namespace detail

/// "1,2,5" -> {1, 2, 5}; "1-3" -> {1, 2, 3}; forms may be mixed.
inline std::vector<std::uint64_t> ParseSeedList(const std::string& text)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::Trim(item);
        if (item.empty()) {
            throw std::invalid_argument("empty entry in list '" + text + "'");
        }
        auto dash = item.find('-', 1);
        if (dash == std::string::npos) {
            auto v = detail::ToIntStrict(item);
            if (v < 0) {
                throw std::invalid_argument("negative seed in '" + text + "'");
            }
            out.push_back(static_cast<std::uint64_t>(v));
        } else {
            auto a = detail::ToIntStrict(item.substr(0, dash));
            auto b = detail::ToIntStrict(item.substr(dash + 1));
            if (a < 0 || b < a) {
                throw std::invalid_argument("bad range '" + item + "'");
            }
            for (auto v = a; v <= b; ++v) {
                out.push_back(static_cast<std::uint64_t>(v));
            }
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list");
    }
    return out;
}

/// "4" or "1-10".
inline std::pair<int, int> ParseLoadRange(const std::string& text)
{
    std::string t = detail::Trim(text);
    auto dash = t.find('-', 1);
    if (dash == std::string::npos) {
        auto v = static_cast<int>(detail::ToIntStrict(t));
        return {v, v};
    }
    return {static_cast<int>(detail::ToIntStrict(t.substr(0, dash))),
            static_cast<int>(detail::ToIntStrict(t.substr(dash + 1)))};
}

inline std::vector<int> ParseIntList(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<int>(detail::ToIntStrict(item)));
    }
    return out;
}

inline MappingConfig ParseMapping(const std::string& s)
{
    auto t = detail::Trim(s);
    if (t == "1:1:1") {
        return MappingConfig::OneOneOne;
    }
    if (t == "n:1:1") {
        return MappingConfig::NOneOne;
    }
    if (t == "n:n:1") {
        return MappingConfig::NNOne;
    }
    throw std::invalid_argument("unknown mapping '" + s + "' (expected 1:1:1, n:1:1 or n:n:1)");
}

inline BsTableKind ParseBsTable(const std::string& s)
{
    auto t = detail::Trim(s);
    if (t == "short") {
        return BsTableKind::Short;
    }
    if (t == "long") {
        return BsTableKind::Long;
    }
    if (t == "refined") {
        return BsTableKind::RefinedLong;
    }
    throw std::invalid_argument("unknown BSR table '" + s + "' (expected short, long or refined)");
}

inline L4sMethod ParseL4sMethod(const std::string& s)
{
    auto t = detail::Trim(s);
    if (t == "none") {
        return L4sMethod::Disabled;
    }
    if (t == "ran") {
        return L4sMethod::RanMarking;
    }
    if (t == "upf") {
        return L4sMethod::UpfMarking;
    }
    throw std::invalid_argument("unknown L4S method '" + s + "' (expected none, ran or upf)");
}

using ConfigSetter = std::function<void(ExperimentConfig&, const std::string&)>;

/// Every accepted "section.key" with its parser.
inline const std::map<std::string, ConfigSetter>& ConfigSchema()
{
    using namespace detail;
    static const std::map<std::string, ConfigSetter> schema = [] {
        std::map<std::string, ConfigSetter> m;
        auto stream = [&m](const std::string& sec, auto pick) {
            m[sec + ".enabled"] = [pick](ExperimentConfig& c, const std::string& v) { pick(c).first = ToBool(v); };
            m[sec + ".rate_mbps"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.avgRateBps = ToDoubleStrict(v) * 1e6;
            };
            m[sec + ".fps"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.fps = ParseRational(Trim(v));
            };
            m[sec + ".size_std_frac"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.sizeStdFrac = ToDoubleStrict(v);
            };
            m[sec + ".jitter_std_ms"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.jitterStdMs = ToDoubleStrict(v);
            };
            m[sec + ".jitter_min_ms"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.jitterMinMs = ToDoubleStrict(v);
            };
            m[sec + ".jitter_max_ms"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.jitterMaxMs = ToDoubleStrict(v);
            };
            m[sec + ".psdb_ms"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).second.psdb = MsToMicros(v);
            };
        };
        struct StreamRef {
            bool& first;
            VideoStreamConfig& second;
        };
        stream("dl_video", [](ExperimentConfig& c) { return StreamRef{c.network.dlVideo, c.network.dlStream}; });
        stream("ul_video", [](ExperimentConfig& c) { return StreamRef{c.network.ulVideo, c.network.ulStream}; });

        auto qos = [&m](const std::string& sec, auto pick) {
            m[sec + ".pser"] = [pick](ExperimentConfig& c, const std::string& v) { pick(c).pser = ToDoubleStrict(v); };
            m[sec + ".psihi"] = [pick](ExperimentConfig& c, const std::string& v) { pick(c).psihi = ToBool(v); };
            m[sec + ".psi_discard"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).psiDiscard = ToBool(v);
            };
            m[sec + ".discard_timer_ms"] = [pick](ExperimentConfig& c, const std::string& v) {
                pick(c).discardTimer = MsToMicros(v);
            };
        };
        qos("qos_dl", [](ExperimentConfig& c) -> QosFlowProfile& { return c.network.dlProfile; });
        qos("qos_ul", [](ExperimentConfig& c) -> QosFlowProfile& { return c.network.ulProfile; });

        m["scenario.cells"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.deployment.cells = static_cast<int>(ToIntStrict(v));
        };
        m["scenario.inter_site_m"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.deployment.interSiteM = ToDoubleStrict(v);
        };
        m["scenario.ues_per_cell"] = [](ExperimentConfig& c, const std::string& v) {
            std::tie(c.loadMin, c.loadMax) = ParseLoadRange(v);
        };
        m["scenario.embb_ues_per_cell"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.embbUesPerCell = static_cast<int>(ToIntStrict(v));
        };
        m["scenario.embb_traffic"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.embbTraffic = ParseEmbbTraffic(Trim(v));
        };
        m["scenario.duration_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.duration = FloorMicros(ParseRational(Trim(v)) * Rational(1000));
        };
        m["scenario.warmup_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.warmup = FloorMicros(ParseRational(Trim(v)) * Rational(1000));
        };
        m["scenario.seeds"] = [](ExperimentConfig& c, const std::string& v) { c.seeds = ParseSeedList(v); };
        m["scenario.jobs"] = [](ExperimentConfig& c, const std::string& v) {
            c.jobs = static_cast<int>(ToIntStrict(v));
        };
        m["scenario.log_events"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.logEvents = ToBool(v);
        };
        m["scenario.csi_period_slots"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.csiPeriodSlots = static_cast<int>(ToIntStrict(v));
        };

        m["pose.enabled"] = [](ExperimentConfig& c, const std::string& v) { c.network.ulPose = ToBool(v); };
        m["pose.period_ms"] = [](ExperimentConfig& c, const std::string& v) { c.network.posePeriod = MsToMicros(v); };
        m["pose.bytes"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.poseBytes = static_cast<std::uint32_t>(ToIntStrict(v));
        };

        m["pduset.mtu"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.mtu = static_cast<std::uint32_t>(ToIntStrict(v));
        };
        m["pduset.sets_per_frame"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.setsPerFrame = static_cast<int>(ToIntStrict(v));
        };
        m["pduset.psi_pattern"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.psiPattern = ParseIntList(v);
        };
        m["pduset.mapping"] = [](ExperimentConfig& c, const std::string& v) { c.network.mapping = ParseMapping(v); };
        m["pduset.nn1_visible"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.nnOneVisible = ToBool(v);
        };

        m["scheduler.kind"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.scheduler.kind = ParseSchedulerKind(Trim(v));
        };
        m["scheduler.pf_window"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.scheduler.pfAvgWindow = static_cast<int>(ToIntStrict(v));
        };
        m["scheduler.pduset_alpha"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.scheduler.pdusetAlpha = ToDoubleStrict(v);
        };
        m["scheduler.epsilon_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.scheduler.epsilonTime = MsToMicros(v);
        };
        m["scheduler.mlwdf_target_loss"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.scheduler.mlwdfTargetLoss = ToDoubleStrict(v);
        };

        m["bsr.table"] = [](ExperimentConfig& c, const std::string& v) { c.network.bsrMode = ParseBsTable(v); };
        m["bsr.ideal"] = [](ExperimentConfig& c, const std::string& v) { c.network.idealBsr = ToBool(v); };
        m["bsr.sr_grant_bytes"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.srGrantBytes = static_cast<std::uint32_t>(ToIntStrict(v));
        };
        m["dsr.enabled"] = [](ExperimentConfig& c, const std::string& v) { c.network.dsr = ToBool(v); };
        m["dsr.threshold_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.dsrThreshold = MsToMicros(v);
        };

        auto cg = [](ExperimentConfig& c) -> CgConfig& {
            if (!c.network.cg) {
                c.network.cg = CgConfig{};
            }
            return *c.network.cg;
        };
        m["cg.enabled"] = [](ExperimentConfig& c, const std::string& v) {
            if (ToBool(v)) {
                if (!c.network.cg) {
                    c.network.cg = CgConfig{};
                }
            } else {
                c.network.cg.reset();
            }
        };
        m["cg.periodicity_ms"] = [cg](ExperimentConfig& c, const std::string& v) {
            cg(c).periodicityMs = ParseRational(Trim(v));
        };
        m["cg.occasions"] = [cg](ExperimentConfig& c, const std::string& v) {
            cg(c).occasionsPerPeriod = static_cast<int>(ToIntStrict(v));
        };
        m["cg.rb"] = [cg](ExperimentConfig& c, const std::string& v) {
            cg(c).rbPerOccasion = static_cast<int>(ToIntStrict(v));
        };
        m["cg.mcs"] = [cg](ExperimentConfig& c, const std::string& v) { cg(c).mcs = static_cast<int>(ToIntStrict(v)); };
        m["cg.track_csi"] = [cg](ExperimentConfig& c, const std::string& v) { cg(c).trackCsi = ToBool(v); };
        m["cg.uto_uci"] = [](ExperimentConfig& c, const std::string& v) { c.network.utoUci = ToBool(v); };
        m["cg.uto_uci_window"] = [cg](ExperimentConfig& c, const std::string& v) {
            cg(c).utoUciWindow = static_cast<int>(ToIntStrict(v));
        };

        m["drx.mode"] = [](ExperimentConfig& c, const std::string& v) { c.network.drxMode = ParseDrxMode(Trim(v)); };
        m["drx.cycle_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.drx.cycleMs = ParseRational(Trim(v));
        };
        m["drx.on_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.drx.onDurationMs = ParseRational(Trim(v));
        };
        m["drx.inactivity_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.drx.inactivityMs = ParseRational(Trim(v));
        };
        m["drx.lead_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.drxLeadMs = ParseRational(Trim(v));
        };
        m["adrx.adapt_start"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.adrx.mode = ToBool(v) ? AdrxMode::OnAndStart : AdrxMode::OnOnly;
        };
        m["adrx.v"] = [](ExperimentConfig& c, const std::string& v) { c.network.adrx.v = ToDoubleStrict(v); };
        m["adrx.target_violations"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.adrx.targetViolationsPerCycle = ToDoubleStrict(v);
        };
        m["adrx.horizon_cycles"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.adrx.horizonCycles = static_cast<int>(ToIntStrict(v));
        };

        m["power.deep_sleep"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.deepSleep = ToDoubleStrict(v);
        };
        m["power.light_sleep"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.lightSleep = ToDoubleStrict(v);
        };
        m["power.pdcch"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.pdcchOnly = ToDoubleStrict(v);
        };
        m["power.pdcch_pdsch"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.pdcchPdsch = ToDoubleStrict(v);
        };
        m["power.deep_sleep_transition"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.deepSleepTransition = ToDoubleStrict(v);
        };
        m["power.min_deep_sleep_slots"] = [](ExperimentConfig& c, const std::string& v) {
            c.network.power.minDeepSleepSlots = static_cast<int>(ToIntStrict(v));
        };

        m["l4s.enabled"] = [](ExperimentConfig& c, const std::string& v) { c.l4s = ToBool(v); };
        m["l4s.method"] = [](ExperimentConfig& c, const std::string& v) { c.l4sLoop.method = ParseL4sMethod(v); };
        m["l4s.capacity_mbps"] = [](ExperimentConfig& c, const std::string& v) {
            c.l4sLoop.capacityBps = ToDoubleStrict(v) * 1e6;
        };
        m["l4s.t_low_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.l4sLoop.thresholds.tLowMs = ToDoubleStrict(v);
        };
        m["l4s.t_high_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.l4sLoop.thresholds.tHighMs = ToDoubleStrict(v);
        };
        m["l4s.rtt_ms"] = [](ExperimentConfig& c, const std::string& v) { c.l4sLoop.source.rtt = MsToMicros(v); };
        m["l4s.signaling_delay_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.l4sLoop.signalingDelay = MsToMicros(v);
        };
        m["l4s.duration_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.l4sLoop.duration = FloorMicros(ParseRational(Trim(v)) * Rational(1000));
        };
        return m;
    }();
    return schema;
}

/// Applies one "section.key = value" assignment; errors name the key.
inline void ApplyConfigValue(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& schema = ConfigSchema();
    auto it = schema.find(key);
    if (it == schema.end()) {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
    try {
        it->second(cfg, value);
    } catch (const std::exception& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

inline ExperimentConfig ParseConfig(std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.message() + " at line "
                                    + std::to_string(e.line()));
    }
    ExperimentConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw std::invalid_argument("config key '" + section + "' must sit inside a section");
        }
        for (const auto& [key, leaf] : body) {
            ApplyConfigValue(cfg, section + "." + key, leaf.data());
        }
    }
    cfg.Validate();
    return cfg;
}

inline ExperimentConfig LoadConfig(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file '" + path + "'");
    }
    return ParseConfig(in);
}

} // namespace xrsim
