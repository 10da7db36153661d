#pragma once

#include "xrsim/harness/config.hpp"
#include "xrsim/harness/csv.hpp"
#include "xrsim/harness/kpi.hpp"
#include "xrsim/l4s/l4s.hpp"
#include "xrsim/sim/network.hpp"

#include <algorithm>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xrsim {

struct SeedRun {
    int load = 0;
    std::uint64_t seed = 0;
    RunResult result;
    std::optional<RunResult> alwaysOn;   // same drop without DRX
};

struct LoadKpi {
    int load = 0;
    SatisfactionCount pooled;
    std::map<std::uint64_t, SatisfactionCount> perSeed;
    std::map<std::uint64_t, double> throughputMbps;
    std::map<std::uint64_t, double> dlInBudget;
    std::map<std::uint64_t, double> ulInBudget;
    std::map<std::uint64_t, double> meanPadding;
    std::map<std::uint64_t, double> powerGain;
    std::vector<double> paddingSamples;
    std::vector<double> throughputSamples;
    std::vector<double> rbSamples;
    std::vector<double> powerOn;
    std::vector<double> powerTechnique;
};

struct KpiReport {
    std::map<int, LoadKpi> loads;
    int capacity = 0;
    std::map<std::uint64_t, int> capacityPerSeed;
    bool drx = false;
};

inline std::vector<UeFlows> XrFlows(const RunResult& r)
{
    std::vector<UeFlows> out;
    for (const auto& u : r.ues) {
        if (!u.xr) {
            continue;
        }
        UeFlows f;
        f.flows.push_back({u.dl.frames, u.dl.inBudget});
        f.flows.push_back({u.ul.frames, u.ul.inBudget});
        out.push_back(std::move(f));
    }
    return out;
}

inline SeedRun RunOne(const ExperimentConfig& cfg, int load, std::uint64_t seed)
{
    NetworkConfig nc = cfg.network;
    nc.xrUesPerCell = load;
    SeedRun run;
    run.load = load;
    run.seed = seed;
    run.result = Network(nc, seed).Run();
    if (nc.drxMode != DrxMode2::Off) {
        nc.drxMode = DrxMode2::Off;
        nc.logEvents = false;
        run.alwaysOn = Network(nc, seed).Run();
    }
    return run;
}

/// Folds one run into the report; the fold is order-independent.
inline void Accumulate(KpiReport& rep, const SeedRun& run)
{
    LoadKpi& k = rep.loads[run.load];
    k.load = run.load;
    auto flows = XrFlows(run.result);
    auto count = CountSatisfied(flows);
    k.pooled += count;
    k.perSeed[run.seed] = count;
    std::uint64_t dlF = 0, dlOk = 0, ulF = 0, ulOk = 0, tbs = 0, pad = 0;
    double thr = 0.0;
    int n = 0;
    for (const auto& u : run.result.ues) {
        if (!u.xr) {
            continue;
        }
        dlF += u.dl.frames;
        dlOk += u.dl.inBudget;
        ulF += u.ul.frames;
        ulOk += u.ul.inBudget;
        tbs += u.ulDynamicTbs;
        pad += u.paddingBytes;
        thr += u.throughputBps / 1e6;
        k.throughputSamples.push_back(u.throughputBps / 1e6);
        ++n;
    }
    k.dlInBudget[run.seed] = dlF ? static_cast<double>(dlOk) / dlF : 0.0;
    k.ulInBudget[run.seed] = ulF ? static_cast<double>(ulOk) / ulF : 0.0;
    k.meanPadding[run.seed] = tbs ? static_cast<double>(pad) / tbs : 0.0;
    k.throughputMbps[run.seed] = n ? thr / n : 0.0;
    k.paddingSamples.insert(k.paddingSamples.end(), run.result.paddingSamples.begin(),
                            run.result.paddingSamples.end());
    k.rbSamples.insert(k.rbSamples.end(), run.result.rbUtilization.begin(), run.result.rbUtilization.end());
    if (run.alwaysOn) {
        rep.drx = true;
        std::vector<double> tech, on;
        for (std::size_t i = 0; i < run.result.ues.size(); ++i) {
            if (run.result.ues[i].xr) {
                tech.push_back(run.result.ues[i].meanPower);
                on.push_back(run.alwaysOn->ues[i].meanPower);
            }
        }
        if (!tech.empty()) {
            k.powerGain[run.seed] = PooledPowerSavingGain(tech, on);
            k.powerTechnique.insert(k.powerTechnique.end(), tech.begin(), tech.end());
            k.powerOn.insert(k.powerOn.end(), on.begin(), on.end());
        }
    }
}

inline void FinishReport(KpiReport& rep)
{
    std::map<int, double> pooled;
    std::map<std::uint64_t, std::map<int, double>> seeds;
    for (auto& [load, k] : rep.loads) {
        pooled[load] = k.pooled.Ratio();
        for (const auto& [s, c] : k.perSeed) {
            seeds[s][load] = c.Ratio();
        }
        // samples arrive per seed; sort for an order-free result
        std::sort(k.paddingSamples.begin(), k.paddingSamples.end());
        std::sort(k.throughputSamples.begin(), k.throughputSamples.end());
        std::sort(k.rbSamples.begin(), k.rbSamples.end());
    }
    rep.capacity = XrCapacity(pooled);
    for (const auto& [s, m] : seeds) {
        rep.capacityPerSeed[s] = XrCapacity(m);
    }
}

struct ExperimentOutput {
    KpiReport report;
    std::map<std::string, std::string> files;   // file name -> bytes
};

inline std::string KpiCsv(const KpiReport& rep, const std::vector<std::uint64_t>& seeds)
{
    std::vector<std::string> header{"ues_per_cell", "metric", "pooled"};
    for (auto s : seeds) {
        header.push_back("seed_" + std::to_string(s));
    }
    CsvTable t(header);
    auto row = [&](const std::string& load, const std::string& metric, double pooled, auto perSeed) {
        std::vector<std::string> r{load, metric, FormatNumber(pooled)};
        for (auto s : seeds) {
            r.push_back(FormatNumber(perSeed(s)));
        }
        t.AddRow(r);
    };
    auto mean = [](const std::map<std::uint64_t, double>& m) {
        double a = 0.0;
        for (const auto& [s, v] : m) {
            a += v;
        }
        return m.empty() ? 0.0 : a / static_cast<double>(m.size());
    };
    for (const auto& [load, k] : rep.loads) {
        std::string l = std::to_string(load);
        row(l, "satisfied_ratio", k.pooled.Ratio(), [&](auto s) { return k.perSeed.at(s).Ratio(); });
        row(l, "satisfied_ues", static_cast<double>(k.pooled.satisfied),
            [&](auto s) { return static_cast<double>(k.perSeed.at(s).satisfied); });
        row(l, "xr_ues", static_cast<double>(k.pooled.counted),
            [&](auto s) { return static_cast<double>(k.perSeed.at(s).counted); });
        row(l, "dl_frames_in_budget", mean(k.dlInBudget), [&](auto s) { return k.dlInBudget.at(s); });
        row(l, "ul_frames_in_budget", mean(k.ulInBudget), [&](auto s) { return k.ulInBudget.at(s); });
        row(l, "mean_throughput_mbps", mean(k.throughputMbps), [&](auto s) { return k.throughputMbps.at(s); });
        row(l, "mean_padding_bytes", mean(k.meanPadding), [&](auto s) { return k.meanPadding.at(s); });
        if (rep.drx) {
            double g = k.powerOn.empty() ? 0.0 : PooledPowerSavingGain(k.powerTechnique, k.powerOn);
            row(l, "power_saving_gain_pct", g, [&](auto s) {
                auto it = k.powerGain.find(s);
                return it == k.powerGain.end() ? 0.0 : it->second;
            });
        }
    }
    row("all", "xr_capacity", rep.capacity, [&](auto s) { return static_cast<double>(rep.capacityPerSeed.at(s)); });
    return t.Text();
}

inline std::string CdfCsv(const KpiReport& rep, std::vector<double> LoadKpi::*samples)
{
    CsvTable t({"ues_per_cell", "value", "fraction"});
    for (const auto& [load, k] : rep.loads) {
        for (const auto& p : Cdf(k.*samples)) {
            t.AddRow({std::to_string(load), FormatNumber(p.value), FormatNumber(p.fraction)});
        }
    }
    return t.Text();
}

inline std::string EventsCsv(const std::vector<SeedRun>& runs)
{
    CsvTable t({"seed", "ues_per_cell", "time_us", "ue", "event", "detail"});
    for (const auto& r : runs) {
        for (const auto& e : r.result.events) {
            t.AddRow({std::to_string(r.seed), std::to_string(r.load), std::to_string(e.time), std::to_string(e.ue),
                      e.event, e.detail});
        }
    }
    return t.Text();
}

inline std::string L4sCsv(const ExperimentConfig& cfg)
{
    CsvTable t({"seed", "time_us", "flow", "p", "marked_fraction", "rate_mbps", "sojourn_ms"});
    for (auto s : cfg.seeds) {
        auto res = RunL4sLoop(cfg.l4sLoop, s);
        for (const auto& row : res.rows) {
            t.AddRow({std::to_string(s), std::to_string(row.time), std::to_string(row.flow), FormatNumber(row.p),
                      FormatNumber(row.f), FormatNumber(row.rateBps / 1e6), FormatNumber(row.sojournMs)});
        }
    }
    return t.Text();
}

/// Runs every (load, seed) pair, up to `jobs` at a time; results are merged
/// in (load, seed) order so output never depends on completion order.
inline ExperimentOutput RunExperiment(const ExperimentConfig& cfg)
{
    cfg.Validate();
    std::vector<std::pair<int, std::uint64_t>> tasks;
    for (int n = cfg.loadMin; n <= cfg.loadMax; ++n) {
        for (auto s : cfg.seeds) {
            tasks.push_back({n, s});
        }
    }
    std::vector<SeedRun> runs(tasks.size());
    for (std::size_t base = 0; base < tasks.size(); base += static_cast<std::size_t>(cfg.jobs)) {
        std::vector<std::future<SeedRun>> batch;
        std::size_t end = std::min(tasks.size(), base + static_cast<std::size_t>(cfg.jobs));
        for (std::size_t i = base; i < end; ++i) {
            batch.push_back(std::async(std::launch::async, RunOne, std::cref(cfg), tasks[i].first, tasks[i].second));
        }
        for (std::size_t i = base; i < end; ++i) {
            runs[i] = batch[i - base].get();
        }
    }
    ExperimentOutput out;
    for (const auto& r : runs) {
        Accumulate(out.report, r);
    }
    FinishReport(out.report);
    out.files["kpi.csv"] = KpiCsv(out.report, cfg.seeds);
    out.files["cdf_padding_bytes.csv"] = CdfCsv(out.report, &LoadKpi::paddingSamples);
    out.files["cdf_throughput_mbps.csv"] = CdfCsv(out.report, &LoadKpi::throughputSamples);
    out.files["cdf_rb_utilization.csv"] = CdfCsv(out.report, &LoadKpi::rbSamples);
    if (cfg.network.logEvents) {
        out.files["events.csv.gz"] = GzipCompress(EventsCsv(runs));
    }
    if (cfg.l4s) {
        out.files["l4s.csv"] = L4sCsv(cfg);
    }
    return out;
}

inline void WriteOutputs(const ExperimentOutput& out, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& [name, bytes] : out.files) {
        WriteFile(dir / name, bytes);
    }
}

} // namespace xrsim
