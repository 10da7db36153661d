// Command-line front end: runs an experiment and writes its CSV outputs.

#include "xrsim/harness/config.hpp"
#include "xrsim/harness/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"XR system-level simulator"};
    std::string configPath;
    std::string seeds;
    std::string load;
    std::string scheduler;
    std::string drx;
    double duration = 0.0;
    std::string out = "out";
    int jobs = 0;
    app.add_option("--config", configPath, "scenario file (INI)")->check(CLI::ExistingFile);
    app.add_option("--seeds", seeds, "seed list, e.g. 1,2,3 or 1-5");
    app.add_option("--ues-per-cell", load, "XR UEs per cell, N or MIN-MAX");
    app.add_option("--scheduler", scheduler, "pf, mlwdf or pduset");
    app.add_option("--drx", drx, "off, fixed or adaptive");
    app.add_option("--duration", duration, "measured seconds per run (after warm-up)");
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "parallel runs");
    CLI11_PARSE(app, argc, argv);

    try {
        xrsim::ExperimentConfig cfg = configPath.empty() ? xrsim::ExperimentConfig{} : xrsim::LoadConfig(configPath);
        if (!seeds.empty()) {
            xrsim::ApplyConfigValue(cfg, "scenario.seeds", seeds);
        }
        if (!load.empty()) {
            xrsim::ApplyConfigValue(cfg, "scenario.ues_per_cell", load);
        }
        if (!scheduler.empty()) {
            xrsim::ApplyConfigValue(cfg, "scheduler.kind", scheduler);
        }
        if (!drx.empty()) {
            xrsim::ApplyConfigValue(cfg, "drx.mode", drx);
        }
        if (duration > 0.0) {
            cfg.network.duration = static_cast<xrsim::Micros>(duration * xrsim::kSecondUs);
        }
        if (jobs > 0) {
            cfg.jobs = jobs;
        }
        auto result = xrsim::RunExperiment(cfg);
        xrsim::WriteOutputs(result, out);
        std::cout << "xr_capacity " << result.report.capacity << "\n";
        for (const auto& [n, k] : result.report.loads) {
            std::cout << "ues_per_cell " << n << " satisfied " << k.pooled.satisfied << "/" << k.pooled.counted << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
