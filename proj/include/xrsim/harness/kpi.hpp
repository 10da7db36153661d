#pragma once

#include "xrsim/drx/power.hpp"
#include "xrsim/harness/csv.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xrsim {

inline constexpr double kSatisfiedFraction = 0.99;
inline constexpr double kCapacityRatio = 0.90;

/// Strictly more than 99% of frames in budget; nullopt when no frame was seen.
inline std::optional<bool> UeSatisfied(std::uint64_t frames, std::uint64_t inBudget)
{
    if (frames == 0) {
        return std::nullopt;
    }
    if (inBudget > frames) {
        throw std::invalid_argument("in-budget frames exceed observed frames");
    }
    // integer form of inBudget / frames > 0.99
    return inBudget * 100 > frames * 99;
}

struct SatisfactionCount {
    std::uint64_t satisfied = 0;
    std::uint64_t counted = 0;
    std::uint64_t excluded = 0;   // UEs with no frames

    double Ratio() const { return counted ? static_cast<double>(satisfied) / static_cast<double>(counted) : 0.0; }

    SatisfactionCount& operator+=(const SatisfactionCount& o)
    {
        satisfied += o.satisfied;
        counted += o.counted;
        excluded += o.excluded;
        return *this;
    }
};

/// Outcome of one UE over all its XR flows: satisfied only if every flow
/// with frames is.
struct UeFlows {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> flows;   // (frames, in budget)
};

inline SatisfactionCount CountSatisfied(std::span<const UeFlows> ues)
{
    SatisfactionCount c;
    for (const auto& u : ues) {
        bool any = false;
        bool all = true;
        for (auto [frames, ok] : u.flows) {
            if (auto s = UeSatisfied(frames, ok)) {
                any = true;
                all = all && *s;
            }
        }
        if (!any) {
            ++c.excluded;
            continue;
        }
        ++c.counted;
        if (all) {
            ++c.satisfied;
        }
    }
    return c;
}

/// Largest load whose satisfied ratio is at least 90%; 0 if none.
inline int XrCapacity(const std::map<int, double>& ratioByLoad)
{
    int best = 0;
    for (const auto& [n, r] : ratioByLoad) {
        if (r >= kCapacityRatio) {
            best = std::max(best, n);
        }
    }
    return best;
}

struct CdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

/// Empirical CDF with one point per distinct value; the last fraction is 1.
inline std::vector<CdfPoint> Cdf(std::vector<double> samples)
{
    std::vector<CdfPoint> out;
    if (samples.empty()) {
        return out;
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i + 1 < samples.size() && samples[i + 1] == samples[i]) {
            continue;
        }
        out.push_back(CdfPoint{samples[i], i + 1 == samples.size() ? 1.0 : static_cast<double>(i + 1) / n});
    }
    return out;
}

/// CSV with a header row even for empty input.
inline std::string EmitCdf(const std::vector<double>& samples)
{
    CsvTable t({"value", "fraction"});
    for (const auto& p : Cdf(samples)) {
        t.AddRow({FormatNumber(p.value), FormatNumber(p.fraction)});
    }
    return t.Text();
}

/// Per-UE mean power of a run with a power saving technique against the same
/// UEs always on; gain of the pooled means.
inline double PooledPowerSavingGain(std::span<const double> technique, std::span<const double> alwaysOn)
{
    if (technique.size() != alwaysOn.size() || technique.empty()) {
        throw std::invalid_argument("power traces must pair the same non-empty UE set");
    }
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < technique.size(); ++i) {
        a += technique[i];
        b += alwaysOn[i];
    }
    return PowerSavingGain(a / technique.size(), b / alwaysOn.size());
}

} // namespace xrsim
