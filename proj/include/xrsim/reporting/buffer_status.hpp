#pragma once

#include "xrsim/core/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrsim {

enum class BsTableKind { Short, Long, RefinedLong };

inline const char* ToString(BsTableKind k)
{
    switch (k) {
    case BsTableKind::Short: return "short";
    case BsTableKind::Long: return "long";
    case BsTableKind::RefinedLong: return "refined";
    }
    return "unknown";
}

/// MAC CE size carried inside the UL TB for each report format.
inline std::uint32_t BsrCeBytes(BsTableKind k) { return k == BsTableKind::Short ? 4 : 8; }

struct BsTable {
    BsTableKind kind = BsTableKind::Long;
    std::vector<std::uint64_t> entries;   // entries[0] == 0, strictly increasing

    std::size_t Size() const { return entries.size(); }
    std::uint64_t Max() const { return entries.back(); }
    std::uint64_t Bytes(std::size_t index) const { return entries.at(index); }
};

/// Geometric table: entry_0 = 0, entry_k = round(bMin * (bMax/bMin)^((k-1)/(n-2))).
inline BsTable GenBsTable(BsTableKind kind, double bMin, double bMax, int n)
{
    if (!(0.0 < bMin && bMin < bMax) || n < 2) {
        throw std::invalid_argument("BS table needs 0 < b_min < b_max and n >= 2");
    }
    BsTable t;
    t.kind = kind;
    t.entries.reserve(n);
    t.entries.push_back(0);
    double ratio = bMax / bMin;
    for (int k = 1; k < n; ++k) {
        double frac = n == 2 ? 1.0 : static_cast<double>(k - 1) / (n - 2);
        auto v = static_cast<std::uint64_t>(std::llround(bMin * std::pow(ratio, frac)));
        // rounding can collide at the small end; keep strictly increasing
        v = std::max(v, t.entries.back() + 1);
        t.entries.push_back(v);
    }
    return t;
}

/// Refined table nested inside the legacy one: keeps every legacy entry up to
/// the first one covering bMax, then splits the intervals with the largest
/// ratio at their geometric midpoint until n entries exist. Nesting guarantees
/// the refined round-up never overshoots more than the legacy round-up.
inline BsTable GenRefinedBsTable(const BsTable& legacy, double bMax, int n)
{
    if (bMax <= 0.0 || legacy.entries.size() < 2) {
        throw std::invalid_argument("refined BS table needs a legacy table and b_max > 0");
    }
    std::vector<std::uint64_t> e;
    for (auto v : legacy.entries) {
        e.push_back(v);
        if (static_cast<double>(v) >= bMax) {
            break;
        }
    }
    if (static_cast<int>(e.size()) > n) {
        throw std::invalid_argument("refined BS table is smaller than the legacy entries it must contain");
    }
    while (static_cast<int>(e.size()) < n) {
        std::size_t widest = 0;
        double ratio = 1.0;
        for (std::size_t i = 2; i < e.size(); ++i) {
            double r = static_cast<double>(e[i]) / static_cast<double>(e[i - 1]);
            if (e[i] - e[i - 1] >= 2 && r >= ratio) {
                ratio = r;
                widest = i;
            }
        }
        if (widest == 0) {
            break;
        }
        double lo = std::max<double>(static_cast<double>(e[widest - 1]), 1.0);
        auto mid = static_cast<std::uint64_t>(std::llround(std::sqrt(lo * static_cast<double>(e[widest]))));
        mid = std::clamp<std::uint64_t>(mid, e[widest - 1] + 1, e[widest] - 1);
        e.insert(e.begin() + static_cast<std::ptrdiff_t>(widest), mid);
    }
    return BsTable{BsTableKind::RefinedLong, std::move(e)};
}

inline BsTable DefaultBsTable(BsTableKind kind)
{
    switch (kind) {
    case BsTableKind::Short: return GenBsTable(kind, 10.0, 150e3, 32);
    case BsTableKind::Long: return GenBsTable(kind, 10.0, 81e6, 256);
    case BsTableKind::RefinedLong:
        return GenRefinedBsTable(GenBsTable(BsTableKind::Long, 10.0, 81e6, 256), 300e3, 256);
    }
    throw std::invalid_argument("unknown BS table kind");
}

/// Smallest index whose entry covers the buffer; saturates at the top index.
inline std::size_t QuantizeBsr(std::uint64_t bufferBytes, const BsTable& table)
{
    auto it = std::lower_bound(table.entries.begin(), table.entries.end(), bufferBytes);
    if (it == table.entries.end()) {
        return table.entries.size() - 1;
    }
    return static_cast<std::size_t>(it - table.entries.begin());
}

/// The refined table is used only while the buffer fits its range.
inline BsTableKind SelectTable(std::uint64_t bufferBytes, bool refinedConfigured, const BsTable& refined)
{
    if (refinedConfigured && bufferBytes <= refined.Max()) {
        return BsTableKind::RefinedLong;
    }
    return BsTableKind::Long;
}

struct BsrReport {
    int lcgId = 0;
    std::size_t index = 0;
    BsTableKind kind = BsTableKind::Long;
    Micros timestamp = 0;
    std::uint64_t reportedBytes = 0;   // table entry at index
};

/// Padding added to a TB because the grant exceeded the data actually sent.
inline std::uint64_t RealizedOverhead(std::uint64_t tbPayloadBytes, std::uint64_t servedBytes)
{
    return tbPayloadBytes > servedBytes ? tbPayloadBytes - servedBytes : 0;
}

/// UE-side report generator holding the configured tables.
class BsrGenerator {
public:
    /// mode: Short, Long, or RefinedLong (refined with Long fallback).
    explicit BsrGenerator(BsTableKind mode)
        : m_mode(mode), m_short(DefaultBsTable(BsTableKind::Short)), m_long(DefaultBsTable(BsTableKind::Long)),
          m_refined(DefaultBsTable(BsTableKind::RefinedLong))
    {
    }

    BsTableKind Mode() const { return m_mode; }

    const BsTable& Table(BsTableKind k) const
    {
        switch (k) {
        case BsTableKind::Short: return m_short;
        case BsTableKind::Long: return m_long;
        case BsTableKind::RefinedLong: return m_refined;
        }
        return m_long;
    }

    std::uint32_t CeBytes() const { return BsrCeBytes(m_mode); }

    BsrReport Build(std::uint64_t bufferBytes, Micros now, int lcg = 0) const
    {
        BsTableKind kind = m_mode == BsTableKind::Short
                               ? BsTableKind::Short
                               : SelectTable(bufferBytes, m_mode == BsTableKind::RefinedLong, m_refined);
        const BsTable& t = Table(kind);
        BsrReport r;
        r.lcgId = lcg;
        r.kind = kind;
        r.index = QuantizeBsr(bufferBytes, t);
        r.timestamp = now;
        r.reportedBytes = t.Bytes(r.index);
        return r;
    }

private:
    BsTableKind m_mode;
    BsTable m_short;
    BsTable m_long;
    BsTable m_refined;
};

} // namespace xrsim
