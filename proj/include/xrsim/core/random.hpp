#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace xrsim {

using Rng = std::mt19937_64;

/// Derives independent named generators from one simulation seed, so that
/// drawing more numbers in one mechanism never shifts another's sequence.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t seed) : m_seed(seed) {}

    std::uint64_t Seed() const { return m_seed; }

    Rng Stream(std::string_view name, std::uint64_t index = 0) const
    {
        std::uint64_t h = 14695981039346656037ull;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(m_seed), static_cast<std::uint32_t>(m_seed >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        return Rng(seq);
    }

private:
    std::uint64_t m_seed;
};

inline double Uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace xrsim
