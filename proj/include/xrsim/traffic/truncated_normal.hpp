#pragma once

#include "xrsim/core/random.hpp"

#include <random>
#include <stdexcept>

namespace xrsim {

/// Gaussian restricted to [lo, hi] by re-drawing out-of-range samples.
/// Clamping would pile probability mass on the bounds and bias the mean.
class TruncatedNormal {
public:
    TruncatedNormal(double mean, double stddev, double lo, double hi)
        : m_mean(mean), m_stddev(stddev), m_lo(lo), m_hi(hi)
    {
        if (!(lo < hi) || stddev < 0.0) {
            throw std::invalid_argument("truncated normal needs lo < hi and stddev >= 0");
        }
        if (mean < lo || mean > hi) {
            throw std::invalid_argument("truncated normal mean must lie inside [lo, hi]");
        }
    }

    double operator()(Rng& rng) const
    {
        if (m_stddev == 0.0) {
            return m_mean;
        }
        std::normal_distribution<double> n(m_mean, m_stddev);
        for (;;) {
            double x = n(rng);
            if (x >= m_lo && x <= m_hi) {
                return x;
            }
        }
    }

    double Mean() const { return m_mean; }
    double Stddev() const { return m_stddev; }
    double Lo() const { return m_lo; }
    double Hi() const { return m_hi; }

private:
    double m_mean;
    double m_stddev;
    double m_lo;
    double m_hi;
};

} // namespace xrsim
