#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xrsim {

/// Simulation time in integer microseconds.
using Micros = std::int64_t;

/// Exact rational quantity. Used for periods that are not integer
/// numbers of microseconds (60 fps => 50/3 ms).
using Rational = boost::rational<std::int64_t>;

inline constexpr Micros kSlotUs = 500;   // 30 kHz SCS
inline constexpr Micros kMsUs = 1000;
inline constexpr Micros kSecondUs = 1000 * 1000;

inline constexpr Micros Ms(std::int64_t ms) { return ms * kMsUs; }
inline constexpr Micros Seconds(std::int64_t s) { return s * kSecondUs; }

/// Milliseconds as an exact rational converted to microseconds (floor).
inline Micros FloorMicros(const Rational& ms)
{
    Rational us = ms * Rational(kMsUs);
    auto n = us.numerator();
    auto d = us.denominator();
    // boost::rational keeps the denominator positive
    auto q = n / d;
    if ((n % d != 0) && (n < 0)) {
        --q;
    }
    return q;
}

inline Micros SlotFloor(Micros t)
{
    auto s = t / kSlotUs;
    if (t < 0 && t % kSlotUs != 0) {
        --s;
    }
    return s * kSlotUs;
}

inline Micros SlotCeil(Micros t)
{
    auto f = SlotFloor(t);
    return f == t ? t : f + kSlotUs;
}

inline std::int64_t SlotIndexOf(Micros t) { return SlotFloor(t) / kSlotUs; }

inline double ToMs(Micros t) { return static_cast<double>(t) / kMsUs; }

inline double ToDouble(const Rational& r)
{
    return boost::rational_cast<double>(r);
}

/// Parses "50/3" or "16" or "16.5" into a rational number.
inline Rational ParseRational(const std::string& text)
{
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            auto num = std::stoll(text.substr(0, slash));
            auto den = std::stoll(text.substr(slash + 1));
            if (den == 0) {
                throw std::invalid_argument("zero denominator in '" + text + "'");
            }
            return Rational(num, den);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) {
            return Rational(std::stoll(text));
        }
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) {
            den *= 10;
        }
        return Rational(std::stoll(digits), den);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a rational number: '" + text + "'");
    }
}

} // namespace xrsim
