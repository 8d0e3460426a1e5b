// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace opsize {

// Table of ln(k!) for k = 0..n_max.  Binomials for the sector chain are
// assembled in log space so that N, M up to 1e4 never overflow.
class LogFactorialTable {
public:
    explicit LogFactorialTable(std::size_t n_max) : table_(n_max + 1, 0.0) {
        for (std::size_t k = 2; k <= n_max; ++k)
            table_[k] = table_[k - 1] + std::log(static_cast<double>(k));
    }

    double log_factorial(long k) const { return table_.at(static_cast<std::size_t>(k)); }

    // ln C(a, b); returns -inf for out-of-range b so exp() gives a clean 0.
    double log_binomial(long a, long b) const {
        if (b < 0 || b > a) return -std::numeric_limits<double>::infinity();
        return log_factorial(a) - log_factorial(b) - log_factorial(a - b);
    }

    double binomial(long a, long b) const { return std::exp(log_binomial(a, b)); }

private:
    std::vector<double> table_;
};

// SplitMix64 step; used to derive independent per-trajectory seeds from a
// master seed so parallel and serial runs produce identical streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t s = master_seed;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ULL + index;
    (void)splitmix64(s);
    return splitmix64(s);
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need two or more paired samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

// Linear coefficient of a least-squares quadratic y = a + g x + c x^2; the
// slope of y at x = 0 with the window curvature fitted away.
inline double fit_quadratic_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fit_quadratic_slope: need three or more paired samples");
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, b0 = 0, b1 = 0, b2 = 0;
    const double s0 = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i], t2 = t * t;
        s1 += t;
        s2 += t2;
        s3 += t2 * t;
        s4 += t2 * t2;
        b0 += y[i];
        b1 += y[i] * t;
        b2 += y[i] * t2;
    }
    const double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) +
                       s2 * (s1 * s3 - s2 * s2);
    if (det == 0.0) throw std::invalid_argument("fit_quadratic_slope: degenerate abscissae");
    const double det_g = s0 * (b1 * s4 - s3 * b2) - s1 * (b0 * s4 - s2 * b2) +
                         s2 * (b0 * s3 - s2 * b1);
    return det_g / det;
}

}  // namespace opsize
