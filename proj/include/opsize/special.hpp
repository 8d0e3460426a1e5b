// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

// Upper incomplete gamma Gamma(0, x), equal to the exponential integral
//
//          inf
//           /      -t
//          |      e
// E (x) =  |  dt ----- ,     x > 0.
//  1       |       t
//         /
//          x
//
// Two regimes:
//
//   x <= 1: alternating series
//                                 inf        k  k
//                                -----   (-1)  x
//     E (x) = -gamma - ln(x) -    )     ---------
//      1                         /        k * k!
//                                -----
//                                k = 1
//
//   x > 1: modified-Lentz evaluation of the continued fraction
//
//                -x        1    1^2  2^2  3^2
//     E (x) = e    * ------------------------------ ...
//      1              x + 1 -  x+3- x+5- x+7-
//
// Both converge to better than 1e-15 relative over [1e-300, 700]; the
// module contract only needs 1e-12 on [1e-6, 50].

namespace opsize {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

namespace detail {

inline double e1_series(double x) {
    double sum = 0.0;
    double term = 1.0;  // x^k / k! carried incrementally
    for (int k = 1; k <= 64; ++k) {
        term *= -x / k;
        const double contrib = -term / k;
        sum += contrib;
        if (std::abs(contrib) < 1e-18 * (std::abs(sum) + 1e-30)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// Continued fraction for e^x * E1(x); keeping the e^x factor out lets
// callers form x * e^x * E1(x) without overflow for x beyond 709.
inline double e1_continued_fraction_scaled(double x) {
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k <= 200; ++k) {
        const double a = -static_cast<double>(k) * k;
        b += 2.0;
        d = a * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace detail

// e^x * Gamma(0, x); safe for arbitrarily large x.
inline double expint_gamma0_scaled(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_gamma0: requires x > 0");
    if (x <= 1.0) return std::exp(x) * detail::e1_series(x);
    return detail::e1_continued_fraction_scaled(x);
}

// Gamma(0, x) = E1(x).
inline double expint_gamma0(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_gamma0: requires x > 0");
    if (x <= 1.0) return detail::e1_series(x);
    return std::exp(-x) * detail::e1_continued_fraction_scaled(x);
}

}  // namespace opsize
