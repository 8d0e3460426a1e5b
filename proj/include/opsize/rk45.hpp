// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

// Adaptive Dormand-Prince 5(4) for dense state vectors.  Steps are clipped
// to land exactly on the requested output times, so no dense interpolation
// is needed.  FSAL: the seventh stage of an accepted step is the first stage
// of the next.

namespace opsize {

struct Rk45Options {
    double rtol = 1e-10;
    double atol = 1e-13;
    double h_init = 0.0;  // 0 = pick from the first derivative evaluation
    double h_max = 0.0;   // 0 = unbounded
    std::uint64_t max_steps = 50'000'000;
};

// f(t, y, dydt); on_sample(t, y) fires at every entry of t_grid.
template <class Deriv, class Observer>
void integrate_dopri5(Deriv&& f, std::vector<double> y, double t0,
                      std::span<const double> t_grid, Observer&& on_sample,
                      const Rk45Options& opts = {}) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - bhat, the embedded 4th-order error weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t dim = y.size();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    std::vector<double> tmp(dim), y_new(dim);

    double t = t0;
    f(t, y, k1);

    double h = opts.h_init;
    if (h <= 0.0) {
        double fn = 0.0, yn = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            fn = std::max(fn, std::abs(k1[i]));
            yn = std::max(yn, std::abs(y[i]));
        }
        h = (fn > 0.0) ? 0.01 * (yn + 1.0) / fn : 1e-3;
    }

    std::uint64_t steps = 0;
    for (double target : t_grid) {
        if (target < t)
            throw std::invalid_argument("integrate_dopri5: t_grid must be non-decreasing");
        while (t < target) {
            double h_try = std::min(h, target - t);
            if (opts.h_max > 0.0) h_try = std::min(h_try, opts.h_max);
            if (++steps > opts.max_steps)
                throw std::runtime_error("integrate_dopri5: step budget exhausted");

            for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h_try * a21 * k1[i];
            f(t + c2 * h_try, tmp, k2);
            for (std::size_t i = 0; i < dim; ++i)
                tmp[i] = y[i] + h_try * (a31 * k1[i] + a32 * k2[i]);
            f(t + c3 * h_try, tmp, k3);
            for (std::size_t i = 0; i < dim; ++i)
                tmp[i] = y[i] + h_try * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            f(t + c4 * h_try, tmp, k4);
            for (std::size_t i = 0; i < dim; ++i)
                tmp[i] = y[i] + h_try * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            f(t + c5 * h_try, tmp, k5);
            for (std::size_t i = 0; i < dim; ++i)
                tmp[i] = y[i] + h_try * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                         a64 * k4[i] + a65 * k5[i]);
            f(t + h_try, tmp, k6);
            for (std::size_t i = 0; i < dim; ++i)
                y_new[i] = y[i] + h_try * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                           b6 * k6[i]);
            f(t + h_try, y_new, k7);

            double err_sq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                const double err = h_try * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                            e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double scale =
                    opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                const double q = err / scale;
                err_sq += q * q;
            }
            const double err_norm = std::sqrt(err_sq / static_cast<double>(dim));

            if (err_norm <= 1.0) {
                t += h_try;
                y.swap(y_new);
                k1.swap(k7);
                const double grow =
                    (err_norm > 0.0) ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
                h = h_try * std::clamp(grow, 0.2, 5.0);
            } else {
                h = h_try * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9);
                if (!(h > 0.0) || t + h == t)
                    throw std::runtime_error("integrate_dopri5: step size underflow");
            }
        }
        on_sample(t, y);
    }
}

}  // namespace opsize
