// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace opsize {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kGk15KronrodW[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGk15GaussW[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = kGk15KronrodW[7] * f_center;
    double gauss = kGk15GaussW[3] * f_center;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kGk15KronrodW[j] * fsum;
        if (j % 2 == 1) gauss += kGk15GaussW[j / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, std::abs(kronrod - gauss)};
}

template <class F>
void adapt(F&& f, double a, double b, double tol, int depth, QuadResult& out) {
    auto [value, err] = gk15(f, a, b);
    out.evaluations += 15;
    if (err <= tol || depth <= 0) {
        out.value += value;
        out.error_estimate += err;
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth - 1, out);
    adapt(f, mid, b, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 15(7) with an absolute tolerance budget.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-10,
                              int max_depth = 48) {
    if (!(abs_tol > 0.0)) throw std::domain_error("integrate_adaptive: abs_tol must be > 0");
    QuadResult out;
    if (a == b) return out;
    detail::adapt(f, a, b, abs_tol, max_depth, out);
    return out;
}

}  // namespace opsize
