// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "opsize/quadrature.hpp"
#include "opsize/special.hpp"

// Closed-form operator size statistics for the J = 0, U_1/U_3 model in units
// kappa_eff = 1, with r = gamma / kappa_eff.
//
// Early time, r != 1 (w = e^-mu):
//
//                     (r - 1)(1 - w)
//   z(mu,t) = 1 - --------------------------------,      E = e^{(r-1) t}
//                  E (r - w) - (1 - w)
//
//   P(0,t)   = 1 - (1-r) E' / (E' - r),                  E' = e^{(1-r) t}
//   P(n,t)   = (1-r)^2 E' (E'-1)^{n-1} / (E'-r)^{n+1},   n >= 1
//
// and at the critical point r = 1:
//
//   z(mu,t) = 1 - (1-w) / (1 + t (1-w)),
//   P(0,t)  = t/(1+t),   P(n,t) = t^{n-1}/(1+t)^{n+1}.
//
// Late time (scrambling phase, s = n/N, lambda = e^{(1-r)t}/C, C = N(1-r)^2/2):
//
//   P(s,t)     = r delta(s) + P_reg(s,t)
//   P_reg(s,t) = theta(1 - 2s/(1-r)) 2 (r-1)^2 e^{2s/[lambda (r+2s-1)]}
//                / [lambda (r+2s-1)^2]
//
// P_reg integrates to 1-r and is supported on [0, (1-r)/2]; at fixed lambda it
// is a function of s/(1-r) alone.  The mean obeys
//
//   nbar = N (1-r)^2/2 [1 - (1/lambda) e^{1/lambda} Gamma(0, 1/lambda)].
//
// Everything below evaluates these expressions in forms that stay accurate
// over the whole (r, t) range: expm1/log1p compositions keep additions
// same-signed, and tail factors are carried as powers of sub-unit ratios so
// nothing overflows for large n or t.

namespace opsize {

struct EarlyTimeParams {
    double r = 0.0;  // gamma / kappa_eff
    double t = 0.0;  // time in units kappa_eff = 1

    EarlyTimeParams(double r_, double t_) : r(r_), t(t_) {
        if (!(r >= 0.0)) throw std::domain_error("EarlyTimeParams: r must be >= 0");
        if (!(t >= 0.0)) throw std::domain_error("EarlyTimeParams: t must be >= 0");
    }
    bool critical() const { return r == 1.0; }
};

namespace detail {

inline void require_off_critical(const EarlyTimeParams& p, const char* who) {
    if (p.critical())
        throw std::domain_error(std::string(who) +
                                ": r = 1 is the critical point; use the *_critical routines");
}

}  // namespace detail

inline double z_critical(double mu, double t) {
    if (!(t >= 0.0)) throw std::domain_error("z_critical: t must be >= 0");
    const double one_minus_w = -std::expm1(-mu);
    return 1.0 - one_minus_w / (1.0 + t * one_minus_w);
}

inline double p_critical(long n, double t) {
    if (n < 0) throw std::domain_error("p_critical: n must be >= 0");
    if (!(t >= 0.0)) throw std::domain_error("p_critical: t must be >= 0");
    if (n == 0) return t / (1.0 + t);
    const double ratio = t / (1.0 + t);
    return std::pow(ratio, static_cast<double>(n - 1)) / ((1.0 + t) * (1.0 + t));
}

inline double z_exact(double mu, const EarlyTimeParams& p) {
    detail::require_off_critical(p, "z_exact");
    const double w = std::exp(-mu);
    const double one_minus_w = -std::expm1(-mu);
    double num, denom;
    if (p.r < 1.0) {
        const double em = std::exp((p.r - 1.0) * p.t);  // <= 1
        num = (p.r - 1.0) * one_minus_w;
        denom = em * (p.r - w) - one_minus_w;
    } else {
        const double em = std::exp((1.0 - p.r) * p.t);  // <= 1
        num = (p.r - 1.0) * one_minus_w * em;
        denom = (p.r - w) - one_minus_w * em;
    }
    if (std::abs(denom) < 1e-300)
        throw std::domain_error("z_exact: generating-function denominator vanished");
    return 1.0 - num / denom;
}

inline double p_exact(long n, const EarlyTimeParams& p) {
    detail::require_off_critical(p, "p_exact");
    if (n < 0) throw std::domain_error("p_exact: n must be >= 0");
    const double r = p.r;
    const double a = std::abs(1.0 - r) * p.t;
    const double em = std::exp(-a);
    const double grow = -std::expm1(-a);  // 1 - e^-a, exact near a = 0
    // D = 1 - r e^{-(1-r)t} for r < 1, and r - e^{-(r-1)t} for r > 1; both are
    // sums of positive terms, so no cancellation anywhere in the range.
    const double D = (r < 1.0) ? grow + (1.0 - r) * em : (r - 1.0) + grow;
    if (n == 0) {
        const double frac = (r < 1.0) ? (1.0 - r) / D : (r - 1.0) * em / D;
        return 1.0 - frac;
    }
    const double c = 1.0 - r;
    return c * c * em / (D * D) * std::pow(grow / D, static_cast<double>(n - 1));
}

// Exponential tail length of P(n,t) in the dissipative phase:
// P(n+1)/P(n) = e^{-1/xi},  xi(t) = 1 / ln[(r - E)/(1 - E)], E = e^{(1-r)t}.
inline double tail_xi(const EarlyTimeParams& p) {
    if (!(p.r > 1.0)) throw std::domain_error("tail_xi: requires the dissipative phase r > 1");
    if (!(p.t > 0.0)) throw std::domain_error("tail_xi: requires t > 0");
    const double b = (p.r - 1.0) * p.t;
    const double grow = -std::expm1(-b);          // 1 - e^-b
    const double shrink = (p.r - 1.0) + grow;     // r - e^-b
    return 1.0 / std::log(shrink / grow);
}

// lambda(t) = e^{(1-r)t} / C with C = N (1-r)^2 / 2.
inline double lambda_of_t(double t, double r, long N) {
    if (!(r >= 0.0 && r < 1.0)) throw std::domain_error("lambda_of_t: requires 0 <= r < 1");
    if (N < 1) throw std::domain_error("lambda_of_t: requires N >= 1");
    const double C = static_cast<double>(N) * (1.0 - r) * (1.0 - r) / 2.0;
    return std::exp((1.0 - r) * t) / C;
}

struct ScaledDistribution {
    double r = 0.0;
    double lambda = 1.0;
    long N = 1;

    ScaledDistribution(double r_, double lambda_, long N_) : r(r_), lambda(lambda_), N(N_) {
        if (!(r >= 0.0 && r < 1.0))
            throw std::domain_error("ScaledDistribution: requires 0 <= r < 1");
        if (!(lambda > 0.0)) throw std::domain_error("ScaledDistribution: requires lambda > 0");
        if (N < 1) throw std::domain_error("ScaledDistribution: requires N >= 1");
    }

    static ScaledDistribution at_time(double t, double r, long N) {
        return {r, lambda_of_t(t, r, N), N};
    }

    double singular_weight() const { return r; }
    double support_max() const { return (1.0 - r) / 2.0; }
};

inline double p_reg(double s, const ScaledDistribution& sd) {
    if (s < 0.0 || s > 1.0) return 0.0;
    const double edge = sd.support_max() - s;  // -(r + 2s - 1) / 2
    if (edge <= 0.0) return 0.0;
    const double d = 2.0 * edge;
    const double log_p = std::log(2.0) + 2.0 * std::log1p(-sd.r) - 2.0 * s / (sd.lambda * d) -
                         std::log(sd.lambda) - 2.0 * std::log(d);
    return (log_p < -745.0) ? 0.0 : std::exp(log_p);
}

namespace detail {

// Integrates f * P_reg over the support.  The outer half is traversed in the
// edge variable u = (1-r)/2 - s, where the integrand shuts off smoothly.
template <class F>
QuadResult reg_integral(const ScaledDistribution& sd, F&& f, double abs_tol) {
    const double smax = sd.support_max();
    const double h = 0.5 * smax;
    auto inner = integrate_adaptive([&](double s) { return f(s) * p_reg(s, sd); }, 0.0, h,
                                    0.5 * abs_tol);
    auto outer = integrate_adaptive(
        [&](double u) {
            const double s = smax - u;
            return f(s) * p_reg(s, sd);
        },
        0.0, h, 0.5 * abs_tol);
    return {inner.value + outer.value, inner.error_estimate + outer.error_estimate,
            inner.evaluations + outer.evaluations};
}

}  // namespace detail

// integral of P_reg over its support; equals 1 - r up to quadrature error.
inline double reg_weight_quadrature(const ScaledDistribution& sd, double abs_tol = 1e-10) {
    return detail::reg_integral(sd, [](double) { return 1.0; }, abs_tol).value;
}

// integral of s^k P_reg ds.
inline double reg_moment_quadrature(const ScaledDistribution& sd, int k,
                                    double abs_tol = 1e-10) {
    return detail::reg_integral(sd, [k](double s) { return std::pow(s, k); }, abs_tol).value;
}

// nbar = N (1-r)^2/2 [1 - (1/lambda) e^{1/lambda} Gamma(0, 1/lambda)],
// evaluated through the scaled exponential integral so small lambda is safe.
inline double mean_size_late(const ScaledDistribution& sd) {
    const double x = 1.0 / sd.lambda;
    const double factor = 1.0 - x * expint_gamma0_scaled(x);
    return static_cast<double>(sd.N) * (1.0 - sd.r) * (1.0 - sd.r) / 2.0 * factor;
}

// Laplace transform S(nu,t) = integral e^{-nu s} P(s,t) ds, evaluated
// numerically (the delta at s = 0 contributes its weight r directly).
inline double scramblon_laplace(double nu, const ScaledDistribution& sd,
                                double abs_tol = 1e-10) {
    return sd.singular_weight() +
           detail::reg_integral(sd, [nu](double s) { return std::exp(-nu * s); }, abs_tol)
               .value;
}

}  // namespace opsize
