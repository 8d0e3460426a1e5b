// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsize/model.hpp"
#include "opsize/rk45.hpp"

// Mean-field size dynamics, integrated along two independent routes.
//
// Route 1 (master): the linear jump process on n,
//
//   dP(n)/dt = sum_k R_k [ (n-k+2) P(n-k+2) - n P(n) ],
//
// with R_q = 4J and R_k = 4U_k: each of the n string Majoranas triggers a
// k-body event at per-particle rate R_k and the size jumps by k-2.  k = 2
// events are size-neutral and dropped.
//
// Route 2 (series): the generating function z = sum_n P(n,t) w^n, w = e^-mu,
// obeys
//
//   dz/dt = 4J (z^{q-1} - z) + sum_n 4U_n (z^{n-1} - z),   z(mu, 0+) = w,
//
// integrated as a truncated power series in w.  Powers of z only feed
// coefficients downward-triangularly, so the first n_max coefficients are
// exact regardless of truncation.  The routes share nothing beyond the rate
// constants, which is what makes their agreement a meaningful check.

namespace opsize {

// (body count k, per-particle rate R_k) for every active channel.
struct RateChannel {
    int body = 0;
    double rate = 0.0;
};

inline std::vector<RateChannel> rate_channels(const Rates& rates, int q) {
    std::vector<RateChannel> channels;
    if (rates.kappa > 0.0) channels.push_back({q, rates.kappa / (q - 2)});  // 4J
    for (const auto& [n, u] : rates.U)
        if (u > 0.0) channels.push_back({n, 4.0 * u});
    return channels;
}

// One master-equation jump class: size change k-2 at per-particle rate R_k.
struct JumpEntry {
    int size_change = 0;
    double rate = 0.0;
};
using JumpTable = std::vector<JumpEntry>;

inline JumpTable master_equation_rates(const Rates& rates, int q) {
    std::map<int, double> merged;
    for (const auto& ch : rate_channels(rates, q)) {
        if (ch.body == 2) continue;  // size-neutral
        merged[ch.body - 2] += ch.rate;
    }
    JumpTable table;
    for (const auto& [delta, rate] : merged) table.push_back({delta, rate});
    return table;
}

// Mean drift per particle, sum_k (k-2) R_k = kappa_eff - gamma.
inline double jump_table_growth_rate(const JumpTable& table) {
    double g = 0.0;
    for (const auto& e : table) g += e.size_change * e.rate;
    return g;
}

struct SizeDistribution {
    double t = 0.0;
    std::vector<double> probs;  // P(0..n_max)
    double leaked_mass = 0.0;

    long n_max() const { return static_cast<long>(probs.size()) - 1; }
    double mass() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

    static SizeDistribution delta(long n0, long n_max, double t = 0.0) {
        if (n0 < 0 || n0 > n_max)
            throw std::invalid_argument("SizeDistribution::delta: n0 out of range");
        SizeDistribution d;
        d.t = t;
        d.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
        d.probs[static_cast<std::size_t>(n0)] = 1.0;
        return d;
    }
};

// sum n^k P(n); k = 0 gives the retained mass.
inline double moment(const SizeDistribution& dist, int k) {
    if (k < 0) throw std::invalid_argument("moment: k must be >= 0");
    double acc = 0.0;
    for (std::size_t n = 0; n < dist.probs.size(); ++n)
        acc += std::pow(static_cast<double>(n), k) * dist.probs[n];
    return acc;
}

struct EvolveOptions {
    long n_max = -1;           // -1: max(64, ceil(8 e^{growth * t_max})), capped at 1e6
    double leak_bound = 1e-9;  // error out when truncation loses more than this
    double rtol = 1e-10;
    double atol = 1e-13;
    double neg_tol = 1e-10;  // tolerated integrator negativity
};

namespace detail {

inline long default_n_max(double growth_rate, double t_max) {
    double suggestion = 64.0;
    if (growth_rate > 0.0)
        suggestion = std::ceil(8.0 * std::exp(growth_rate * t_max));
    return std::min<long>(1'000'000, std::max<long>(64, static_cast<long>(suggestion)));
}

inline void check_distribution(const SizeDistribution& d, double neg_tol, double leak_bound) {
    for (std::size_t n = 0; n < d.probs.size(); ++n)
        if (d.probs[n] < -neg_tol)
            throw std::runtime_error("evolve_master: P(" + std::to_string(n) + "," +
                                     std::to_string(d.t) + ") = " + std::to_string(d.probs[n]) +
                                     " below negativity tolerance");
    if (d.leaked_mass > leak_bound)
        throw std::runtime_error(
            "evolve_master: leaked mass " + std::to_string(d.leaked_mass) + " at t = " +
            std::to_string(d.t) + " exceeds bound " + std::to_string(leak_bound) +
            "; increase n_max");
}

}  // namespace detail

// Integrates the master equation from p0 (taken at time t_grid.front() == p0.t
// or later).  The state carries one extra slot accumulating mass that jumped
// beyond the truncation window.
inline std::vector<SizeDistribution> evolve_master(const SizeDistribution& p0,
                                                   const JumpTable& table,
                                                   std::span<const double> t_grid,
                                                   const EvolveOptions& opts = {}) {
    if (t_grid.empty()) return {};
    const double mass0 = p0.mass() + p0.leaked_mass;
    if (std::abs(mass0 - 1.0) > 1e-8)
        throw std::invalid_argument("evolve_master: p0 is not normalized");

    long K = opts.n_max;
    if (K < 0) K = detail::default_n_max(jump_table_growth_rate(table), t_grid.back() - p0.t);
    if (K < p0.n_max()) K = p0.n_max();
    const std::size_t dim = static_cast<std::size_t>(K) + 1;

    std::vector<double> y(dim + 1, 0.0);
    std::copy(p0.probs.begin(), p0.probs.end(), y.begin());
    y[dim] = p0.leaked_mass;

    auto rhs = [&table, dim](double, const std::vector<double>& p, std::vector<double>& dp) {
        std::fill(dp.begin(), dp.end(), 0.0);
        for (const auto& [delta, rate] : table) {
            for (std::size_t n = 1; n < dim; ++n) {
                const double out = rate * static_cast<double>(n) * p[n];
                dp[n] -= out;
                const long tgt = static_cast<long>(n) + delta;
                if (tgt >= 0 && tgt < static_cast<long>(dim))
                    dp[static_cast<std::size_t>(tgt)] += out;
                else
                    dp[dim] += out;  // leaked beyond the window
            }
        }
    };

    std::vector<SizeDistribution> result;
    result.reserve(t_grid.size());
    Rk45Options rk;
    rk.rtol = opts.rtol;
    rk.atol = opts.atol;
    integrate_dopri5(rhs, std::move(y), p0.t, t_grid,
                     [&](double t, const std::vector<double>& state) {
                         SizeDistribution d;
                         d.t = t;
                         d.probs.assign(state.begin(), state.begin() + dim);
                         d.leaked_mass = state[dim];
                         if (d.leaked_mass < 0.0 && d.leaked_mass > -opts.neg_tol)
                             d.leaked_mass = 0.0;  // integrator jitter
                         detail::check_distribution(d, opts.neg_tol, opts.leak_bound);
                         result.push_back(std::move(d));
                     },
                     rk);
    return result;
}

// ---------------------------------------------------------------------------
// Series route
// ---------------------------------------------------------------------------

struct GenFunSeries {
    double t = 0.0;
    std::vector<double> coeffs;  // coeffs[n] = P(n,t)

    long n_max() const { return static_cast<long>(coeffs.size()) - 1; }
    double mass() const { return std::accumulate(coeffs.begin(), coeffs.end(), 0.0); }
    double leaked_mass() const { return 1.0 - mass(); }

    // z(mu, 0+) = w^{n0}; n0 = 1 is the single-Majorana initial condition.
    static GenFunSeries initial(long n_max, long n0 = 1) {
        if (n0 < 0 || n0 > n_max) throw std::invalid_argument("GenFunSeries: n0 out of range");
        GenFunSeries z;
        z.coeffs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
        z.coeffs[static_cast<std::size_t>(n0)] = 1.0;
        return z;
    }

    SizeDistribution to_distribution() const {
        SizeDistribution d;
        d.t = t;
        d.probs = coeffs;
        d.leaked_mass = std::max(0.0, leaked_mass());
        return d;
    }

    // z evaluated at w = e^-mu by Horner's rule.
    double evaluate(double mu) const {
        const double w = std::exp(-mu);
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * w + coeffs[i];
        return acc;
    }
};

namespace detail {

inline void mul_trunc(const std::vector<double>& a, const std::vector<double>& b,
                      std::vector<double>& out) {
    const std::size_t K = a.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        const std::size_t top = K - i;
        for (std::size_t j = 0; j < top; ++j) out[i + j] += ai * b[j];
    }
}

// Truncated binary exponentiation; exponent 0 yields the unit series.
inline void pow_trunc(const std::vector<double>& base_in, unsigned exponent,
                      std::vector<double>& out, std::vector<double>& scratch_a,
                      std::vector<double>& scratch_b) {
    const std::size_t K = base_in.size();
    out.assign(K, 0.0);
    out[0] = 1.0;
    if (exponent == 0) return;
    std::vector<double>& base = scratch_a;
    base = base_in;
    bool out_is_unit = true;
    while (true) {
        if (exponent & 1u) {
            if (out_is_unit) {
                out = base;
                out_is_unit = false;
            } else {
                mul_trunc(out, base, scratch_b);
                out.swap(scratch_b);
            }
        }
        exponent >>= 1u;
        if (exponent == 0) break;
        mul_trunc(base, base, scratch_b);
        base.swap(scratch_b);
    }
}

}  // namespace detail

// Integrates dz/dt = sum_k R_k (z^{k-1} - z) in truncated power-series form
// from the canonical initial condition z(mu, 0+) = w, i.e. one size-1
// operator.  For a general initial mixture z0 the particles dress
// independently, so the solution is the composition z0(F(w,t)) with F the
// canonical solution; in particular an initial size-n0 operator evolves as
// F^n0.  (Feeding w^n0 straight into the ODE would entangle the particles
// and disagree with the jump process.)
inline std::vector<GenFunSeries> evolve_series(const GenFunSeries& z0,
                                               const std::vector<RateChannel>& channels,
                                               std::span<const double> t_grid,
                                               const EvolveOptions& opts = {}) {
    if (t_grid.empty()) return {};
    long K = opts.n_max;
    if (K < 0) K = 256;
    if (K < z0.n_max()) K = z0.n_max();
    const std::size_t dim = static_cast<std::size_t>(K) + 1;

    std::vector<double> y(dim, 0.0);
    y[1] = 1.0;

    bool canonical = z0.coeffs[1] == 1.0;
    for (std::size_t n = 0; canonical && n < z0.coeffs.size(); ++n)
        if (n != 1 && z0.coeffs[n] != 0.0) canonical = false;

    std::vector<double> power(dim), scratch_a(dim), scratch_b(dim);
    auto rhs = [&](double, const std::vector<double>& z, std::vector<double>& dz) {
        std::fill(dz.begin(), dz.end(), 0.0);
        for (const auto& ch : channels) {
            if (ch.body == 2) continue;  // z^1 - z vanishes identically
            detail::pow_trunc(z, static_cast<unsigned>(ch.body - 1), power, scratch_a,
                              scratch_b);
            for (std::size_t n = 0; n < dim; ++n) dz[n] += ch.rate * (power[n] - z[n]);
        }
    };

    std::vector<GenFunSeries> result;
    result.reserve(t_grid.size());
    Rk45Options rk;
    rk.rtol = opts.rtol;
    rk.atol = opts.atol;
    integrate_dopri5(rhs, std::move(y), z0.t, t_grid,
                     [&](double t, const std::vector<double>& state) {
                         GenFunSeries zt;
                         zt.t = t;
                         if (canonical) {
                             zt.coeffs = state;
                         } else {  // Horner composition z0(F)
                             std::vector<double> acc(dim, 0.0);
                             for (std::size_t k = z0.coeffs.size(); k-- > 0;) {
                                 detail::mul_trunc(acc, state, scratch_b);
                                 acc.swap(scratch_b);
                                 acc[0] += z0.coeffs[k];
                             }
                             zt.coeffs = std::move(acc);
                         }
                         for (std::size_t n = 0; n < zt.coeffs.size(); ++n)
                             if (zt.coeffs[n] < -opts.neg_tol)
                                 throw std::runtime_error(
                                     "evolve_series: coefficient " + std::to_string(n) +
                                     " fell below the negativity tolerance at t = " +
                                     std::to_string(t));
                         result.push_back(std::move(zt));
                     },
                     rk);
    return result;
}

}  // namespace opsize
