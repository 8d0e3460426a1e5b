// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsize/math.hpp"
#include "opsize/model.hpp"
#include "opsize/rk45.hpp"

// Exact disorder-averaged weight dynamics at finite (N, M).
//
// Basis strings group into sectors (n, m) by their system / environment
// Majorana counts, and the white-noise average closes on sector weights: a
// Hamiltonian term class with shape (n_s, m_e) and per-term white-noise
// variance v couples a string in (n, m) to (n + n_s - 2 k_s, m + m_e - 2 k_e)
// for every overlap split (k_s, k_e), at
//
//   rate = 4 v C(n, k_s) C(N-n, n_s-k_s) C(m, k_e) C(M-m, m_e-k_e),
//
// active only when the term anticommutes with the string, i.e. when
// size(T) * size(S) - overlap is odd.  Every term has even total size, so the
// condition reduces to k_s + k_e odd, and (n + m) mod 2 is conserved.  The
// factor 4 is the white-noise transfer rate: one term T with variance v
// moves weight between O and TO at E[sin^2(2 theta)]/dt = 4v; it is fixed
// once here and reproduces kappa = 4J(q-2), gamma = 4 U_1 and Gamma with no
// per-shape tuning.
//
// Term variances (strengths J, V are rate units):
//
//   system q-body:      v = (q-1)! J / N^{q-1}
//   coupling (n_s,m_e): v = (n_s-1)! m_e! V / (N^{n_s-1} M^{m_e})
//
// Each (term, k_s, k_e) combination is a "channel" whose rate factorizes as
// A(n) * B(m); the generator is applied as a handful of shifted separable
// stencils over the dense (N+1) x (M+1) weight grid.

namespace opsize {

struct Sector {
    long n = 0;
    long m = 0;
};

// Majorana string algebra: AB = (-1)^{ab - k} BA for total sizes a, b
// sharing k indices.
inline bool anticommutes(long size_s, long size_t_, long overlap) {
    return ((size_s * size_t_ - overlap) & 1L) != 0;
}

struct SectorChain {
    long N = 0;
    long M = 0;

    struct Channel {
        int dn = 0;
        int dm = 0;
        int n_s = 0, m_e = 0, k_s = 0, k_e = 0;
        std::vector<double> A;  // rate factor over n, scale folded in
        std::vector<double> B;  // rate factor over m
    };
    std::vector<Channel> channels;
    std::vector<double> out_rate;  // total exit rate per sector, row-major
    double max_out_rate = 0.0;

    std::size_t size() const {
        return static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(M + 1);
    }
    std::size_t index(long n, long m) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(M + 1) +
               static_cast<std::size_t>(m);
    }

    // out = Q w  (inflows minus the diagonal exit rates)
    void apply_generator(const std::vector<double>& w, std::vector<double>& out) const {
        const long row = M + 1;
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& ch : channels) {
            const long n_lo = std::max(0L, -static_cast<long>(ch.dn));
            const long n_hi = std::min(N, N - ch.dn);
            const long m_lo = std::max(0L, -static_cast<long>(ch.dm));
            const long m_hi = std::min(M, M - ch.dm);
            for (long n = n_lo; n <= n_hi; ++n) {
                const double a = ch.A[static_cast<std::size_t>(n)];
                if (a == 0.0) continue;
                const double* src = w.data() + n * row;
                double* dst = out.data() + (n + ch.dn) * row + ch.dm;
                const double* b = ch.B.data();
                for (long m = m_lo; m <= m_hi; ++m) dst[m] += a * b[m] * src[m];
            }
        }
        for (std::size_t i = 0; i < w.size(); ++i) out[i] -= out_rate[i] * w[i];
    }

    // Transition rate (n,m) -> (n2,m2); zero when no channel connects them.
    double rate(long n, long m, long n2, long m2) const {
        double r = 0.0;
        for (const auto& ch : channels)
            if (n + ch.dn == n2 && m + ch.dm == m2)
                r += ch.A[static_cast<std::size_t>(n)] * ch.B[static_cast<std::size_t>(m)];
        return r;
    }

    double total_out_rate(long n, long m) const { return out_rate[index(n, m)]; }
};

namespace detail {

struct TermClass {
    int n_s = 0, m_e = 0;
    double log_variance = 0.0;
};

}  // namespace detail

inline SectorChain build_sector_chain(const ModelSpec& spec,
                                      std::size_t sector_budget = 20'000'000) {
    spec.validate();
    SectorChain chain;
    chain.N = spec.N;
    chain.M = spec.M;
    if (chain.size() > sector_budget) {
        const double shrink = std::sqrt(static_cast<double>(sector_budget) /
                                        static_cast<double>(chain.size()));
        throw std::invalid_argument(
            "build_sector_chain: " + std::to_string(chain.size()) +
            " sectors exceed the budget; try N <= " +
            std::to_string(static_cast<long>(spec.N * shrink)) + ", M <= " +
            std::to_string(static_cast<long>(spec.M * shrink)));
    }

    const double logN = std::log(static_cast<double>(spec.N));
    const double logM = std::log(static_cast<double>(spec.M));
    LogFactorialTable lf(static_cast<std::size_t>(std::max(spec.N, spec.M)) + 1);

    std::vector<detail::TermClass> terms;
    if (spec.J > 0.0)
        terms.push_back({spec.q, 0,
                         lf.log_factorial(spec.q - 1) + std::log(spec.J) - (spec.q - 1) * logN});
    for (const auto& c : spec.couplings) {
        if (c.strength <= 0.0) continue;
        if (c.n_sys == 0) continue;  // environment-only, part of H_E
        terms.push_back({c.n_sys, c.m_env,
                         lf.log_factorial(c.n_sys - 1) + lf.log_factorial(c.m_env) +
                             std::log(c.strength) - (c.n_sys - 1) * logN - c.m_env * logM});
    }

    for (const auto& term : terms) {
        const double log_scale = std::log(4.0) + term.log_variance;
        for (int k_s = 0; k_s <= term.n_s; ++k_s) {
            for (int k_e = 0; k_e <= term.m_e; ++k_e) {
                if (((k_s + k_e) & 1) == 0) continue;  // commutes: total size even
                SectorChain::Channel ch;
                ch.dn = term.n_s - 2 * k_s;
                ch.dm = term.m_e - 2 * k_e;
                if (ch.dn == 0 && ch.dm == 0) continue;  // intra-sector shuffle
                ch.n_s = term.n_s;
                ch.m_e = term.m_e;
                ch.k_s = k_s;
                ch.k_e = k_e;
                ch.A.assign(static_cast<std::size_t>(chain.N) + 1, 0.0);
                ch.B.assign(static_cast<std::size_t>(chain.M) + 1, 0.0);
                for (long n = 0; n <= chain.N; ++n)
                    ch.A[static_cast<std::size_t>(n)] =
                        std::exp(log_scale + lf.log_binomial(n, k_s) +
                                 lf.log_binomial(chain.N - n, term.n_s - k_s));
                for (long m = 0; m <= chain.M; ++m)
                    ch.B[static_cast<std::size_t>(m)] =
                        std::exp(lf.log_binomial(m, k_e) +
                                 lf.log_binomial(chain.M - m, term.m_e - k_e));
                chain.channels.push_back(std::move(ch));
            }
        }
    }

    chain.out_rate.assign(chain.size(), 0.0);
    for (const auto& ch : chain.channels)
        for (long n = 0; n <= chain.N; ++n) {
            const double a = ch.A[static_cast<std::size_t>(n)];
            if (a == 0.0) continue;
            double* row = chain.out_rate.data() + chain.index(n, 0);
            for (long m = 0; m <= chain.M; ++m) row[m] += a * ch.B[static_cast<std::size_t>(m)];
        }
    chain.max_out_rate = chain.out_rate.empty()
                             ? 0.0
                             : *std::max_element(chain.out_rate.begin(), chain.out_rate.end());
    return chain;
}

enum class ChainMethod { Auto, Uniformization, RungeKutta };

struct ChainEvolveOptions {
    ChainMethod method = ChainMethod::Auto;
    double poisson_tail = 1e-13;  // per uniformization step
    double max_poisson_mean = 128.0;
    double rtol = 1e-10;
    double atol = 1e-13;
};

namespace detail {

// One uniformization step over dt: w <- e^{Q dt} w as a Poisson-weighted sum
// of powers of P = I + Q/lambda.
inline void uniformization_step(const SectorChain& chain, double lambda, double dt,
                                double tail, std::vector<double>& w,
                                std::vector<double>& v, std::vector<double>& qv) {
    const double a = lambda * dt;
    double weight = std::exp(-a);
    double cumulative = weight;
    v = w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight * v[i];
    for (long k = 1; cumulative < 1.0 - tail || static_cast<double>(k) < a; ++k) {
        chain.apply_generator(v, qv);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += qv[i] / lambda;
        weight *= a / static_cast<double>(k);
        cumulative += weight;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += weight * v[i];
        if (k > 8 * static_cast<long>(a) + 512)
            throw std::runtime_error("uniformization_step: Poisson sum failed to converge");
    }
}

}  // namespace detail

// Evolves sector weights from w0 at t = 0 through the grid times.
inline std::vector<std::vector<double>> evolve_chain(const SectorChain& chain,
                                                     const std::vector<double>& w0,
                                                     std::span<const double> t_grid,
                                                     const ChainEvolveOptions& opts = {}) {
    if (w0.size() != chain.size())
        throw std::invalid_argument("evolve_chain: w0 has the wrong number of sectors");
    const double mass0 = std::accumulate(w0.begin(), w0.end(), 0.0);
    if (std::abs(mass0 - 1.0) > 1e-8)
        throw std::invalid_argument("evolve_chain: w0 is not normalized");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] >= t_grid[i - 1]))
            throw std::invalid_argument("evolve_chain: t_grid must be non-decreasing");

    const double t_end = t_grid.empty() ? 0.0 : t_grid.back();
    const double lambda = chain.max_out_rate;

    ChainMethod method = opts.method;
    if (method == ChainMethod::Auto)
        method = (chain.size() > 20'000 || lambda * t_end > 50.0)
                     ? ChainMethod::Uniformization
                     : ChainMethod::RungeKutta;

    std::vector<std::vector<double>> snapshots;
    snapshots.reserve(t_grid.size());

    if (lambda == 0.0) {  // no dynamics at all
        for (std::size_t i = 0; i < t_grid.size(); ++i) snapshots.push_back(w0);
        return snapshots;
    }

    if (method == ChainMethod::RungeKutta) {
        Rk45Options rk;
        rk.rtol = opts.rtol;
        rk.atol = opts.atol;
        auto rhs = [&chain](double, const std::vector<double>& w, std::vector<double>& dw) {
            chain.apply_generator(w, dw);
        };
        integrate_dopri5(rhs, w0, 0.0, t_grid,
                         [&](double, const std::vector<double>& w) { snapshots.push_back(w); },
                         rk);
        return snapshots;
    }

    std::vector<double> w = w0, v(w0.size()), qv(w0.size());
    double t = 0.0;
    for (double target : t_grid) {
        double remaining = target - t;
        while (remaining > 0.0) {
            const double dt = std::min(remaining, opts.max_poisson_mean / lambda);
            detail::uniformization_step(chain, lambda, dt, opts.poisson_tail, w, v, qv);
            remaining -= dt;
        }
        t = target;
        snapshots.push_back(w);
    }
    return snapshots;
}

// Marginal system-size distribution P(n) = sum_m w(n, m).
inline std::vector<double> marginal_size(const SectorChain& chain,
                                         const std::vector<double>& w) {
    std::vector<double> p(static_cast<std::size_t>(chain.N) + 1, 0.0);
    for (long n = 0; n <= chain.N; ++n) {
        const double* row = w.data() + chain.index(n, 0);
        double acc = 0.0;
        for (long m = 0; m <= chain.M; ++m) acc += row[m];
        p[static_cast<std::size_t>(n)] = acc;
    }
    return p;
}

inline double mean_size(const SectorChain& chain, const std::vector<double>& w) {
    const auto p = marginal_size(chain, w);
    double acc = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) acc += static_cast<double>(n) * p[n];
    return acc;
}

struct ConvergenceRow {
    long N = 0;
    long M = 0;
    double fitted_rate = 0.0;
    double target_rate = 0.0;
    double abs_error = 0.0;
};
using ConvergenceReport = std::vector<ConvergenceRow>;

// Fits the early-time growth rate of ln(nbar) at each N (with M = ratio * N)
// and reports the error against the mean-field rate kappa_eff - gamma.
// The rate is the linear coefficient of a quadratic fit in t: the
// environment occupation starts at zero, so the finite-M replacement
// channels (rates ~ N m / M) enter ln(nbar) at second order in t, and the
// t -> 0 slope carries the clean O(1/N) error.  A plain window-average slope
// would mix in that O(N m/M) drift, which does not shrink with N at fixed
// M/N.
inline ConvergenceReport meanfield_convergence_report(const ModelSpec& spec,
                                                      std::span<const long> N_list,
                                                      double M_ratio, double t_probe,
                                                      int probe_points = 11) {
    if (!(t_probe > 0.0))
        throw std::invalid_argument("meanfield_convergence_report: t_probe must be > 0");
    if (probe_points < 3)
        throw std::invalid_argument("meanfield_convergence_report: need >= 3 probe points");
    const double target = derive_rates(spec).growth_rate();

    ConvergenceReport report;
    for (long n_sys : N_list) {
        ModelSpec resized = spec;
        resized.N = n_sys;
        resized.M = std::lround(M_ratio * static_cast<double>(n_sys));
        const auto chain = build_sector_chain(resized);

        std::vector<double> w0(chain.size(), 0.0);
        w0[chain.index(1, 0)] = 1.0;

        std::vector<double> t_grid(static_cast<std::size_t>(probe_points));
        for (int i = 0; i < probe_points; ++i)
            t_grid[static_cast<std::size_t>(i)] = t_probe * i / (probe_points - 1);

        const auto snapshots = evolve_chain(chain, w0, t_grid);
        std::vector<double> log_mean(snapshots.size());
        for (std::size_t i = 0; i < snapshots.size(); ++i)
            log_mean[i] = std::log(mean_size(chain, snapshots[i]));

        ConvergenceRow row;
        row.N = resized.N;
        row.M = resized.M;
        row.fitted_rate = fit_quadratic_slope(t_grid, log_mean);
        row.target_rate = target;
        row.abs_error = std::abs(row.fitted_rate - target);
        report.push_back(row);
    }
    return report;
}

}  // namespace opsize
