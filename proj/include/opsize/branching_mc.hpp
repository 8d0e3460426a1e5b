// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "opsize/math.hpp"
#include "opsize/meanfield.hpp"

// Exact stochastic simulation of the size branching process: each of the n
// current particles independently fires a k-body event at per-particle rate
// R_k, replacing itself by k-1 particles (size change k-2).  n = 0 is
// absorbing.  Waiting times are exponential with total rate n * sum_k R_k.
//
// Per-trajectory RNG streams are derived from the master seed by counter
// hashing, so estimates are bit-identical for any worker count.  Uniform
// doubles are mapped from raw engine words directly to keep the stream
// independent of the standard library's distribution implementations.

namespace opsize {

struct BranchingEvent {
    int body = 0;  // k; offspring = k-1, size change = k-2
    double rate = 0.0;

    int offspring() const { return body - 1; }
    int size_change() const { return body - 2; }
};

struct BranchingModel {
    std::vector<BranchingEvent> events;

    static BranchingModel from_channels(const std::vector<RateChannel>& channels) {
        BranchingModel m;
        for (const auto& ch : channels) {
            if (ch.body == 2) continue;  // size-neutral
            if (ch.rate < 0.0) throw std::invalid_argument("BranchingModel: negative rate");
            if (ch.rate > 0.0) m.events.push_back({ch.body, ch.rate});
        }
        std::sort(m.events.begin(), m.events.end(),
                  [](const BranchingEvent& a, const BranchingEvent& b) {
                      return a.body < b.body;
                  });
        return m;
    }

    static BranchingModel from_model(const ModelSpec& spec) {
        return from_channels(rate_channels(derive_rates(spec), spec.q));
    }

    double total_rate() const {
        double r = 0.0;
        for (const auto& e : events) r += e.rate;
        return r;
    }
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double exponential(std::mt19937_64& rng, double rate) {
    return -std::log(1.0 - uniform01(rng)) / rate;
}

}  // namespace detail

struct PathPoint {
    double t = 0.0;
    long n = 0;
};

inline std::vector<PathPoint> gillespie_trajectory(const BranchingModel& model, long n0,
                                                   double t_end, std::uint64_t seed,
                                                   long population_cap = 10'000'000) {
    if (n0 < 0) throw std::invalid_argument("gillespie_trajectory: n0 must be >= 0");
    std::mt19937_64 rng(seed);
    const double per_particle = model.total_rate();
    std::vector<PathPoint> path;
    long n = n0;
    double t = 0.0;
    while (n > 0 && per_particle > 0.0) {
        t += detail::exponential(rng, static_cast<double>(n) * per_particle);
        if (t >= t_end) break;
        double pick = detail::uniform01(rng) * per_particle;
        int delta = model.events.back().size_change();
        for (const auto& e : model.events) {
            pick -= e.rate;
            if (pick < 0.0) {
                delta = e.size_change();
                break;
            }
        }
        n += delta;
        if (n > population_cap)
            throw std::runtime_error("gillespie_trajectory: population exceeded cap " +
                                     std::to_string(population_cap));
        path.push_back({t, n});
    }
    return path;
}

inline double wilson_halfwidth(long count, long total, double z = 1.959963984540054) {
    if (total < 1) throw std::invalid_argument("wilson_halfwidth: total must be >= 1");
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(count) / n;
    const double z2n = z * z / n;
    return z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
}

struct MCEstimate {
    double t = 0.0;
    long n_traj = 0;
    std::map<long, long> counts;
    bool degenerate = false;  // n_traj too small for a meaningful interval

    double p_hat(long n) const {
        auto it = counts.find(n);
        return it == counts.end() ? 0.0
                                  : static_cast<double>(it->second) / static_cast<double>(n_traj);
    }
    double ci_halfwidth(long n, double z = 1.959963984540054) const {
        auto it = counts.find(n);
        return wilson_halfwidth(it == counts.end() ? 0 : it->second, n_traj, z);
    }
};

// Runs n_traj independent trajectories and tabulates n at each grid time.
// The result is independent of the worker count by construction.
inline std::vector<MCEstimate> estimate_distribution(const BranchingModel& model, long n0,
                                                     std::span<const double> t_grid,
                                                     long n_traj, std::uint64_t master_seed,
                                                     unsigned workers = 0,
                                                     long population_cap = 10'000'000) {
    if (n_traj < 1) throw std::invalid_argument("estimate_distribution: n_traj must be >= 1");
    if (t_grid.empty()) return {};
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("estimate_distribution: t_grid must increase");

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<long>(workers, n_traj));

    const std::size_t n_times = t_grid.size();
    const double per_particle = model.total_rate();

    std::vector<std::vector<std::map<long, long>>> partial(
        workers, std::vector<std::map<long, long>>(n_times));

    auto run_range = [&](unsigned worker, long begin, long end) {
        auto& counts = partial[worker];
        for (long traj = begin; traj < end; ++traj) {
            std::mt19937_64 rng(hash_combine_seed(master_seed, static_cast<std::uint64_t>(traj)));
            long n = n0;
            double t = 0.0;
            std::size_t gi = 0;
            while (gi < n_times) {
                if (n == 0 || per_particle == 0.0) break;
                const double dt =
                    detail::exponential(rng, static_cast<double>(n) * per_particle);
                const double t_next = t + dt;
                while (gi < n_times && t_grid[gi] < t_next) counts[gi++][n] += 1;
                if (gi >= n_times) break;
                t = t_next;
                double pick = detail::uniform01(rng) * per_particle;
                int delta = model.events.back().size_change();
                for (const auto& e : model.events) {
                    pick -= e.rate;
                    if (pick < 0.0) {
                        delta = e.size_change();
                        break;
                    }
                }
                n += delta;
                if (n > population_cap)
                    throw std::runtime_error(
                        "estimate_distribution: population exceeded cap " +
                        std::to_string(population_cap));
            }
            while (gi < n_times) counts[gi++][n] += 1;
        }
    };

    if (workers == 1) {
        run_range(0, 0, n_traj);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_traj + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const long begin = static_cast<long>(w) * chunk;
            const long end = std::min<long>(begin + chunk, n_traj);
            if (begin >= end) break;
            pool.emplace_back([&run_range, w, begin, end] { run_range(w, begin, end); });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<MCEstimate> result(n_times);
    for (std::size_t gi = 0; gi < n_times; ++gi) {
        result[gi].t = t_grid[gi];
        result[gi].n_traj = n_traj;
        result[gi].degenerate = n_traj < 2;
        for (unsigned w = 0; w < workers; ++w)
            for (const auto& [n, c] : partial[w][gi]) result[gi].counts[n] += c;
    }
    return result;
}

}  // namespace opsize
