// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "opsize/branching_mc.hpp"
#include "opsize/closed_form.hpp"
#include "opsize/csv.hpp"
#include "opsize/meanfield.hpp"
#include "opsize/model.hpp"
#include "opsize/model_io.hpp"
#include "opsize/sector_chain.hpp"
#include "opsize/version.hpp"

// Command layer shared by the opsize binary and the test suite.  Exit code
// contract: 0 success, 1 numeric/tolerance failure, 2 usage or config error.
// Config problems are thrown as std::invalid_argument and mapped to 2 by the
// caller; numeric failures either throw std::runtime_error or return 1.

namespace opsize::cli {

struct TimeGrid {
    double start = 0.0;
    double stop = 4.0;
    int points = 9;
    bool log_scale = false;

    std::vector<double> values() const {
        if (points < 1) throw std::invalid_argument("t grid: points must be >= 1");
        if (points > 1 && !(stop > start))
            throw std::invalid_argument("t grid: stop must exceed start");
        std::vector<double> t(static_cast<std::size_t>(points));
        if (log_scale) {
            if (!(start > 0.0))
                throw std::invalid_argument("t grid: log spacing requires start > 0");
            const double lo = std::log(start), hi = std::log(stop);
            for (int i = 0; i < points; ++i)
                t[static_cast<std::size_t>(i)] =
                    std::exp(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
        } else {
            for (int i = 0; i < points; ++i)
                t[static_cast<std::size_t>(i)] =
                    points == 1 ? start : start + (stop - start) * i / (points - 1);
        }
        return t;
    }
};

enum class Method { Closed, Master, Series, Mc, Sector };

inline Method parse_method(const std::string& name) {
    if (name == "closed") return Method::Closed;
    if (name == "master") return Method::Master;
    if (name == "series") return Method::Series;
    if (name == "mc") return Method::Mc;
    if (name == "sector") return Method::Sector;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected closed|master|series|mc|sector)");
}

inline const char* method_name(Method m) {
    switch (m) {
        case Method::Closed: return "closed";
        case Method::Master: return "master";
        case Method::Series: return "series";
        case Method::Mc: return "mc";
        case Method::Sector: return "sector";
    }
    return "?";
}

struct RunConfig {
    std::string model_path;
    Method method = Method::Closed;
    TimeGrid grid;
    std::string out_path;
    std::uint64_t seed = 1;
    long n_max = 256;       // truncation / reporting window
    long traj = 100'000;    // mc only
    unsigned workers = 0;   // mc only; 0 = hardware
    double tol = 1e-10;     // integrator tolerance
    double leak_bound = 1e-9;
};

// One method's P(n, t) table on a fixed window, plus Wilson halfwidths for mc.
struct MethodTable {
    Method method = Method::Closed;
    std::vector<double> t;
    long n_window = 0;
    std::vector<std::vector<double>> p;   // [time][n]
    std::vector<std::vector<double>> ci;  // empty unless mc
};

namespace detail {

// The closed form covers the J = 0, U_1/U_3 family; time is rescaled so a
// model with kappa_eff != 1 still evaluates in its own units.
inline void require_closed_form_family(const ModelSpec& spec, const Rates& rates) {
    bool family = spec.J == 0.0 && rates.kappa_eff > 0.0;
    for (const auto& [n, u] : rates.U)
        if (n != 1 && n != 3 && u > 0.0) family = false;
    if (!family)
        throw std::invalid_argument(
            "method 'closed' applies to the J = 0, U_1/U_3 model family only");
}

inline std::vector<double> closed_form_row(double r, double tau, long n_window) {
    std::vector<double> row(static_cast<std::size_t>(n_window) + 1);
    if (r == 1.0) {
        for (long n = 0; n <= n_window; ++n)
            row[static_cast<std::size_t>(n)] = p_critical(n, tau);
    } else {
        const EarlyTimeParams params(r, tau);
        for (long n = 0; n <= n_window; ++n)
            row[static_cast<std::size_t>(n)] = p_exact(n, params);
    }
    return row;
}

}  // namespace detail

inline MethodTable compute_method_table(const ModelSpec& spec, Method method,
                                        const std::vector<double>& t_values,
                                        const RunConfig& config) {
    const Rates rates = derive_rates(spec);
    MethodTable table;
    table.method = method;
    table.t = t_values;
    table.n_window = config.n_max;

    switch (method) {
        case Method::Closed: {
            detail::require_closed_form_family(spec, rates);
            for (double t : t_values)
                table.p.push_back(
                    detail::closed_form_row(rates.r, rates.kappa_eff * t, table.n_window));
            break;
        }
        case Method::Master: {
            const auto jumps = master_equation_rates(rates, spec.q);
            EvolveOptions opts;
            opts.n_max = config.n_max;
            opts.leak_bound = config.leak_bound;
            opts.rtol = config.tol;
            opts.atol = config.tol * 1e-3;
            const auto p0 = SizeDistribution::delta(1, config.n_max);
            for (const auto& dist : evolve_master(p0, jumps, t_values, opts)) {
                std::vector<double> row(dist.probs.begin(),
                                        dist.probs.begin() + table.n_window + 1);
                table.p.push_back(std::move(row));
            }
            break;
        }
        case Method::Series: {
            const auto channels = rate_channels(rates, spec.q);
            EvolveOptions opts;
            opts.n_max = config.n_max;
            opts.rtol = config.tol;
            opts.atol = config.tol * 1e-3;
            const auto z0 = GenFunSeries::initial(config.n_max);
            for (const auto& z : evolve_series(z0, channels, t_values, opts)) {
                std::vector<double> row(z.coeffs.begin(),
                                        z.coeffs.begin() + table.n_window + 1);
                table.p.push_back(std::move(row));
            }
            break;
        }
        case Method::Mc: {
            const auto model = BranchingModel::from_channels(rate_channels(rates, spec.q));
            const auto estimates = estimate_distribution(model, 1, t_values, config.traj,
                                                         config.seed, config.workers);
            for (const auto& est : estimates) {
                std::vector<double> row(static_cast<std::size_t>(table.n_window) + 1);
                std::vector<double> ci(static_cast<std::size_t>(table.n_window) + 1);
                for (long n = 0; n <= table.n_window; ++n) {
                    row[static_cast<std::size_t>(n)] = est.p_hat(n);
                    ci[static_cast<std::size_t>(n)] = est.ci_halfwidth(n);
                }
                table.p.push_back(std::move(row));
                table.ci.push_back(std::move(ci));
            }
            break;
        }
        case Method::Sector: {
            const auto chain = build_sector_chain(spec);
            std::vector<double> w0(chain.size(), 0.0);
            w0[chain.index(1, 0)] = 1.0;
            table.n_window = std::min<long>(table.n_window, spec.N);
            for (const auto& w : evolve_chain(chain, w0, t_values)) {
                const auto marginal = marginal_size(chain, w);
                std::vector<double> row(marginal.begin(),
                                        marginal.begin() + table.n_window + 1);
                table.p.push_back(std::move(row));
            }
            break;
        }
    }
    return table;
}

inline void write_table_csv(const MethodTable& table, const ModelSpec& spec,
                            const RunConfig& config) {
    CsvWriter csv(config.out_path);
    csv.metadata("opsize_version", std::string(kVersion));
    csv.metadata("model_hash", model_hash(spec));
    csv.metadata("method", std::string(method_name(table.method)));
    csv.metadata("seed", static_cast<long>(config.seed));
    csv.metadata("tol", config.tol);
    csv.metadata("n_max", config.n_max);
    csv.metadata("t_start", table.t.front());
    csv.metadata("t_stop", table.t.back());
    csv.metadata("t_points", static_cast<long>(table.t.size()));
    const bool has_ci = !table.ci.empty();
    csv.header(has_ci ? std::vector<std::string>{"t", "n", "P", "ci"}
                      : std::vector<std::string>{"t", "n", "P"});
    for (std::size_t ti = 0; ti < table.t.size(); ++ti)
        for (long n = 0; n <= table.n_window; ++n) {
            std::vector<double> cells{table.t[ti], static_cast<double>(n),
                                      table.p[ti][static_cast<std::size_t>(n)]};
            if (has_ci) cells.push_back(table.ci[ti][static_cast<std::size_t>(n)]);
            csv.row(cells);
        }
}

inline void write_table_json(const MethodTable& table, const ModelSpec& spec,
                             const RunConfig& config) {
    nlohmann::json doc;
    doc["opsize_version"] = kVersion;
    doc["model_hash"] = model_hash(spec);
    doc["method"] = method_name(table.method);
    doc["seed"] = config.seed;
    doc["tol"] = config.tol;
    doc["n_max"] = config.n_max;
    doc["t"] = table.t;
    doc["P"] = table.p;
    if (!table.ci.empty()) doc["ci"] = table.ci;
    std::ofstream out(config.out_path);
    if (!out) throw std::runtime_error("cannot write " + config.out_path);
    out << doc.dump(1) << "\n";
}

inline int cmd_simulate(const RunConfig& config) {
    const ModelSpec spec = load_model(config.model_path);
    for (const auto& warning : spec.validate()) std::cerr << "warning: " << warning << "\n";
    const auto t_values = config.grid.values();
    const auto table = compute_method_table(spec, config.method, t_values, config);
    if (std::filesystem::path(config.out_path).extension() == ".json")
        write_table_json(table, spec, config);
    else
        write_table_csv(table, spec, config);
    return 0;
}

// Finite-size growth-rate table for the sector oracle, as JSON.
inline int cmd_convergence_report(const std::string& model_path, std::vector<long> N_list,
                                  double M_ratio, double t_probe, int probe_points,
                                  const std::string& out_path) {
    const ModelSpec spec = load_model(model_path);
    const auto report = meanfield_convergence_report(spec, N_list, M_ratio, t_probe,
                                                     probe_points);
    nlohmann::json doc;
    doc["opsize_version"] = kVersion;
    doc["model_hash"] = model_hash(spec);
    doc["M_ratio"] = M_ratio;
    doc["t_probe"] = t_probe;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : report)
        doc["rows"].push_back({{"N", row.N},
                               {"M", row.M},
                               {"fitted_rate", row.fitted_rate},
                               {"target_rate", row.target_rate},
                               {"abs_error", row.abs_error}});
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << doc.dump(1) << "\n";
    return 0;
}

// P(n, t) data behind the early-time distribution figure: the J = 0 U_1/U_3
// model, one CSV per r.
inline int cmd_reproduce_fig2(const std::vector<double>& r_values, const TimeGrid& grid,
                              long n_window, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto t_values = grid.values();
    for (double r : r_values) {
        const ModelSpec spec = ModelSpec::from_r(r);
        std::ostringstream name;
        name << out_dir << "/fig2_r" << r << ".csv";
        CsvWriter csv(name.str());
        csv.metadata("opsize_version", std::string(kVersion));
        csv.metadata("model_hash", model_hash(spec));
        csv.metadata("method", std::string("closed"));
        csv.metadata("r", r);
        csv.header({"t", "n", "P"});
        for (double t : t_values) {
            const auto row = detail::closed_form_row(r, t, n_window);
            for (long n = 0; n <= n_window; ++n)
                csv.row({t, static_cast<double>(n), row[static_cast<std::size_t>(n)]});
        }
    }
    std::ofstream gp(out_dir + "/fig2.gp");
    gp << "set datafile separator \",\"\n"
          "set xlabel \"t\"\n"
          "set ylabel \"P(n,t)\"\n"
          "set key outside\n";
    for (double r : r_values)
        gp << "plot for [k=1:" << n_window << "] 'fig2_r" << r
           << ".csv' using 1:($2==k?$3:1/0) with linespoints title sprintf('n=%d', k)\n"
           << "pause -1\n";
    return 0;
}

// Late-time scaled distribution: P_reg sampled on a shared grid of
// sigma = s/(1-r), so the collapse across r is visible row by row.
inline int cmd_reproduce_fig3(const std::vector<double>& r_values,
                              const std::vector<double>& lambda_values, int s_points,
                              const std::string& out_path) {
    for (double r : r_values)
        if (!(r >= 0.0 && r < 1.0))
            throw std::invalid_argument("reproduce-fig3: requires 0 <= r < 1");
    if (s_points < 2) throw std::invalid_argument("reproduce-fig3: need >= 2 s points");
    CsvWriter csv(out_path);
    csv.metadata("opsize_version", std::string(kVersion));
    csv.header({"r", "lambda", "s", "P_reg", "s_over_1mr", "P_reg_times_1mr"});
    for (double lambda : lambda_values)
        for (double r : r_values) {
            const ScaledDistribution sd(r, lambda, 1);
            for (int i = 0; i < s_points; ++i) {
                const double sigma = 0.5 * i / (s_points - 1);
                const double s = sigma * (1.0 - r);
                const double value = p_reg(s, sd);
                csv.row({r, lambda, s, value, sigma, (1.0 - r) * value});
            }
        }
    std::ofstream gp(std::filesystem::path(out_path).replace_extension(".gp"));
    gp << "set datafile separator \",\"\n"
          "set xlabel \"s/(1-r)\"\n"
          "set ylabel \"P_reg\"\n"
          "plot '" << std::filesystem::path(out_path).filename().string()
       << "' using 5:4 with points title 'all (r, lambda) curves'\n"
          "pause -1\n";
    return 0;
}

struct PhaseScanPoint {
    double gamma = 0.0;
    double kappa_eff = 0.0;
    double u2 = 0.0;
    bool no_dynamics = false;
    double r = std::numeric_limits<double>::quiet_NaN();
    std::string phase;
    double margin = 0.0;
    double t_s = std::numeric_limits<double>::infinity();
};

inline std::vector<PhaseScanPoint> scan_phase(const std::vector<double>& gamma_values,
                                              const std::vector<double>& kappa_eff_values,
                                              double u2, long N, double tie_tol = 1e-12) {
    std::vector<PhaseScanPoint> points;
    for (double kappa_eff : kappa_eff_values)
        for (double gamma : gamma_values) {
            PhaseScanPoint pt;
            pt.gamma = gamma;
            pt.kappa_eff = kappa_eff;
            pt.u2 = u2;
            ModelSpec spec;
            spec.q = 4;
            spec.J = 0.0;
            spec.N = N;
            spec.M = 20 * N;
            if (gamma > 0.0) spec.couplings.push_back({1, 1, gamma / 4.0});
            if (kappa_eff > 0.0) spec.couplings.push_back({3, 1, kappa_eff / 4.0});
            if (u2 > 0.0) spec.couplings.push_back({2, 2, u2});
            const Rates rates = derive_rates(spec);
            if (rates.kappa_eff == 0.0 && rates.gamma == 0.0) {
                pt.no_dynamics = true;
                pt.phase = "NoDynamics";
            } else {
                const auto label = classify_phase(rates, tie_tol);
                pt.r = rates.r_defined ? rates.r : std::numeric_limits<double>::quiet_NaN();
                pt.phase = to_string(label.phase);
                pt.margin = label.margin;
                pt.t_s = scrambling_time_estimate(rates, N, tie_tol);
            }
            points.push_back(pt);
        }
    return points;
}

inline int cmd_scan_phase(const std::vector<double>& gamma_values,
                          const std::vector<double>& kappa_eff_values, double u2, long N,
                          const std::string& out_path) {
    const auto points = scan_phase(gamma_values, kappa_eff_values, u2, N);
    CsvWriter csv(out_path);
    csv.metadata("opsize_version", std::string(kVersion));
    csv.metadata("N", N);
    csv.metadata("u2", u2);
    csv.header({"gamma", "kappa_eff", "u2", "r", "phase", "margin", "t_s"});
    for (const auto& pt : points)
        csv.raw_row({format_double(pt.gamma), format_double(pt.kappa_eff),
                     format_double(pt.u2), format_double(pt.r), pt.phase,
                     format_double(pt.margin), format_double(pt.t_s)});
    return 0;
}

struct CompareOutcome {
    struct Pair {
        Method a, b;
        double max_dev = 0.0;
        double at_t = 0.0;
        long at_n = 0;
    };
    std::vector<Pair> deterministic;
    double mc_coverage = -1.0;       // fraction of points inside the 3-sigma band
    double sector_max_dev = -1.0;    // informational
    bool ok = true;
};

inline CompareOutcome compare_methods(const ModelSpec& spec,
                                      const std::vector<Method>& methods,
                                      const std::vector<double>& t_values,
                                      const RunConfig& config, double tol) {
    if (methods.size() < 2)
        throw std::invalid_argument("compare: need at least two methods");
    std::map<Method, MethodTable> tables;
    for (Method m : methods) tables.emplace(m, compute_method_table(spec, m, t_values, config));

    std::vector<Method> deterministic;
    for (Method m : methods)
        if (m == Method::Closed || m == Method::Master || m == Method::Series)
            deterministic.push_back(m);

    CompareOutcome outcome;
    long window = config.n_max;
    for (const auto& [m, tab] : tables) window = std::min(window, tab.n_window);

    for (std::size_t i = 0; i < deterministic.size(); ++i)
        for (std::size_t j = i + 1; j < deterministic.size(); ++j) {
            const auto& ta = tables.at(deterministic[i]);
            const auto& tb = tables.at(deterministic[j]);
            CompareOutcome::Pair pair{deterministic[i], deterministic[j]};
            for (std::size_t ti = 0; ti < t_values.size(); ++ti)
                for (long n = 0; n <= window; ++n) {
                    const double dev = std::abs(ta.p[ti][static_cast<std::size_t>(n)] -
                                                tb.p[ti][static_cast<std::size_t>(n)]);
                    if (dev > pair.max_dev) {
                        pair.max_dev = dev;
                        pair.at_t = t_values[ti];
                        pair.at_n = n;
                    }
                }
            if (pair.max_dev > tol) outcome.ok = false;
            outcome.deterministic.push_back(pair);
        }

    if (tables.count(Method::Mc) && !deterministic.empty()) {
        const auto& ref = tables.at(deterministic.front());
        const auto& mc = tables.at(Method::Mc);
        const auto model = BranchingModel::from_channels(
            rate_channels(derive_rates(spec), spec.q));
        long covered = 0, total = 0;
        for (std::size_t ti = 0; ti < t_values.size(); ++ti)
            for (long n = 0; n <= window; ++n) {
                const double count =
                    mc.p[ti][static_cast<std::size_t>(n)] * static_cast<double>(config.traj);
                const double band =
                    wilson_halfwidth(static_cast<long>(std::llround(count)), config.traj, 3.0);
                covered += std::abs(mc.p[ti][static_cast<std::size_t>(n)] -
                                    ref.p[ti][static_cast<std::size_t>(n)]) <= band;
                ++total;
            }
        outcome.mc_coverage = static_cast<double>(covered) / static_cast<double>(total);
        if (outcome.mc_coverage < 0.95) outcome.ok = false;
    }

    if (tables.count(Method::Sector) && !deterministic.empty()) {
        const auto& ref = tables.at(deterministic.front());
        const auto& sec = tables.at(Method::Sector);
        const long sec_window = std::min(window, sec.n_window);
        double max_dev = 0.0;
        for (std::size_t ti = 0; ti < t_values.size(); ++ti)
            for (long n = 0; n <= sec_window; ++n)
                max_dev = std::max(max_dev,
                                   std::abs(sec.p[ti][static_cast<std::size_t>(n)] -
                                            ref.p[ti][static_cast<std::size_t>(n)]));
        outcome.sector_max_dev = max_dev;  // finite-size O(1/N); never gates
    }
    return outcome;
}

inline int cmd_compare(const RunConfig& config, const std::vector<std::string>& method_names,
                       double tol) {
    const ModelSpec spec = load_model(config.model_path);
    std::vector<Method> methods;
    for (const auto& name : method_names) methods.push_back(parse_method(name));
    const auto t_values = config.grid.values();
    const auto outcome = compare_methods(spec, methods, t_values, config, tol);

    for (const auto& pair : outcome.deterministic)
        std::cout << method_name(pair.a) << " vs " << method_name(pair.b)
                  << ": max deviation " << format_double(pair.max_dev) << " at t = "
                  << format_double(pair.at_t) << ", n = " << pair.at_n
                  << (pair.max_dev > tol ? "  [EXCEEDS TOL]" : "") << "\n";
    if (outcome.mc_coverage >= 0.0)
        std::cout << "mc coverage within 3-sigma Wilson band: "
                  << format_double(outcome.mc_coverage)
                  << (outcome.mc_coverage < 0.95 ? "  [BELOW 0.95]" : "") << "\n";
    if (outcome.sector_max_dev >= 0.0)
        std::cout << "sector (N = " << spec.N
                  << ") max deviation vs reference: " << format_double(outcome.sector_max_dev)
                  << "  [informational: finite-size O(1/N)]\n";
    std::cout << (outcome.ok ? "compare: OK" : "compare: TOLERANCE EXCEEDED") << "\n";
    return outcome.ok ? 0 : 1;
}

}  // namespace opsize::cli
