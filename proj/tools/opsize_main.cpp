// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "opsize/cli.hpp"

// Exit codes: 0 success, 1 numeric/tolerance failure, 2 usage/config error.

namespace {

void add_grid_flags(CLI::App* app, opsize::cli::TimeGrid& grid) {
    app->add_option("--t-start", grid.start, "first output time");
    app->add_option("--t-stop", grid.stop, "last output time");
    app->add_option("--t-points", grid.points, "number of output times");
    app->add_flag("--t-log", grid.log_scale, "log-spaced output times");
}

std::vector<double> linspace(double a, double b, int points) {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        v[static_cast<std::size_t>(i)] = points == 1 ? a : a + (b - a) * i / (points - 1);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-size growth simulator for all-to-all Brownian systems "
                 "coupled to an environment"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    opsize::cli::RunConfig config;
    std::string method_name = "closed";

    auto* simulate = app.add_subcommand("simulate", "run one model with one method");
    simulate->add_option("--model", config.model_path, "model file (flat or .json)")
        ->required();
    simulate->add_option("--method", method_name, "closed|master|series|mc|sector");
    add_grid_flags(simulate, config.grid);
    simulate->add_option("--n-max", config.n_max, "size window / truncation order");
    simulate->add_option("--seed", config.seed, "master seed")->envname("OPSIZE_SEED");
    simulate->add_option("--traj", config.traj, "mc trajectory count");
    simulate->add_option("--workers", config.workers, "mc worker threads (0 = hardware)");
    simulate->add_option("--tol", config.tol, "integrator tolerance");
    simulate->add_option("--leak-bound", config.leak_bound,
                         "acceptable truncation leak (master method)");
    simulate->add_option("--out", config.out_path, "output CSV path")->required();

    std::vector<double> fig2_r{0.5, 1.5};
    opsize::cli::TimeGrid fig2_grid{0.0, 8.0, 33, false};
    long fig2_n_window = 8;
    std::string fig2_dir = "fig2";
    auto* fig2 = app.add_subcommand("reproduce-fig2",
                                    "early-time P(n,t) tables for the U1/U3 model");
    fig2->add_option("--r", fig2_r, "r values, one CSV each");
    add_grid_flags(fig2, fig2_grid);
    fig2->add_option("--n-max", fig2_n_window, "largest size to tabulate");
    fig2->add_option("--out-dir", fig2_dir, "output directory");

    std::vector<double> fig3_r{0.2, 0.5, 0.8};
    std::vector<double> fig3_lambda{0.5, 1.0, 2.0};
    int fig3_points = 201;
    std::string fig3_out = "fig3.csv";
    auto* fig3 = app.add_subcommand("reproduce-fig3",
                                    "late-time scaled distribution and its collapse");
    fig3->add_option("--r", fig3_r, "r values (0 <= r < 1)");
    fig3->add_option("--lambda", fig3_lambda, "scramblon propagator values");
    fig3->add_option("--s-points", fig3_points, "points across the support");
    fig3->add_option("--out", fig3_out, "output CSV path");

    double scan_gamma_start = 0.0, scan_gamma_stop = 2.0;
    int scan_gamma_points = 101;
    std::vector<double> scan_kappa{1.0};
    double scan_u2 = 0.0;
    long scan_N = 1000;
    std::string scan_out = "phase_scan.csv";
    auto* scan = app.add_subcommand("scan-phase", "phase labels over a rate grid");
    scan->add_option("--gamma-start", scan_gamma_start, "first gamma");
    scan->add_option("--gamma-stop", scan_gamma_stop, "last gamma");
    scan->add_option("--gamma-points", scan_gamma_points, "gamma grid size");
    scan->add_option("--kappa-eff", scan_kappa, "kappa_eff values");
    scan->add_option("--u2", scan_u2, "extra (2,2) coupling strength");
    scan->add_option("--N", scan_N, "system size for t_s");
    scan->add_option("--out", scan_out, "output CSV path");

    std::string conv_model;
    std::vector<long> conv_N{50, 100, 200};
    double conv_ratio = 20.0, conv_t_probe = 1.0;
    int conv_points = 11;
    std::string conv_out = "convergence.json";
    auto* conv = app.add_subcommand("convergence-report",
                                    "sector-oracle growth rates vs the mean-field law");
    conv->add_option("--model", conv_model, "model file")->required();
    conv->add_option("--N", conv_N, "system sizes to probe");
    conv->add_option("--M-ratio", conv_ratio, "environment size as a multiple of N");
    conv->add_option("--t-probe", conv_t_probe, "probe window length");
    conv->add_option("--t-points", conv_points, "samples across the window");
    conv->add_option("--out", conv_out, "output JSON path");

    std::vector<std::string> compare_methods{"closed", "master", "series"};
    double compare_tol = 1e-8;
    auto* compare = app.add_subcommand("compare", "cross-method deviation report");
    compare->add_option("--model", config.model_path, "model file")->required();
    compare->add_option("--methods", compare_methods, "two or more methods");
    add_grid_flags(compare, config.grid);
    compare->add_option("--n-max", config.n_max, "comparison window");
    compare->add_option("--seed", config.seed, "master seed")->envname("OPSIZE_SEED");
    compare->add_option("--traj", config.traj, "mc trajectory count");
    compare->add_option("--workers", config.workers, "mc worker threads");
    compare->add_option("--tol", compare_tol, "deterministic pairwise tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;  // --help is a success; parse errors are usage errors
    }

    try {
        if (simulate->parsed()) {
            config.method = opsize::cli::parse_method(method_name);
            return opsize::cli::cmd_simulate(config);
        }
        if (fig2->parsed())
            return opsize::cli::cmd_reproduce_fig2(fig2_r, fig2_grid, fig2_n_window, fig2_dir);
        if (fig3->parsed())
            return opsize::cli::cmd_reproduce_fig3(fig3_r, fig3_lambda, fig3_points, fig3_out);
        if (scan->parsed())
            return opsize::cli::cmd_scan_phase(
                linspace(scan_gamma_start, scan_gamma_stop, scan_gamma_points), scan_kappa,
                scan_u2, scan_N, scan_out);
        if (conv->parsed())
            return opsize::cli::cmd_convergence_report(conv_model, conv_N, conv_ratio,
                                                       conv_t_probe, conv_points, conv_out);
        if (compare->parsed())
            return opsize::cli::cmd_compare(config, compare_methods, compare_tol);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}
