// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "opsize/closed_form.hpp"
#include "opsize/meanfield.hpp"
#include "opsize/model.hpp"

using namespace opsize;

namespace {

Rates rates_for_r(double r) { return derive_rates(ModelSpec::from_r(r)); }

std::vector<double> linspace(double a, double b, int points) {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * i / (points - 1);
    return v;
}

}  // namespace

TEST_CASE("jump table from the rate channels") {
    SECTION("dissipative two-coupling model") {
        ModelSpec spec;
        spec.couplings = {{1, 1, 1.5}, {3, 1, 1.0}};
        const auto table = master_equation_rates(derive_rates(spec), spec.q);
        REQUIRE(table.size() == 2);
        CHECK(table[0].size_change == -1);
        CHECK(table[0].rate == 6.0);
        CHECK(table[1].size_change == +1);
        CHECK(table[1].rate == 4.0);
    }
    SECTION("pure system q = 4") {
        ModelSpec spec;
        spec.J = 1.0;
        const auto table = master_equation_rates(derive_rates(spec), spec.q);
        REQUIRE(table.size() == 1);
        CHECK(table[0].size_change == +2);
        CHECK(table[0].rate == 4.0);
    }
    SECTION("size-neutral coupling drops out") {
        ModelSpec spec;
        spec.couplings = {{2, 2, 3.0}};
        CHECK(master_equation_rates(derive_rates(spec), spec.q).empty());
    }
}

TEST_CASE("master: initial absorption rate equals gamma") {
    const auto table = master_equation_rates(rates_for_r(1.5), 4);
    const auto p0 = SizeDistribution::delta(1, 64);
    const double h = 1e-6;
    const auto out = evolve_master(p0, table, std::vector<double>{h});
    CHECK_THAT(out[0].probs[0] / h, Catch::Matchers::WithinRel(1.5, 1e-4));
}

TEST_CASE("master: n = 0 is absorbing") {
    const auto table = master_equation_rates(rates_for_r(0.5), 4);
    const auto p0 = SizeDistribution::delta(0, 64);
    for (const auto& dist : evolve_master(p0, table, linspace(0.0, 3.0, 4))) {
        CHECK_THAT(dist.probs[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(moment(dist, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("master matches the closed form pointwise") {
    const double r = 0.5;
    const auto table = master_equation_rates(rates_for_r(r), 4);
    const auto p0 = SizeDistribution::delta(1, 512);
    EvolveOptions opts;
    opts.n_max = 512;
    const auto out = evolve_master(p0, table, std::vector<double>{3.0}, opts);
    for (long n = 0; n <= 200; ++n)
        CHECK_THAT(out[0].probs[static_cast<std::size_t>(n)],
                   Catch::Matchers::WithinAbs(p_exact(n, {r, 3.0}), 1e-9));
}

TEST_CASE("master: window values are independent of the truncation order") {
    const auto table = master_equation_rates(rates_for_r(0.25), 4);
    EvolveOptions coarse, fine;
    coarse.n_max = 256;
    coarse.leak_bound = 1.0;
    fine.n_max = 512;
    fine.leak_bound = 1.0;
    const std::vector<double> grid{6.0};
    const auto a = evolve_master(SizeDistribution::delta(1, 256), table, grid, coarse);
    const auto b = evolve_master(SizeDistribution::delta(1, 512), table, grid, fine);
    for (long n = 0; n <= 100; ++n)
        CHECK_THAT(a[0].probs[static_cast<std::size_t>(n)],
                   Catch::Matchers::WithinAbs(b[0].probs[static_cast<std::size_t>(n)], 1e-11));
    CHECK(a[0].leaked_mass > 1e-9);  // the window is deliberately too small for the bulk
}

TEST_CASE("master: leak bound triggers a helpful error") {
    const auto table = master_equation_rates(rates_for_r(0.0), 4);
    EvolveOptions opts;
    opts.n_max = 64;
    opts.leak_bound = 1e-9;
    CHECK_THROWS_WITH(
        evolve_master(SizeDistribution::delta(1, 64), table, std::vector<double>{8.0}, opts),
        Catch::Matchers::ContainsSubstring("increase n_max"));
}

TEST_CASE("master: P(0,t) never decreases and probabilities stay positive") {
    for (double r : {0.5, 1.0, 1.5}) {
        const auto table = master_equation_rates(rates_for_r(r), 4);
        EvolveOptions opts;
        opts.n_max = 512;
        const auto out = evolve_master(SizeDistribution::delta(1, 512), table,
                                       linspace(0.0, 4.0, 17), opts);
        double last = -1.0;
        for (const auto& dist : out) {
            CHECK(dist.probs[0] >= last - 1e-12);
            last = dist.probs[0];
            for (double p : dist.probs) CHECK(p >= -1e-10);
            CHECK_THAT(dist.mass() + dist.leaked_mass,
                       Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
    }
}

TEST_CASE("series: initial condition and normalization") {
    const auto channels = rate_channels(rates_for_r(0.5), 4);
    const auto z0 = GenFunSeries::initial(128);
    CHECK(z0.coeffs[1] == 1.0);
    const auto out = evolve_series(z0, channels, linspace(0.0, 2.0, 5));
    CHECK(out[0].coeffs[1] == 1.0);
    for (const auto& z : out) {
        // z(w = 1) equals the retained mass
        CHECK_THAT(z.evaluate(0.0), Catch::Matchers::WithinAbs(z.mass(), 1e-12));
        CHECK(z.leaked_mass() < 1e-6);
    }
}

TEST_CASE("series matches the closed form (r = 1/2, t = 2)") {
    const auto channels = rate_channels(rates_for_r(0.5), 4);
    const auto out = evolve_series(GenFunSeries::initial(256), channels,
                                   std::vector<double>{2.0});
    for (long n = 0; n <= 200; ++n)
        CHECK_THAT(out[0].coeffs[static_cast<std::size_t>(n)],
                   Catch::Matchers::WithinAbs(p_exact(n, {0.5, 2.0}), 1e-9));
}

TEST_CASE("series coefficients are exact regardless of truncation order") {
    const auto channels = rate_channels(rates_for_r(0.25), 4);
    const auto a = evolve_series(GenFunSeries::initial(96), channels, std::vector<double>{5.0});
    const auto b = evolve_series(GenFunSeries::initial(192), channels, std::vector<double>{5.0});
    for (long n = 0; n <= 96; ++n)
        CHECK_THAT(a[0].coeffs[static_cast<std::size_t>(n)],
                   Catch::Matchers::WithinAbs(b[0].coeffs[static_cast<std::size_t>(n)], 1e-12));
}

TEST_CASE("series and master agree channel-for-channel on a q = 6 mixture") {
    ModelSpec spec;
    spec.q = 6;
    spec.J = 0.05;  // +4 jumps
    spec.couplings = {{1, 1, 0.1}, {3, 1, 0.0625}, {2, 2, 0.7}, {4, 2, 0.02}};
    const Rates rates = derive_rates(spec);
    const auto channels = rate_channels(rates, spec.q);
    const auto table = master_equation_rates(rates, spec.q);

    const std::vector<double> grid{0.5, 1.5, 3.0};
    EvolveOptions opts;
    opts.n_max = 384;
    opts.leak_bound = 1e-3;  // the +4 jumps of q = 6 give a fat tail; window stays exact
    const auto series = evolve_series(GenFunSeries::initial(384), channels, grid, opts);
    const auto master = evolve_master(SizeDistribution::delta(1, 384), table, grid, opts);
    for (std::size_t ti = 0; ti < grid.size(); ++ti)
        for (long n = 0; n <= 200; ++n)
            CHECK_THAT(series[ti].coeffs[static_cast<std::size_t>(n)],
                       Catch::Matchers::WithinAbs(
                           master[ti].probs[static_cast<std::size_t>(n)], 1e-8));
}

TEST_CASE("series supports a larger initial operator") {
    const auto channels = rate_channels(rates_for_r(0.5), 4);
    const auto table = master_equation_rates(rates_for_r(0.5), 4);
    const std::vector<double> grid{1.0};
    const auto series = evolve_series(GenFunSeries::initial(256, 3), channels, grid);
    const auto master = evolve_master(SizeDistribution::delta(3, 256), table, grid);
    for (long n = 0; n <= 180; ++n)
        CHECK_THAT(series[0].coeffs[static_cast<std::size_t>(n)],
                   Catch::Matchers::WithinAbs(master[0].probs[static_cast<std::size_t>(n)],
                                              1e-9));
}

TEST_CASE("moments") {
    const auto d1 = SizeDistribution::delta(1, 16);
    CHECK(moment(d1, 0) == 1.0);
    CHECK(moment(d1, 1) == 1.0);
    CHECK(moment(d1, 2) == 1.0);

    // mean law nbar = e^{(kappa_eff - gamma) t} along the master route
    for (double r : {0.5, 1.5}) {
        const auto table = master_equation_rates(rates_for_r(r), 4);
        EvolveOptions opts;
        opts.n_max = 1024;
        const auto out = evolve_master(SizeDistribution::delta(1, 1024), table,
                                       linspace(0.5, 4.0, 8), opts);
        for (const auto& dist : out) {
            CHECK_THAT(moment(dist, 1),
                       Catch::Matchers::WithinRel(std::exp((1.0 - r) * dist.t), 1e-7));
            CHECK_THAT(moment(dist, 0),
                       Catch::Matchers::WithinAbs(1.0 - dist.leaked_mass, 1e-9));
        }
    }
}

TEST_CASE("early-time log-derivative of the mean is kappa_eff - gamma") {
    ModelSpec spec;
    spec.q = 4;
    spec.J = 0.03;
    spec.couplings = {{1, 1, 0.05}, {3, 1, 0.04}};
    const Rates rates = derive_rates(spec);
    const auto table = master_equation_rates(rates, spec.q);
    const double h = 1e-3;
    EvolveOptions opts;
    opts.n_max = 256;
    const auto out = evolve_master(SizeDistribution::delta(1, 256), table,
                                   std::vector<double>{0.1 - h, 0.1 + h}, opts);
    const double slope = (std::log(moment(out[1], 1)) - std::log(moment(out[0], 1))) / (2 * h);
    CHECK_THAT(slope, Catch::Matchers::WithinRel(rates.growth_rate(), 1e-6));
}
