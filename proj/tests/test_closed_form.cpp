// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "opsize/closed_form.hpp"

using namespace opsize;

TEST_CASE("z normalization and initial condition") {
    for (double r : {0.0, 0.25, 0.5, 1.5, 3.0}) {
        for (double t : {0.0, 0.7, 4.0, 25.0})
            CHECK_THAT(z_exact(0.0, {r, t}), Catch::Matchers::WithinAbs(1.0, 1e-14));
        for (double mu : {0.1, 1.0, 5.0})
            CHECK_THAT(z_exact(mu, {r, 0.0}),
                       Catch::Matchers::WithinAbs(std::exp(-mu), 1e-14));
    }
    CHECK_THROWS_AS(z_exact(0.5, {1.0, 2.0}), std::domain_error);
}

TEST_CASE("-dz/dmu at mu = 0 is the mean e^{(1-r)t}") {
    const double h = 1e-6;
    for (double r : {0.25, 0.5, 1.5}) {
        for (double t : {0.5, 1.0, 3.0}) {
            const EarlyTimeParams p(r, t);
            const double deriv = -(z_exact(h, p) - z_exact(-h, p)) / (2.0 * h);
            CHECK_THAT(deriv, Catch::Matchers::WithinRel(std::exp((1.0 - r) * t), 1e-8));
        }
    }
}

TEST_CASE("closed distribution spot values") {
    // r = 0: nothing ever reaches size zero
    for (double t : {0.0, 1.0, 10.0})
        CHECK(p_exact(0, {0.0, t}) == 0.0);

    // e^{(1-r)t} = 1/2 at r = 3/2, t = 2 ln 2
    CHECK_THAT(p_exact(0, {1.5, 2.0 * std::log(2.0)}),
               Catch::Matchers::WithinAbs(0.75, 1e-14));

    // frozen 40-digit references
    CHECK_THAT(p_exact(0, {1.5, 1.0}),
               Catch::Matchers::WithinRel(0.66057556070275736, 1e-14));
    CHECK_THAT(p_exact(1, {1.5, 1.0}),
               Catch::Matchers::WithinRel(0.18994744642724595, 1e-14));
    CHECK_THAT(p_exact(2, {1.5, 1.0}),
               Catch::Matchers::WithinRel(0.083649760618489957, 1e-14));
    CHECK_THAT(p_exact(5, {1.5, 1.0}),
               Catch::Matchers::WithinRel(0.0071442794135861817, 1e-14));
    CHECK_THAT(p_exact(0, {0.5, 3.0}),
               Catch::Matchers::WithinRel(0.43721257597375029, 1e-14));
    CHECK_THAT(p_exact(1, {0.5, 3.0}),
               Catch::Matchers::WithinRel(0.070671945257953839, 1e-14));
    CHECK_THAT(p_exact(5, {0.5, 3.0}),
               Catch::Matchers::WithinRel(0.041317840057771955, 1e-14));

    // scrambling phase saturation P(0) -> r
    CHECK_THAT(p_exact(0, {0.5, 60.0}), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("distribution sums to one through the geometric tail") {
    for (double r : {0.5, 1.5, 3.0}) {
        for (double t : {1.0, 2.5}) {
            const EarlyTimeParams p(r, t);
            double sum = p_exact(0, p);
            long n = 1;
            // geometric remainder: P(n+1)/P(n) is a constant ratio
            for (; n <= 60; ++n) sum += p_exact(n, p);
            const double ratio = p_exact(62, p) / p_exact(61, p);
            sum += p_exact(61, p) / (1.0 - ratio);
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("first moment of the distribution is e^{(1-r)t}") {
    for (double r : {0.25, 0.5, 1.5, 3.0}) {
        for (double t : {0.5, 2.0, 6.0}) {
            const EarlyTimeParams p(r, t);
            double mean = 0.0;
            // sum until the geometric tail is negligible, then add it exactly:
            // sum_{n>K} n q^{n-K} P(K) = P(K) [ K q/(1-q) + q/(1-q)^2 ]
            const long K = 400;
            for (long n = 1; n <= K; ++n) mean += static_cast<double>(n) * p_exact(n, p);
            const double q = p_exact(K + 1, p) / p_exact(K, p);
            mean += p_exact(K, p) * (K * q / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)));
            CHECK_THAT(mean, Catch::Matchers::WithinRel(std::exp((1.0 - r) * t), 1e-8));
        }
    }
}

TEST_CASE("dissipative tail length") {
    CHECK_THAT(tail_xi({1.5, 1e4}), Catch::Matchers::WithinRel(2.4663034623764317, 1e-12));
    // ratio test against the distribution itself
    for (double t : {0.5, 2.0}) {
        const EarlyTimeParams p(1.5, t);
        const double xi = tail_xi(p);
        const double ratio = p_exact(41, p) / p_exact(40, p);
        CHECK_THAT(std::exp(-1.0 / xi), Catch::Matchers::WithinRel(ratio, 1e-10));
    }
    // continuity towards the critical point: xi -> 1/ln((1+t)/t), the tail
    // length of the critical distribution, which grows like t
    for (double t : {1.0, 10.0, 1000.0})
        CHECK_THAT(tail_xi({1.0 + 1e-10, t}),
                   Catch::Matchers::WithinRel(1.0 / std::log((1.0 + t) / t), 1e-5));
    CHECK(tail_xi({1.0 + 1e-10, 1e4}) > 9e3);
    CHECK_THROWS_AS(tail_xi({0.5, 1.0}), std::domain_error);
    CHECK_THROWS_AS(tail_xi({1.5, 0.0}), std::domain_error);
}

TEST_CASE("critical point formulas") {
    CHECK_THAT(p_critical(0, 1.0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(p_critical(1, 1.0), Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(p_critical(2, 1.0), Catch::Matchers::WithinAbs(0.125, 1e-15));
    CHECK_THAT(p_critical(0, 1e9), Catch::Matchers::WithinAbs(1.0, 1e-8));

    double sum = 0.0;
    for (long n = 0; n <= 2000; ++n) sum += p_critical(n, 5.0);
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));

    for (double mu : {0.0, 0.3, 2.0}) {
        double z = 0.0;
        for (long n = 0; n <= 4000; ++n) z += std::exp(-mu * n) * p_critical(n, 3.0);
        CHECK_THAT(z_critical(mu, 3.0), Catch::Matchers::WithinAbs(z, 1e-12));
    }
}

TEST_CASE("p_exact approaches p_critical near r = 1") {
    for (double r : {1.0 - 1e-6, 1.0 + 1e-6}) {
        for (long n : {0L, 1L, 3L, 10L}) {
            for (double t : {0.5, 1.0, 4.0}) {
                CHECK_THAT(p_exact(n, {r, t}),
                           Catch::Matchers::WithinAbs(p_critical(n, t), 1e-4));
            }
        }
    }
    // the expm1/log1p evaluation stays accurate much closer to r = 1 than the
    // naive formula would
    for (double r : {1.0 - 1e-12, 1.0 + 1e-12})
        CHECK_THAT(p_exact(1, {r, 2.0}),
                   Catch::Matchers::WithinRel(p_critical(1, 2.0), 1e-9));
}

TEST_CASE("scaled distribution: support, weight and moments") {
    for (double r : {0.1, 0.3, 0.5, 0.8}) {
        const ScaledDistribution sd(r, 1.0, 1);
        CHECK(sd.singular_weight() == r);
        CHECK(p_reg(sd.support_max() + 1e-12, sd) == 0.0);
        CHECK(p_reg(-1e-12, sd) == 0.0);
        CHECK_THAT(p_reg(0.0, sd), Catch::Matchers::WithinRel(2.0 / sd.lambda, 1e-13));
        CHECK_THAT(reg_weight_quadrature(sd, 1e-12),
                   Catch::Matchers::WithinAbs(1.0 - r, 1e-10));
    }
    CHECK_THROWS_AS(ScaledDistribution(1.0, 1.0, 10), std::domain_error);
    CHECK_THROWS_AS(ScaledDistribution(0.5, 0.0, 10), std::domain_error);
}

TEST_CASE("late-time mean against the quadrature moment") {
    // frozen reference: r = 0.5, lambda = 1, N = 1000
    const ScaledDistribution sd(0.5, 1.0, 1000);
    CHECK_THAT(mean_size_late(sd), Catch::Matchers::WithinAbs(50.456579709600739, 1e-9));
    CHECK_THAT(mean_size_late(sd), Catch::Matchers::WithinAbs(
                                       1000.0 * reg_moment_quadrature(sd, 1, 1e-13), 1e-9));

    // monotone in lambda, bounded by the saturation value
    double previous = 0.0;
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) {
        const ScaledDistribution s(0.5, lambda, 1000);
        const double mean = mean_size_late(s);
        CHECK(mean > previous);
        CHECK(mean < 1000.0 * 0.125 + 1e-9);
        previous = mean;
    }
    CHECK_THAT(mean_size_late(ScaledDistribution(0.5, 1e9, 1000)),
               Catch::Matchers::WithinRel(125.0, 1e-6));
    CHECK(mean_size_late(ScaledDistribution(0.5, 1e-3, 1000)) < 0.2);
}

TEST_CASE("collapse: P_reg is a function of s/(1-r) at fixed lambda") {
    for (double lambda : {0.5, 1.0, 2.0}) {
        const ScaledDistribution a(0.2, lambda, 1);
        const ScaledDistribution b(0.5, lambda, 1);
        for (double sigma : {0.0, 0.1, 0.25, 0.4, 0.49}) {
            const double pa = p_reg(sigma * (1.0 - a.r), a);
            const double pb = p_reg(sigma * (1.0 - b.r), b);
            CHECK_THAT(pa, Catch::Matchers::WithinAbs(pb, 1e-9 * std::max(1.0, pa)));
        }
    }
}

TEST_CASE("lambda_of_t and scrambling-time consistency") {
    CHECK_THAT(lambda_of_t(0.0, 0.0, 2), Catch::Matchers::WithinAbs(1.0, 1e-15));
    for (double r : {0.2, 0.5}) {
        const long N = 100000;
        const double C = N * (1.0 - r) * (1.0 - r) / 2.0;
        CHECK_THAT(lambda_of_t(std::log(C) / (1.0 - r), r, N),
                   Catch::Matchers::WithinRel(1.0, 1e-12));
        // at t_s = ln N / (1-r) the propagator is 2/(1-r)^2
        const double t_s = std::log(static_cast<double>(N)) / (1.0 - r);
        CHECK_THAT(lambda_of_t(t_s, r, N),
                   Catch::Matchers::WithinRel(2.0 / ((1.0 - r) * (1.0 - r)), 1e-10));
    }
    CHECK_THROWS_AS(lambda_of_t(1.0, 1.0, 100), std::domain_error);
}

TEST_CASE("numerical Laplace transform of the scaled distribution") {
    const ScaledDistribution sd(0.3, 1.0, 1);
    CHECK_THAT(scramblon_laplace(0.0, sd, 1e-12), Catch::Matchers::WithinAbs(1.0, 1e-10));
    // monotone decreasing in nu, bounded below by the singular weight
    double previous = 1.0;
    for (double nu : {0.5, 2.0, 10.0, 100.0}) {
        const double s = scramblon_laplace(nu, sd, 1e-12);
        CHECK(s < previous);
        CHECK(s >= sd.singular_weight() - 1e-12);
        previous = s;
    }
}
