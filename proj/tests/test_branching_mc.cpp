// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "opsize/branching_mc.hpp"
#include "opsize/closed_form.hpp"
#include "opsize/model.hpp"

using namespace opsize;

namespace {

BranchingModel model_for_r(double r) {
    return BranchingModel::from_model(ModelSpec::from_r(r));
}

}  // namespace

TEST_CASE("model construction drops size-neutral channels") {
    ModelSpec spec;
    spec.J = 0.25;          // q = 4: +2 at rate 1
    spec.couplings = {{1, 1, 0.5}, {2, 2, 9.0}};
    const auto model = BranchingModel::from_model(spec);
    REQUIRE(model.events.size() == 2);
    CHECK(model.events[0].size_change() == -1);
    CHECK(model.events[0].rate == 2.0);
    CHECK(model.events[1].size_change() == +2);
    CHECK(model.events[1].offspring() == 3);
    CHECK_THAT(model.total_rate(), Catch::Matchers::WithinRel(3.0, 1e-14));
}

TEST_CASE("pure death from a single particle") {
    BranchingModel death;
    death.events = {{1, 2.0}};  // R_1 = 2

    SECTION("single path is one death event") {
        const auto path = gillespie_trajectory(death, 1, 1e9, 42);
        REQUIRE(path.size() == 1);
        CHECK(path[0].n == 0);
        CHECK(path[0].t > 0.0);
    }

    SECTION("mean extinction time is 1/R_1") {
        double sum = 0.0;
        const int trials = 20000;
        for (int s = 0; s < trials; ++s) {
            const auto path = gillespie_trajectory(death, 1, 1e9, hash_combine_seed(9, s));
            REQUIRE(path.size() == 1);
            sum += path[0].t;
        }
        // standard error = (1/R_1)/sqrt(trials)
        CHECK_THAT(sum / trials, Catch::Matchers::WithinAbs(0.5, 4.0 * 0.5 / 141.4));
    }
}

TEST_CASE("n0 = 0 is absorbing: empty path") {
    CHECK(gillespie_trajectory(model_for_r(0.5), 0, 10.0, 1).empty());
}

TEST_CASE("a fixed seed reproduces the path exactly") {
    const auto a = gillespie_trajectory(model_for_r(0.5), 1, 4.0, 1234);
    const auto b = gillespie_trajectory(model_for_r(0.5), 1, 4.0, 1234);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t == b[i].t);
        CHECK(a[i].n == b[i].n);
    }
}

TEST_CASE("population cap fails loudly") {
    BranchingModel fast;
    fast.events = {{4, 50.0}};
    CHECK_THROWS_WITH(gillespie_trajectory(fast, 1, 100.0, 7, 1000),
                      Catch::Matchers::ContainsSubstring("cap"));
}

TEST_CASE("estimates are identical for any worker count") {
    const std::vector<double> grid{1.0, 2.0};
    const auto one = estimate_distribution(model_for_r(0.5), 1, grid, 5000, 77, 1);
    const auto two = estimate_distribution(model_for_r(0.5), 1, grid, 5000, 77, 2);
    const auto five = estimate_distribution(model_for_r(0.5), 1, grid, 5000, 77, 5);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        CHECK(one[gi].counts == two[gi].counts);
        CHECK(one[gi].counts == five[gi].counts);
    }
}

TEST_CASE("wilson interval basics") {
    CHECK(wilson_halfwidth(0, 100) < wilson_halfwidth(50, 100));
    // n_traj = 1 is flagged degenerate
    const auto est = estimate_distribution(model_for_r(0.5), 1, std::vector<double>{1.0}, 1, 3);
    CHECK(est[0].degenerate);
    CHECK(est[0].n_traj == 1);
}

TEST_CASE("sample mean tracks e^{(1-r)t}") {
    const double r = 0.5, t = 4.0;
    const long n_traj = 200000;
    const auto est =
        estimate_distribution(model_for_r(r), 1, std::vector<double>{t}, n_traj, 2024);
    double mean = 0.0, second = 0.0;
    for (const auto& [n, c] : est[0].counts) {
        mean += static_cast<double>(n) * c;
        second += static_cast<double>(n) * n * c;
    }
    mean /= n_traj;
    second /= n_traj;
    const double stderr_mean = std::sqrt((second - mean * mean) / n_traj);
    CHECK(std::abs(mean - std::exp((1.0 - r) * t)) <= 4.0 * stderr_mean);
}

TEST_CASE("estimates cover the closed form at the critical point") {
    // P(1, t = 10) = 1/121 at r = 1
    const auto est = estimate_distribution(model_for_r(1.0), 1, std::vector<double>{10.0},
                                           200000, 515151);
    const double target = 0.0082644628099173556;
    CHECK(std::abs(est[0].p_hat(1) - target) <= 3.0 * est[0].ci_halfwidth(1));
}

TEST_CASE("distributional coverage across master seeds") {
    // over independent master seeds, every probe point should sit inside
    // three Wilson halfwidths of the closed form essentially always
    const std::vector<double> grid{1.0, 2.0, 4.0};
    const long n_traj = 20000;
    int seeds_fully_covered = 0;
    const int n_seeds = 20;
    for (int s = 0; s < n_seeds; ++s) {
        bool covered = true;
        for (double r : {0.5, 1.0, 1.5}) {
            const auto est = estimate_distribution(model_for_r(r), 1, grid, n_traj,
                                                   hash_combine_seed(4242, s));
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                for (long n = 0; n <= 10; ++n) {
                    const double closed = (r == 1.0) ? p_critical(n, grid[gi])
                                                     : p_exact(n, {r, grid[gi]});
                    if (std::abs(est[gi].p_hat(n) - closed) > 3.0 * est[gi].ci_halfwidth(n))
                        covered = false;
                }
            }
        }
        seeds_fully_covered += covered;
    }
    CHECK(seeds_fully_covered >= n_seeds - 1);
}
