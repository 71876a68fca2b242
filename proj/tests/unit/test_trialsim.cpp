#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crtassure/errors.hpp"
#include "crtassure/trialsim.hpp"
#include "oracles.hpp"

using namespace crtassure;

TEST_CASE("cluster sizes") {
    const auto equal = draw_cluster_sizes(12, 0.0, 40, 1);
    CHECK(equal == std::vector<int>(40, 12));
    const auto big = draw_cluster_sizes(12, 0.49, 10000, 2);
    std::vector<double> d(big.begin(), big.end());
    const double cv = std::sqrt(oracle::variance(d)) / oracle::mean(d);
    CHECK(cv == doctest::Approx(0.49).epsilon(0.02 / 0.49));
    CHECK(oracle::mean(d) == doctest::Approx(12.0).epsilon(0.02));
    const auto tiny = draw_cluster_sizes(1, 0.49, 30, 3);
    CHECK(std::all_of(tiny.begin(), tiny.end(), [](int n) { return n >= 1; }));
    CHECK(draw_cluster_sizes(9, 0.49, 50, 4) == draw_cluster_sizes(9, 0.49, 50, 4));
    CHECK_THROWS_AS(draw_cluster_sizes(0, 0.5, 10, 1), DomainError);
}

TEST_CASE("size under the null, across rho and nu") {
    for (double rho : {0.0, 0.03, 0.3}) {
        for (double nu : {0.0, 0.5}) {
            const auto cfg = trial_config_from_psi(0.0, {1.0, rho, nu}, 40, 10, WaldTest{}, 20000,
                                                   static_cast<std::uint64_t>(1000 * rho + 10 * nu));
            const auto r = empirical_power(cfg);
            const double se = std::sqrt(0.05 * 0.95 / r.reps);
            if (nu == 0.0) {
                CHECK(std::abs(r.rate - 0.05) <= 3 * se);
            } else {
                // Unequal sizes: the closed-form variance is an approximation.
                CHECK(std::abs(r.rate - 0.05) <= 0.02);
            }
        }
    }
}

TEST_CASE("null rejection rate at 10^5 reps") {
    const auto cfg = trial_config_from_psi(0.0, {1.0, 0.0, 0.0}, 20, 5, WaldTest{}, 100000, 5);
    CHECK(std::abs(empirical_power(cfg).rate - 0.05) <= 0.005);
}

TEST_CASE("empirical power agrees with the formula at the ICONS values") {
    const auto eq = trial_config_from_psi(2.52, {8.32, 0.0296, 0.0}, 50, 9, WaldTest{}, 10000, 11);
    const auto r0 = empirical_power(eq);
    CHECK(r0.formula == doctest::Approx(0.8235).epsilon(1e-3));
    CHECK(std::abs(r0.rate - r0.formula) <= 0.02);
    const auto uneq = trial_config_from_psi(2.52, {8.32, 0.0296, 0.49}, 50, 9, WaldTest{}, 10000, 12);
    const auto r1 = empirical_power(uneq);
    CHECK(r1.formula == doctest::Approx(0.8042).epsilon(1e-3));
    CHECK(std::abs(r1.rate - r1.formula) <= 0.03);
    CHECK(r1.binomial_se == doctest::Approx(std::sqrt(r1.rate * (1 - r1.rate) / 10000)));
}

TEST_CASE("config validation and variance identity") {
    const auto cfg = trial_config_from_psi(2.52, {8.32, 0.0296, 0.0}, 40, 12, WaldTest{}, 100, 1);
    CHECK(cfg.rho() == doctest::Approx(0.0296).epsilon(1e-14));
    CHECK(cfg.sigma_b_sq + cfg.sigma_w_sq == doctest::Approx(8.32 * 8.32).epsilon(1e-14));
    auto bad = cfg;
    bad.reps = 10;
    CHECK_THROWS_AS(empirical_power(bad), DomainError);
    bad = cfg;
    bad.clusters = 7;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
