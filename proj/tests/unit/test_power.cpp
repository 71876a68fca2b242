#include <doctest.h>

#include <cmath>
#include <random>

#include "crtassure/errors.hpp"
#include "crtassure/power.hpp"
#include "oracles.hpp"

using namespace crtassure;

namespace {
const NuisanceParams kIcons{8.32, 0.0296, 0.49};
const WaldTest kTwoSided{0.05, Sidedness::two};
const double kZ975 = oracle::normal_quantile(0.975);
}  // namespace

TEST_CASE("power matches the formula written out directly") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const NuisanceParams psi{1.0 + 10.0 * u(rng), 0.3 * u(rng), 1.2 * u(rng)};
        const int c = 2 * (1 + static_cast<int>(40 * u(rng)));
        const double n = 1.0 + 60.0 * u(rng);
        const double delta = 5.0 * u(rng);
        const double ref = oracle::power(delta, psi.sigma, psi.rho, psi.nu, c, n, kZ975);
        CHECK(power(delta, psi, c, n, kTwoSided) == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("ICONS power values") {
    CHECK(power(2.52, kIcons, 40, 12, kTwoSided) == doctest::Approx(0.797681).epsilon(2e-6));
    CHECK(power(2.52, kIcons, 50, 9, kTwoSided) == doctest::Approx(0.804229).epsilon(2e-6));
    CHECK(power(2.52, kIcons, 50, 8, kTwoSided) == doctest::Approx(0.768530).epsilon(2e-6));
}

TEST_CASE("design effect and Wald variance") {
    CHECK(design_effect(12, 0.0296, 0.0) == doctest::Approx(1.0 + 11 * 0.0296).epsilon(1e-15));
    CHECK(design_effect(12, 0.0296, 0.49) ==
          doctest::Approx(1.0 + ((0.49 * 0.49 + 1) * 12 - 1) * 0.0296).epsilon(1e-15));
    CHECK(design_effect(1, 0.5, 0.0) == 1.0);
    const NuisanceParams eq{8.32, 0.0296, 0.0};
    CHECK(wald_variance(eq, 40, 12) == 4 * 8.32 * 8.32 * (1 + 11 * 0.0296) / (40 * 12));
}

TEST_CASE("power is the size of the test at delta zero") {
    CHECK(power(0.0, kIcons, 40, 12, WaldTest{0.025, Sidedness::one}) ==
          doctest::Approx(0.025).epsilon(1e-14));
    CHECK(power(0.0, kIcons, 40, 12, WaldTest{0.05, Sidedness::two}) ==
          doctest::Approx(0.025).epsilon(1e-14));
}

TEST_CASE("plateau is the large-n limit and bounds power") {
    const double lim = power_limit(2.52, kIcons, 40, kTwoSided);
    const double ref = oracle::normal_cdf(2.52 * std::sqrt(40.0 / (4 * 8.32 * 8.32 * (1 + 0.49 * 0.49) * 0.0296)) - kZ975);
    CHECK(lim == doctest::Approx(ref).epsilon(1e-12));
    CHECK(power(2.52, kIcons, 40, 1e9, kTwoSided) == doctest::Approx(lim).epsilon(1e-6));
    for (double n = 1; n < 500; n *= 1.7) {
        CHECK(power(2.52, kIcons, 40, n, kTwoSided) <= lim);
    }
    CHECK(power_limit(2.52, NuisanceParams{8.32, 0.0, 0.49}, 40, kTwoSided) == 1.0);
}

TEST_CASE("power is monotone in n, C and delta; decreasing in rho, nu, sigma") {
    double prev = 0.0;
    for (int n = 1; n <= 100; ++n) {
        const double p = power(2.52, kIcons, 40, n, kTwoSided);
        CHECK(p > prev);
        prev = p;
    }
    CHECK(power(2.52, kIcons, 42, 12, kTwoSided) > power(2.52, kIcons, 40, 12, kTwoSided));
    CHECK(power(2.6, kIcons, 40, 12, kTwoSided) > power(2.52, kIcons, 40, 12, kTwoSided));
    CHECK(power(2.52, {8.32, 0.03, 0.49}, 40, 12, kTwoSided) < power(2.52, kIcons, 40, 12, kTwoSided));
    CHECK(power(2.52, {8.32, 0.0296, 0.5}, 40, 12, kTwoSided) < power(2.52, kIcons, 40, 12, kTwoSided));
    CHECK(power(2.52, {8.4, 0.0296, 0.49}, 40, 12, kTwoSided) < power(2.52, kIcons, 40, 12, kTwoSided));
}

TEST_CASE("one-sided test at alpha equals two-sided at 2 alpha") {
    CHECK(power(2.52, kIcons, 40, 12, WaldTest{0.025, Sidedness::one}) ==
          power(2.52, kIcons, 40, 12, WaldTest{0.05, Sidedness::two}));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(power(2.52, {8.32, 1.0, 0.49}, 40, 12, kTwoSided), DomainError);
    CHECK_THROWS_AS(power(2.52, {0.0, 0.02, 0.49}, 40, 12, kTwoSided), DomainError);
    CHECK_THROWS_AS(power(2.52, {8.32, 0.02, -0.1}, 40, 12, kTwoSided), DomainError);
    CHECK_THROWS_AS(power(2.52, kIcons, 41, 12, kTwoSided), DomainError);
    CHECK_THROWS_AS(power(2.52, kIcons, 40, 0.5, kTwoSided), DomainError);
    CHECK_THROWS_AS(power(2.52, kIcons, 40, 12, WaldTest{1.2, Sidedness::two}), DomainError);
    CHECK_THROWS_AS(parse_sidedness("three"), DomainError);
    CHECK(parse_sidedness("two-sided") == Sidedness::two);
    CHECK(parse_sidedness("one") == Sidedness::one);
}
