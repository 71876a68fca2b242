#include <doctest.h>

#include <random>

#include "crtassure/assurance.hpp"
#include "crtassure/priors.hpp"
#include "oracles.hpp"

using namespace crtassure;

TEST_CASE("point-mass prior gives exactly the power") {
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const NuisanceParams psi{2.0 + 10.0 * u(rng), 0.2 * u(rng), u(rng)};
        const WaldTest test{0.01 + 0.09 * u(rng), u(rng) < 0.5 ? Sidedness::one : Sidedness::two};
        const int c = 2 * (2 + static_cast<int>(30 * u(rng)));
        const double n = 1 + static_cast<int>(40 * u(rng));
        const double delta = 0.5 + 4.0 * u(rng);
        const auto draws = sample_prior(point_prior(psi), 1000, 1 + i);
        const auto a = assurance(delta, draws, c, n, test);
        CHECK(a.value == power(delta, psi, c, n, test));
        CHECK(a.mc_stderr == 0.0);
    }
}

TEST_CASE("stratified discrete prior equals the weighted average of powers") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const WaldTest test{0.05, Sidedness::two};
    const double z = oracle::normal_quantile(0.975);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + trial % 5;
        std::vector<DiscreteAtom> atoms;
        for (int j = 0; j < k; ++j) {
            atoms.push_back({{4.0 + 8.0 * u(rng), 0.15 * u(rng), u(rng)}, 0.05 + u(rng)});
        }
        const auto set = stratified_draws(atoms);
        const int c = 40;
        const double n = 1 + static_cast<int>(30 * u(rng));
        double wsum = 0.0, expected = 0.0;
        for (const auto& a : atoms) wsum += a.weight;
        for (const auto& a : atoms) {
            expected += a.weight / wsum * oracle::power(2.52, a.psi.sigma, a.psi.rho, a.psi.nu, c, n, z);
        }
        CHECK(assurance(2.52, set, c, n, test).value == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("assurance is monotone in n and bounded by the plateau") {
    PriorSpec prior;
    prior.joint = IndependentJoint{PointMass{8.32}, fit_icc_from_quantiles(0.0296, 0.00131, 0.330)};
    prior.nu = PointMass{0.49};
    const auto draws = sample_prior(prior, 10000, 20240607);
    const WaldTest test;
    const double lim = assurance_limit(2.52, draws, 40, test);
    double prev = 0.0;
    for (int n = 1; n <= 200; ++n) {
        const auto a = assurance(2.52, draws, 40, n, test);
        CHECK(a.value > prev);
        CHECK(a.value <= lim);
        CHECK(a.mc_stderr > 0.0);
        prev = a.value;
    }
}

TEST_CASE("assurance equals the mean of per-draw powers") {
    PriorSpec prior;
    prior.joint = CopulaJointSpec{fit_icc_from_quantiles(0.0296, 0.00131, 0.330),
                                  gamma_from_mean_var(8.32, 1.0), 0.44};
    prior.nu = gamma_from_mean_var(0.49, 0.066 * 0.066);
    const auto draws = sample_prior(prior, 2000, 3);
    const auto per = per_draw_power(2.52, draws, 40, 18, WaldTest{});
    CHECK(assurance(2.52, draws, 40, 18, WaldTest{}).value == doctest::Approx(oracle::mean(per)).epsilon(1e-13));
    const double se = std::sqrt(oracle::variance(per) / per.size());
    CHECK(assurance(2.52, draws, 40, 18, WaldTest{}).mc_stderr == doctest::Approx(se).epsilon(1e-10));
}
