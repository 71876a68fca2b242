#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "crtassure/errors.hpp"
#include "crtassure/priors.hpp"
#include "crtassure/stats.hpp"
#include "oracles.hpp"

using namespace crtassure;

namespace {

MarginalPrior icc_surrogate() { return fit_icc_from_quantiles(0.0296, 0.00131, 0.330); }

std::vector<double> column(const std::vector<RhoSigma>& v, bool rho) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back(rho ? p.rho : p.sigma);
    return out;
}

}  // namespace

TEST_CASE("gamma from mean and variance") {
    const auto g = gamma_from_mean_var(8.32, 1.0);
    CHECK(g.shape == doctest::Approx(69.2224).epsilon(1e-14));
    CHECK(g.rate == doctest::Approx(8.32).epsilon(1e-14));
    const auto n = gamma_from_mean_var(0.49, 0.066 * 0.066);
    CHECK(n.mean() == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(n.variance() == doctest::Approx(0.066 * 0.066).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_from_mean_var(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(gamma_from_mean_var(1.0, 0.0), DomainError);
}

TEST_CASE("ICC quantile fit agrees with a grid-search least-squares oracle") {
    const auto fit = fit_icc_from_quantiles(0.0296, 0.00131, 0.330);
    CHECK(fit.median() == doctest::Approx(0.0296).epsilon(1e-13));
    // Minimise squared logit-scale error of the two tail quantiles over s.
    const double mu = std::log(0.0296 / (1 - 0.0296));
    const double z = oracle::normal_quantile(0.975);
    const double lo = std::log(0.00131 / (1 - 0.00131));
    const double hi = std::log(0.330 / (1 - 0.330));
    double best = 0.0, best_err = 1e300;
    for (double s = 0.5; s < 3.0; s += 1e-6) {
        const double err = std::pow(mu - z * s - lo, 2) + std::pow(mu + z * s - hi, 2);
        if (err < best_err) {
            best_err = err;
            best = s;
        }
    }
    CHECK(fit.mu == doctest::Approx(mu).epsilon(1e-12));
    CHECK(fit.sigma_logit == doctest::Approx(best).epsilon(1e-5));
    CHECK_THROWS_AS(fit_icc_from_quantiles(0.0296, 0.4, 0.330), DomainError);
    CHECK_THROWS_AS(fit_icc_from_quantiles(0.0, 0.001, 0.330), DomainError);
}

TEST_CASE("copula rank correlation and marginals") {
    CopulaJointSpec spec;
    spec.rho = icc_surrogate();
    spec.sigma = gamma_from_mean_var(8.32, 1.0);
    spec.gamma_corr = 0.44;
    const auto pairs = sample_copula(spec, 100000, 2024);
    const auto rho = column(pairs, true);
    const auto sigma = column(pairs, false);
    const double expected = 6.0 / oracle::kPi * std::asin(0.22);
    CHECK(stats::spearman(rho, sigma) == doctest::Approx(expected).epsilon(0.02 / expected));
    const auto g = std::get<dist::GammaSpec>(spec.sigma);
    const auto l = std::get<dist::LogitNormalSpec>(spec.rho);
    CHECK(stats::ks_distance(sigma, [&](double x) { return oracle::gamma_p(g.shape, g.rate * x); }) <= 0.01);
    CHECK(stats::ks_distance(rho, [&](double x) {
              return oracle::normal_cdf((std::log(x / (1 - x)) - l.mu) / l.sigma_logit);
          }) <= 0.01);
}

TEST_CASE("copula with zero correlation is independent") {
    CopulaJointSpec spec{icc_surrogate(), gamma_from_mean_var(8.32, 1.0), 0.0};
    const auto pairs = sample_copula(spec, 50000, 5);
    CHECK(std::abs(stats::spearman(column(pairs, true), column(pairs, false))) < 0.02);
}

TEST_CASE("induced prior correlation") {
    const InducedJointSpec spec{{0.18, 0.04}, {21.06, 0.32}};
    const auto est = estimate_copula_gamma(spec, 100000, 11);
    CHECK(est.value == doctest::Approx(0.4625).epsilon(0.015 / 0.4625));
    CHECK(est.bootstrap_se > 0.0);
    CHECK(est.bootstrap_se < 0.01);
    const auto comps = sample_variance_components(spec, 1000, 3);
    const auto pairs = sample_induced(spec, 1000, 3);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double total = comps[i].between + comps[i].within;
        CHECK(pairs[i].rho * pairs[i].sigma * pairs[i].sigma == doctest::Approx(comps[i].between).epsilon(1e-12));
        CHECK(pairs[i].sigma * pairs[i].sigma == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("sample_prior is reproducible and respects supports") {
    PriorSpec prior;
    prior.joint = CopulaJointSpec{icc_surrogate(), gamma_from_mean_var(8.32, 1.0), 0.44};
    prior.nu = gamma_from_mean_var(0.49, 0.066 * 0.066);
    const auto a = sample_prior(prior, 5000, 77);
    const auto b = sample_prior(prior, 5000, 77);
    const auto c = sample_prior(prior, 5000, 78);
    CHECK(a.draws == b.draws);
    CHECK(a.draws != c.draws);
    CHECK(a.spec_digest == spec_digest(prior));
    for (const auto& d : a.draws) {
        CHECK(d.sigma > 0);
        CHECK(d.rho >= 0);
        CHECK(d.rho < 1);
        CHECK(d.nu >= 0);
    }
    // The first draws do not depend on how many are requested.
    const auto longer = sample_prior(prior, 6000, 77);
    CHECK(std::equal(a.draws.begin(), a.draws.end(), longer.draws.begin()));
}

TEST_CASE("point priors and power point") {
    const NuisanceParams psi{8.32, 0.0296, 0.49};
    const auto p = point_prior(psi);
    CHECK(p.is_point());
    CHECK(power_point(p) == psi);
    PriorSpec prior;
    prior.joint = IndependentJoint{gamma_from_mean_var(8.32, 1.0), icc_surrogate()};
    prior.nu = gamma_from_mean_var(0.49, 0.066 * 0.066);
    const auto pp = power_point(prior);
    CHECK(pp.sigma == doctest::Approx(8.32).epsilon(1e-14));
    CHECK(pp.rho == doctest::Approx(0.0296).epsilon(1e-13));
    CHECK(pp.nu == doctest::Approx(0.49).epsilon(1e-14));
    CHECK_FALSE(prior.is_point());
    CHECK(spec_digest(prior) != spec_digest(p));
}

TEST_CASE("stratified draws keep atoms and normalised weights") {
    const DiscreteAtom atoms[] = {{{8.0, 0.01, 0.4}, 2.0}, {{9.0, 0.1, 0.6}, 6.0}};
    const auto set = stratified_draws(atoms);
    REQUIRE(set.size() == 2);
    CHECK(set.weights[0] == doctest::Approx(0.25));
    CHECK(set.weights[1] == doctest::Approx(0.75));
    const DiscreteAtom bad[] = {{{8.0, 0.01, 0.4}, -1.0}};
    CHECK_THROWS(stratified_draws(bad));
}

TEST_CASE("ICC sample files") {
    const auto path = std::filesystem::temp_directory_path() / "crtassure_icc_samples.txt";
    {
        std::ofstream out(path);
        out << "# posterior draws\n0.01\n\n0.05\n  0.2  \n# trailing comment\n0.03\n";
    }
    const auto e = load_icc_samples(path.string());
    CHECK(e.size() == 4);
    CHECK(e.quantile(1.0) == 0.2);
    {
        std::ofstream out(path);
        out << "0.01\n1.0\n";
    }
    CHECK_THROWS_AS(load_icc_samples(path.string()), ParseError);
    {
        std::ofstream out(path);
        out << "0.01\nabc\n";
    }
    CHECK_THROWS_AS(load_icc_samples(path.string()), ParseError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_icc_samples(path.string()), IoError);
}

TEST_CASE("marginal supports are validated") {
    CHECK_THROWS_AS(validate_marginal(PointMass{1.0}, Parameter::rho), DomainError);
    CHECK_THROWS_AS(validate_marginal(PointMass{0.0}, Parameter::sigma), DomainError);
    CHECK_NOTHROW(validate_marginal(PointMass{0.0}, Parameter::nu));
    CHECK_THROWS_AS(validate_marginal(dist::GammaSpec{1.0, 1.0}, Parameter::rho), DomainError);
}
