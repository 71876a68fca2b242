#include <doctest.h>

#include "crtassure/errors.hpp"
#include "crtassure/search.hpp"
#include "oracles.hpp"

using namespace crtassure;

namespace {

EvaluationSpec icons_power_spec() {
    EvaluationSpec s;
    s.delta_m = 2.52;
    s.method = Method::power;
    s.prior = point_prior({8.32, 0.0296, 0.49});
    s.seed = 1;
    return s;
}

EvaluationSpec rho_only_spec(double spread = 1.0) {
    EvaluationSpec s;
    s.delta_m = 2.52;
    s.method = Method::assurance;
    auto icc = fit_icc_from_quantiles(0.0296, 0.00131, 0.330);
    icc.sigma_logit *= spread;
    s.prior.joint = IndependentJoint{PointMass{8.32}, icc};
    s.prior.nu = PointMass{0.49};
    s.draws = 10000;
    s.seed = 20240607;
    return s;
}

}  // namespace

TEST_CASE("power-mode searches at the ICONS point values") {
    const auto r50 = min_cluster_size(icons_power_spec(), 0.8, 50);
    CHECK(r50.feasible);
    CHECK(r50.n_bar == 9);
    CHECK(r50.n_total == 450);
    CHECK(r50.achieved >= 0.8);
    REQUIRE(r50.previous);
    CHECK(*r50.previous < 0.8);
    // Formula power at C = 40 is 0.7977 for n̄ = 12, so 13 is the minimum.
    const auto r40 = min_cluster_size(icons_power_spec(), 0.8, 40);
    CHECK(r40.n_bar == 13);
    CHECK(*r40.previous == doctest::Approx(0.797681).epsilon(1e-5));
}

TEST_CASE("search result agrees with a linear scan") {
    for (double spread : {0.8, 1.0, 1.25}) {
        const auto spec = rho_only_spec(spread);
        const DesignEvaluator ev(spec);
        for (int c : {30, 40, 50, 60}) {
            const auto r = min_cluster_size(ev, 0.8, c);
            if (!r.feasible) {
                CHECK(ev.plateau(c) < 0.8);
                continue;
            }
            int scan = 1;
            while (ev.evaluate(c, scan).value < 0.8) ++scan;
            CHECK(r.n_bar == scan);
        }
    }
}

TEST_CASE("assurance with a point prior gives the power-mode answer") {
    auto spec = icons_power_spec();
    spec.method = Method::assurance;
    for (int c : {40, 50, 60}) {
        CHECK(min_cluster_size(spec, 0.8, c).n_bar == min_cluster_size(icons_power_spec(), 0.8, c).n_bar);
    }
}

TEST_CASE("infeasible designs and search limits") {
    const auto r = min_cluster_size(icons_power_spec(), 0.99, 4);
    CHECK_FALSE(r.feasible);
    CHECK(r.plateau < 0.99);
    CHECK_THROWS_AS(min_cluster_size(icons_power_spec(), 0.8, 40, 5), SearchLimitExceeded);
    CHECK_THROWS_AS(min_clusters(icons_power_spec(), 0.8, 9, 20), SearchLimitExceeded);
}

TEST_CASE("cluster-count search") {
    CHECK(min_clusters(icons_power_spec(), 0.8, 9).clusters == 50);
    // Individually randomised two-sample z-test, δ/σ = 1: C = 4(z_a + z_b)²/1 rounded up to even.
    EvaluationSpec s;
    s.delta_m = 1.0;
    s.method = Method::power;
    s.prior = point_prior({1.0, 0.0, 0.0});
    CHECK(min_clusters(s, 0.8, 1).clusters == 32);
    s.delta_m = 1e-9;
    CHECK(min_clusters(s, 0.025, 1).clusters == 2);
}

TEST_CASE("cross-direction consistency") {
    const auto spec = rho_only_spec();
    const DesignEvaluator ev(spec);
    for (int c : {40, 50, 60}) {
        const auto r = min_cluster_size(ev, 0.8, c);
        REQUIRE(r.feasible);
        CHECK(min_clusters(ev, 0.8, r.n_bar).clusters <= c);
    }
}

TEST_CASE("curves share draws and are monotone") {
    const auto spec = rho_only_spec();
    std::vector<double> ns;
    for (int n = 1; n <= 50; ++n) ns.push_back(n);
    const auto points = curve(spec, 40, ns);
    REQUIRE(points.size() == 50);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].value >= points[i - 1].value);
    }
    const DesignEvaluator ev(spec);
    CHECK(points[16].value == ev.evaluate(40, 17).value);
    const auto single = curve(spec, 40, {17.0});
    CHECK(single[0].value == ev.evaluate(40, 17).value);
    const auto pc = curve(icons_power_spec(), 40, {11.0, 12.0, 13.0});
    CHECK(pc[1].value < 0.8);
    CHECK(pc[2].value >= 0.8);
    CHECK(pc[0].mc_stderr == 0.0);
}

TEST_CASE("nu sweep ordering") {
    const auto spec = rho_only_spec();
    const auto nus = parse_range("0:1:0.1");
    REQUIRE(nus.size() == 11);
    std::vector<double> ns;
    for (int n = 2; n <= 30; ++n) ns.push_back(n);
    const auto curves = nu_sweep(spec, nus, 40, ns, 0.8);
    REQUIRE(curves.size() == 11);
    for (std::size_t k = 1; k < curves.size(); ++k) {
        for (std::size_t i = 0; i < ns.size(); ++i) {
            CHECK(curves[k].points[i].value < curves[k - 1].points[i].value);
        }
        REQUIRE(curves[k].required);
        CHECK(curves[k].required->n_bar >= curves[k - 1].required->n_bar);
    }
}

TEST_CASE("prior comparison table") {
    const LabelledPrior a{"tight", rho_only_spec(1.0).prior};
    const LabelledPrior b{"wide", rho_only_spec(1.5).prior};
    const auto rows = prior_comparison({a, b}, rho_only_spec(), 0.8, {50, 40});
    REQUIRE(rows.size() == 8);
    auto find = [&](const std::string& label, int c, Method m) {
        for (const auto& r : rows)
            if (r.scenario_label == label && r.clusters == c && r.method == m) return r;
        FAIL("missing row");
        return rows.front();
    };
    for (int c : {50, 40}) {
        CHECK(find("tight", c, Method::power).n_bar == find("wide", c, Method::power).n_bar);
        CHECK(find("wide", c, Method::assurance).n_bar >= find("tight", c, Method::assurance).n_bar);
        for (const auto& r : rows) CHECK(r.n_total == static_cast<long long>(r.clusters) * r.n_bar);
    }
    const LabelledPrior point{"point", point_prior({8.32, 0.0296, 0.49})};
    const auto prow = prior_comparison({point}, rho_only_spec(), 0.8, {40});
    CHECK(prow[0].n_bar == prow[1].n_bar);
}

TEST_CASE("range parsing") {
    CHECK(parse_range("1:3:1") == std::vector<double>{1, 2, 3});
    CHECK(parse_range("0:0.3:0.1") == std::vector<double>{0, 0.1, 0.2, 0.3});
    CHECK(parse_range("5,2.5,7") == std::vector<double>{5, 2.5, 7});
    CHECK_THROWS_AS(parse_range("1:3:0"), DomainError);
    CHECK_THROWS_AS(parse_range("a,b"), DomainError);
    CHECK_THROWS_AS(parse_range(""), DomainError);
}

TEST_CASE("determinism") {
    const auto spec = rho_only_spec();
    CHECK(min_cluster_size(spec, 0.8, 40) == min_cluster_size(spec, 0.8, 40));
    auto other = spec;
    other.seed = spec.seed + 1;
    CHECK(min_cluster_size(spec, 0.8, 40).spec_digest == min_cluster_size(other, 0.8, 40).spec_digest);
}
