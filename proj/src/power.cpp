#include "crtassure/power.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "crtassure/distributions.hpp"
#include "crtassure/errors.hpp"

namespace crtassure {

std::string_view to_string(Sidedness s) { return s == Sidedness::one ? "one" : "two"; }

Sidedness parse_sidedness(std::string_view text) {
    if (text == "one" || text == "one-sided") {
        return Sidedness::one;
    }
    if (text == "two" || text == "two-sided") {
        return Sidedness::two;
    }
    throw DomainError("sidedness must be 'one' or 'two', got '" + std::string(text) + "'");
}

void NuisanceParams::validate() const {
    if (!(sigma > 0.0 && std::isfinite(sigma))) {
        throw DomainError("sigma must be positive and finite, got " + std::to_string(sigma));
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw DomainError("rho (ICC) must lie in [0, 1), got " + std::to_string(rho));
    }
    if (!(nu >= 0.0 && std::isfinite(nu))) {
        throw DomainError("nu (cluster-size CV) must be >= 0, got " + std::to_string(nu));
    }
}

void WaldTest::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

double WaldTest::critical_value() const {
    validate();
    const double tail = sided == Sidedness::two ? alpha / 2.0 : alpha;
    // z_{1-tail} = -Φ⁻¹(tail), which keeps full precision for small tails.
    return -dist::standard_normal_quantile(tail);
}

void validate_clusters(int clusters) {
    if (clusters < 2 || clusters % 2 != 0) {
        throw DomainError("number of clusters must be even and >= 2, got " +
                          std::to_string(clusters));
    }
}

void DesignConfig::validate() const {
    if (!(delta_m > 0.0 && std::isfinite(delta_m))) {
        throw DomainError("MCID delta must be positive, got " + std::to_string(delta_m));
    }
    test.validate();
    validate_clusters(clusters);
    if (draws < 1) {
        throw DomainError("number of Monte Carlo draws must be >= 1");
    }
}

double design_effect(double n_bar, double rho, double nu) {
    return 1.0 + ((nu * nu + 1.0) * n_bar - 1.0) * rho;
}

double wald_variance(const NuisanceParams& psi, int clusters, double n_bar) {
    return 4.0 * psi.sigma * psi.sigma * design_effect(n_bar, psi.rho, psi.nu) /
           (static_cast<double>(clusters) * n_bar);
}

namespace detail {

double power_kernel(double delta, const NuisanceParams& psi, double clusters, double n_bar,
                    double critical) {
    const double de = design_effect(n_bar, psi.rho, psi.nu);
    const double z = delta * std::sqrt(clusters * n_bar / (4.0 * psi.sigma * psi.sigma * de));
    return dist::standard_normal_cdf(z - critical);
}

double power_limit_kernel(double delta, const NuisanceParams& psi, double clusters,
                          double critical) {
    if (psi.rho == 0.0) {
        if (delta > 0.0) {
            return 1.0;
        }
        return dist::standard_normal_cdf(delta == 0.0 ? -critical
                                                      : -std::numeric_limits<double>::infinity());
    }
    const double z = delta * std::sqrt(clusters / (4.0 * psi.sigma * psi.sigma *
                                                   (psi.nu * psi.nu + 1.0) * psi.rho));
    return dist::standard_normal_cdf(z - critical);
}

}  // namespace detail

namespace {

void validate_power_inputs(double delta, const NuisanceParams& psi, int clusters,
                           const WaldTest& test) {
    if (!std::isfinite(delta)) {
        throw DomainError("delta must be finite");
    }
    psi.validate();
    validate_clusters(clusters);
    test.validate();
}

}  // namespace

double power(double delta, const NuisanceParams& psi, int clusters, double n_bar,
             const WaldTest& test) {
    validate_power_inputs(delta, psi, clusters, test);
    if (!(n_bar >= 1.0 && std::isfinite(n_bar))) {
        throw DomainError("mean cluster size must be >= 1, got " + std::to_string(n_bar));
    }
    return detail::power_kernel(delta, psi, clusters, n_bar, test.critical_value());
}

double power_limit(double delta, const NuisanceParams& psi, int clusters, const WaldTest& test) {
    validate_power_inputs(delta, psi, clusters, test);
    return detail::power_limit_kernel(delta, psi, clusters, test.critical_value());
}

}  // namespace crtassure
