#pragma once

// Closed-form power of the Wald test for a two-arm parallel-group cluster
// randomised trial with 1:1 allocation of C clusters and mean cluster size
// n̄, allowing unequal cluster sizes through their coefficient of variation:
//
//   Var(δ̂) = 4σ² [1 + {(ν²+1) n̄ − 1} ρ] / (C n̄)
//   power  = Φ(δ / sqrt(Var(δ̂)) − z),  z = z_{1−α} (one-sided) or z_{1−α/2}

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace crtassure {

enum class Sidedness { one, two };

std::string_view to_string(Sidedness s);
/// Accepts "one"/"two" (also "one-sided"/"two-sided"). Throws DomainError.
Sidedness parse_sidedness(std::string_view text);

/// Nuisance parameters ψ: total outcome SD, ICC and cluster-size CV.
struct NuisanceParams {
    double sigma = 1.0;
    double rho = 0.0;
    double nu = 0.0;

    /// Throws DomainError unless sigma > 0, 0 <= rho < 1, nu >= 0.
    void validate() const;

    friend bool operator==(const NuisanceParams&, const NuisanceParams&) = default;
};

/// Significance level and sidedness of the planned Wald test.
struct WaldTest {
    double alpha = 0.05;
    Sidedness sided = Sidedness::two;

    friend bool operator==(const WaldTest&, const WaldTest&) = default;

    void validate() const;
    /// z_{1−α} or z_{1−α/2}.
    double critical_value() const;
};

/// Design-level settings shared by every operation: the MCID, the planned
/// test, the total cluster count (1:1 allocation) and Monte Carlo settings.
struct DesignConfig {
    double delta_m = 0.0;
    WaldTest test;
    int clusters = 2;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const DesignConfig&, const DesignConfig&) = default;
};

/// Throws DomainError unless clusters is even and >= 2.
void validate_clusters(int clusters);

double design_effect(double n_bar, double rho, double nu);

/// Variance of the treatment-effect estimator for total variance σ².
double wald_variance(const NuisanceParams& psi, int clusters, double n_bar);

double power(double delta, const NuisanceParams& psi, int clusters, double n_bar,
             const WaldTest& test);

/// Supremum of power over n̄ at fixed C: Φ(δ sqrt(C / (4σ²(ν²+1)ρ)) − z),
/// or 1 when ρ = 0 (and δ > 0).
double power_limit(double delta, const NuisanceParams& psi, int clusters, const WaldTest& test);

namespace detail {
// Unchecked kernels for tight loops; callers validate once up front.
double power_kernel(double delta, const NuisanceParams& psi, double clusters, double n_bar,
                    double critical);
double power_limit_kernel(double delta, const NuisanceParams& psi, double clusters,
                          double critical);
}  // namespace detail

}  // namespace crtassure
