#pragma once

// Trial simulator used to check the closed-form power. Data follow the
// linear mixed model
//
//   Y_ij = intercept + X_j δ + c_j + e_ij,  c_j ~ N(0, σ²_b),  e_ij ~ N(0, σ²_w)
//
// with the first C/2 clusters in the control arm (X_j = 0) and the rest
// treated. The test is the known-variance Wald test: δ̂ is the difference of
// individual-level arm means and Var(δ̂) is the closed form at the true ψ.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crtassure/power.hpp"

namespace crtassure {

struct TrialSimConfig {
    double delta_true = 0.0;
    double intercept = 0.0;
    double sigma_b_sq = 0.0;
    double sigma_w_sq = 1.0;
    int clusters = 2;
    int n_bar = 1;
    double nu = 0.0;
    std::size_t reps = 10000;
    WaldTest test;
    std::uint64_t seed = 0;

    void validate() const;
    double rho() const { return sigma_b_sq / (sigma_b_sq + sigma_w_sq); }
    NuisanceParams psi() const;
};

/// Configuration with σ²_b = ρσ², σ²_w = (1 − ρ)σ².
TrialSimConfig trial_config_from_psi(double delta, const NuisanceParams& psi, int clusters,
                                     int n_bar, const WaldTest& test, std::size_t reps,
                                     std::uint64_t seed);

/// Cluster sizes with mean n̄ and CV ν: all n̄ when ν = 0, otherwise rounded
/// gamma draws (minimum 1). For C >= 40 the realised mean and CV must be
/// within 5% of target; the draw is repeated up to 100 times, then
/// DomainError is thrown.
std::vector<int> draw_cluster_sizes(int n_bar, double nu, int clusters, std::uint64_t seed);

/// One Wald statistic from simulated trial data.
double simulate_z(const TrialSimConfig& config, std::span<const int> cluster_sizes,
                  std::uint64_t seed);

struct EmpiricalPower {
    double rate = 0.0;
    double binomial_se = 0.0;  // binomial: sqrt(p(1 − p) / reps)
    std::size_t reps = 0;
    double formula = 0.0;  // closed-form power at the same configuration

    friend bool operator==(const EmpiricalPower&, const EmpiricalPower&) = default;
};

/// Rejection rate over config.reps simulated trials; cluster sizes are
/// redrawn in every replicate. Requires reps >= 100.
EmpiricalPower empirical_power(const TrialSimConfig& config);

}  // namespace crtassure
