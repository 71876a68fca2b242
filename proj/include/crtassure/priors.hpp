#pragma once

// Joint prior on the nuisance parameters ψ = (σ, ρ, ν).
//
// The (σ, ρ) block is one of
//   - independent marginals,
//   - a Gaussian copula joining arbitrary marginals with correlation γ,
//   - the prior induced by independent gamma priors on the between- and
//     within-cluster variances (ρ = σ²_b / σ², σ² = σ²_b + σ²_w),
// and ν always has its own independent marginal.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crtassure/distributions.hpp"
#include "crtassure/power.hpp"

namespace crtassure {

struct PointMass {
    double value = 0.0;
    friend bool operator==(const PointMass&, const PointMass&) = default;
};

using MarginalPrior =
    std::variant<PointMass, dist::GammaSpec, dist::EmpiricalDist, dist::LogitNormalSpec>;

enum class Parameter { sigma, rho, nu };
std::string_view to_string(Parameter p);

/// Throws DomainError if the marginal's support is incompatible with the
/// parameter (σ > 0, ρ ∈ [0, 1), ν ≥ 0).
void validate_marginal(const MarginalPrior& prior, Parameter param);

std::string_view kind_name(const MarginalPrior& prior);
/// F⁻¹(Φ(z)) evaluated from a standard-normal score, stable in both tails.
double quantile_from_score(const MarginalPrior& prior, double z);
double marginal_quantile(const MarginalPrior& prior, double u);
double marginal_median(const MarginalPrior& prior);
/// Location summary used for point (power) calculations: the value of a
/// point mass, the mean of a gamma prior, the median otherwise.
double marginal_centre(const MarginalPrior& prior);

/// How σ is obtained from its copula coordinate. `marginal` uses the σ
/// marginal's own quantile function; `normal` uses a normal with the same
/// mean and variance as the σ marginal.
enum class SigmaQuantile { marginal, normal };

struct IndependentJoint {
    MarginalPrior sigma;
    MarginalPrior rho;
    friend bool operator==(const IndependentJoint&, const IndependentJoint&) = default;
};

struct CopulaJointSpec {
    MarginalPrior rho;
    MarginalPrior sigma;
    double gamma_corr = 0.0;
    SigmaQuantile sigma_quantile = SigmaQuantile::marginal;

    void validate() const;
    friend bool operator==(const CopulaJointSpec&, const CopulaJointSpec&) = default;
};

struct InducedJointSpec {
    dist::GammaSpec sigma_b_sq;  // between-cluster variance
    dist::GammaSpec sigma_w_sq;  // within-cluster variance

    void validate() const;
    friend bool operator==(const InducedJointSpec&, const InducedJointSpec&) = default;
};

using JointPrior = std::variant<IndependentJoint, CopulaJointSpec, InducedJointSpec>;

struct PriorSpec {
    JointPrior joint;
    MarginalPrior nu;

    void validate() const;
    /// True when every parameter is a point mass (assurance ≡ power).
    bool is_point() const;
    friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Prior with every parameter fixed.
PriorSpec point_prior(const NuisanceParams& psi);

/// Canonical text form and its FNV-1a 64-bit hex digest.
std::string canonical_text(const PriorSpec& spec);
std::string spec_digest(const PriorSpec& spec);

/// Materialised prior draws. `weights` is empty for equally weighted Monte
/// Carlo draws; otherwise it holds one non-negative weight per draw.
struct NuisanceDrawSet {
    std::vector<NuisanceParams> draws;
    std::vector<double> weights;
    std::uint64_t seed = 0;
    std::string spec_digest;

    std::size_t size() const { return draws.size(); }
    bool weighted() const { return !weights.empty(); }
    /// Throws std::logic_error on any support violation or weight mismatch.
    void validate() const;
};

struct RhoSigma {
    double rho;
    double sigma;
};

struct VarianceComponents {
    double between;  // σ²_b
    double within;   // σ²_w
};

struct CorrelationEstimate {
    double value;
    double bootstrap_se;
};

/// Gamma with the given mean and variance: shape = m²/v, rate = m/v.
dist::GammaSpec gamma_from_mean_var(double mean, double variance);

/// Logit-normal whose median equals `median` exactly and whose 2.5% / 97.5%
/// quantiles are the least-squares fit (on the logit scale) to lo95 / hi95.
dist::LogitNormalSpec fit_icc_from_quantiles(double median, double lo95, double hi95);

std::vector<RhoSigma> sample_copula(const CopulaJointSpec& spec, std::size_t count,
                                    std::uint64_t seed);

std::vector<VarianceComponents> sample_variance_components(const InducedJointSpec& spec,
                                                           std::size_t count,
                                                           std::uint64_t seed);
std::vector<RhoSigma> sample_induced(const InducedJointSpec& spec, std::size_t count,
                                     std::uint64_t seed);

/// Pearson correlation of (ρ, σ) under the induced prior, with a bootstrap
/// standard error. Requires count >= 10⁴.
CorrelationEstimate estimate_copula_gamma(const InducedJointSpec& spec, std::size_t count,
                                          std::uint64_t seed,
                                          std::size_t bootstrap_resamples = 200);

NuisanceDrawSet sample_prior(const PriorSpec& spec, std::size_t count, std::uint64_t seed);

/// One draw per atom of a discrete prior, weighted by the atom probability.
struct DiscreteAtom {
    NuisanceParams psi;
    double weight;
};
NuisanceDrawSet stratified_draws(std::span<const DiscreteAtom> atoms);

/// Point ψ used for power calculations under this prior: σ and ν at their
/// centres, ρ at its median. For an induced joint prior the ρ median is
/// taken from a fixed-seed 10⁵-draw sample.
NuisanceParams power_point(const PriorSpec& spec);

/// Draw set with every ν replaced by `nu` (sharing the σ, ρ draws).
NuisanceDrawSet with_fixed_nu(const NuisanceDrawSet& draws, double nu);

/// Reads an ICC sample file: one value per line, blank lines and lines
/// starting with '#' ignored. Values outside [0, 1) are a load error.
dist::EmpiricalDist load_icc_samples(const std::string& path);

}  // namespace crtassure
