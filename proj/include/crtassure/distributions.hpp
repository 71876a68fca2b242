#pragma once

// Probability toolkit for the prior machinery: gamma (shape-rate),
// standard normal, logit-normal and empirical-sample distributions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crtassure/random.hpp"

namespace crtassure::dist {

double standard_normal_cdf(double x);
/// Inverse of standard_normal_cdf on (0, 1). Throws DomainError at 0 or 1.
double standard_normal_quantile(double u);

/// Gamma distribution in the shape-rate parameterisation:
/// density ∝ x^(shape-1) exp(-rate x), mean shape/rate, variance shape/rate².
struct GammaSpec {
    double shape = 1.0;
    double rate = 1.0;

    /// Throws DomainError unless shape > 0 and rate > 0 (and both finite).
    void validate() const;
    double mean() const { return shape / rate; }
    double variance() const { return shape / (rate * rate); }
    double median() const;

    friend bool operator==(const GammaSpec&, const GammaSpec&) = default;
};

double gamma_pdf(const GammaSpec& spec, double x);
double gamma_cdf(const GammaSpec& spec, double x);
/// Upper-tail probability 1 - CDF(x), computed without cancellation.
double gamma_survival(const GammaSpec& spec, double x);

/// x with CDF(x) = u, for u in (0, 1).
double gamma_quantile(const GammaSpec& spec, double u);
/// x with survival(x) = q, for q in (0, 1). Accurate in the far upper tail
/// where 1 - q rounds to 1.
double gamma_quantile_upper(const GammaSpec& spec, double q);

/// One gamma variate (Marsaglia-Tsang; shape < 1 via the u^(1/shape) boost).
double gamma_draw(const GammaSpec& spec, RandomStream& rng);
std::vector<double> gamma_sample(const GammaSpec& spec, std::size_t n, std::uint64_t seed);

/// Logit-normal: logit(X) ~ N(mu, sigma_logit²). Support (0, 1).
struct LogitNormalSpec {
    double mu = 0.0;
    double sigma_logit = 1.0;

    void validate() const;
    double median() const;
    double cdf(double x) const;
    double quantile(double u) const;
    /// Quantile evaluated from a standard-normal score z, i.e. quantile(Φ(z)),
    /// without passing through the probability scale.
    double from_score(double z) const;

    friend bool operator==(const LogitNormalSpec&, const LogitNormalSpec&) = default;
};

double logit(double p);
double inverse_logit(double x);

/// Empirical distribution over a non-empty sample, kept sorted ascending.
class EmpiricalDist {
public:
    explicit EmpiricalDist(std::vector<double> samples);

    /// Type-1 (inverse of the empirical CDF) quantile: the sample at 1-based
    /// index ceil(u * size), clamped to [1, size]. u must lie in [0, 1].
    double quantile(double u) const;
    /// Fraction of samples <= x.
    double cdf(double x) const;
    double median() const { return quantile(0.5); }

    std::span<const double> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

    friend bool operator==(const EmpiricalDist&, const EmpiricalDist&) = default;

private:
    std::vector<double> samples_;
};

}  // namespace crtassure::dist
