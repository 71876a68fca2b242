#pragma once

// Small descriptive-statistics helpers shared by the prior diagnostics and
// the test suites.

#include <functional>
#include <span>
#include <vector>

namespace crtassure::stats {

/// Neumaier-compensated sum; result is independent of platform FMA use.
double compensated_sum(std::span<const double> values);
double mean(std::span<const double> values);
/// Sample standard deviation (n − 1 denominator); 0 for a single value.
double sample_sd(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);
/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> ranks(std::span<const double> values);
double spearman(std::span<const double> x, std::span<const double> y);
/// Kolmogorov–Smirnov distance sup |F_n(x) − F(x)| against a continuous CDF.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

}  // namespace crtassure::stats
