#include "crtassure/assurance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crtassure/errors.hpp"
#include "crtassure/stats.hpp"

namespace crtassure {

namespace {

void validate_inputs(double delta_m, const NuisanceDrawSet& draws, int clusters,
                     const WaldTest& test) {
    if (draws.draws.empty()) {
        throw DomainError("assurance needs a non-empty draw set");
    }
    if (!std::isfinite(delta_m)) {
        throw DomainError("delta must be finite");
    }
    validate_clusters(clusters);
    test.validate();
}

// Mean and standard error of per-draw values, equal or normalised weights.
std::pair<double, double> weighted_mean_se(const NuisanceDrawSet& draws,
                                           const std::vector<double>& values) {
    const std::size_t s = values.size();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) {
        // Degenerate prior: return the common value exactly.
        return {*lo, 0.0};
    }
    if (!draws.weighted()) {
        const double m = stats::mean(values);
        return {m, stats::sample_sd(values) / std::sqrt(static_cast<double>(s))};
    }
    const double total = stats::compensated_sum(draws.weights);
    std::vector<double> terms(s);
    for (std::size_t i = 0; i < s; ++i) {
        terms[i] = draws.weights[i] / total * values[i];
    }
    const double m = stats::compensated_sum(terms);
    if (s < 2) {
        return {m, 0.0};
    }
    for (std::size_t i = 0; i < s; ++i) {
        const double w = draws.weights[i] / total;
        terms[i] = w * w * (values[i] - m) * (values[i] - m);
    }
    const double scale = static_cast<double>(s) / static_cast<double>(s - 1);
    return {m, std::sqrt(stats::compensated_sum(terms) * scale)};
}

}  // namespace

std::vector<double> per_draw_power(double delta_m, const NuisanceDrawSet& draws, int clusters,
                                   double n_bar, const WaldTest& test) {
    validate_inputs(delta_m, draws, clusters, test);
    if (!(n_bar >= 1.0 && std::isfinite(n_bar))) {
        throw DomainError("mean cluster size must be >= 1, got " + std::to_string(n_bar));
    }
    const double critical = test.critical_value();
    const double c = static_cast<double>(clusters);
    std::vector<double> out(draws.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = detail::power_kernel(delta_m, draws.draws[i], c, n_bar, critical);
    }
    return out;
}

AssuranceEstimate assurance(double delta_m, const NuisanceDrawSet& draws, int clusters,
                            double n_bar, const WaldTest& test) {
    const auto powers = per_draw_power(delta_m, draws, clusters, n_bar, test);
    const auto [value, se] = weighted_mean_se(draws, powers);
    return AssuranceEstimate{value, se, draws.size(), n_bar, clusters};
}

double assurance_limit(double delta_m, const NuisanceDrawSet& draws, int clusters,
                       const WaldTest& test) {
    validate_inputs(delta_m, draws, clusters, test);
    const double critical = test.critical_value();
    const double c = static_cast<double>(clusters);
    std::vector<double> limits(draws.size());
    for (std::size_t i = 0; i < limits.size(); ++i) {
        limits[i] = detail::power_limit_kernel(delta_m, draws.draws[i], c, critical);
    }
    return weighted_mean_se(draws, limits).first;
}

}  // namespace crtassure
