#include "crtassure/trialsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crtassure/distributions.hpp"
#include "crtassure/errors.hpp"
#include "crtassure/random.hpp"
#include "crtassure/stats.hpp"

namespace crtassure {

namespace {
constexpr int kMaxSizeRedraws = 100;
constexpr double kSizeTolerance = 0.05;
}  // namespace

void TrialSimConfig::validate() const {
    if (!std::isfinite(delta_true) || !std::isfinite(intercept)) {
        throw DomainError("trial simulation: delta and intercept must be finite");
    }
    if (!(sigma_b_sq >= 0.0 && std::isfinite(sigma_b_sq)) ||
        !(sigma_w_sq > 0.0 && std::isfinite(sigma_w_sq))) {
        throw DomainError("trial simulation: need sigma_b_sq >= 0 and sigma_w_sq > 0");
    }
    validate_clusters(clusters);
    if (n_bar < 1) {
        throw DomainError("trial simulation: mean cluster size must be >= 1");
    }
    if (!(nu >= 0.0 && std::isfinite(nu))) {
        throw DomainError("trial simulation: nu must be >= 0");
    }
    test.validate();
}

NuisanceParams TrialSimConfig::psi() const {
    return NuisanceParams{std::sqrt(sigma_b_sq + sigma_w_sq), rho(), nu};
}

TrialSimConfig trial_config_from_psi(double delta, const NuisanceParams& psi, int clusters,
                                     int n_bar, const WaldTest& test, std::size_t reps,
                                     std::uint64_t seed) {
    psi.validate();
    TrialSimConfig c;
    c.delta_true = delta;
    const double total = psi.sigma * psi.sigma;
    c.sigma_b_sq = psi.rho * total;
    c.sigma_w_sq = (1.0 - psi.rho) * total;
    c.clusters = clusters;
    c.n_bar = n_bar;
    c.nu = psi.nu;
    c.test = test;
    c.reps = reps;
    c.seed = seed;
    return c;
}

std::vector<int> draw_cluster_sizes(int n_bar, double nu, int clusters, std::uint64_t seed) {
    if (n_bar < 1 || clusters < 1 || !(nu >= 0.0 && std::isfinite(nu))) {
        throw DomainError("draw_cluster_sizes: need n_bar >= 1, clusters >= 1, nu >= 0");
    }
    if (nu == 0.0) {
        return std::vector<int>(static_cast<std::size_t>(clusters), n_bar);
    }
    const double shape = 1.0 / (nu * nu);
    const dist::GammaSpec size_law{shape, shape / static_cast<double>(n_bar)};
    RandomStream rng(seed);
    std::vector<int> sizes(static_cast<std::size_t>(clusters));
    std::vector<double> as_double(sizes.size());
    for (int attempt = 0; attempt < kMaxSizeRedraws; ++attempt) {
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            const double x = std::round(dist::gamma_draw(size_law, rng));
            sizes[j] = std::max(1, static_cast<int>(std::min(x, 1e9)));
            as_double[j] = sizes[j];
        }
        if (clusters < 40) {
            return sizes;
        }
        const double m = stats::mean(as_double);
        const double cv = stats::sample_sd(as_double) / m;
        if (std::abs(m - n_bar) <= kSizeTolerance * n_bar && std::abs(cv - nu) <= kSizeTolerance * nu) {
            return sizes;
        }
    }
    throw DomainError("draw_cluster_sizes: could not realise mean " + std::to_string(n_bar) +
                      " and CV " + std::to_string(nu) + " within 5% after " +
                      std::to_string(kMaxSizeRedraws) + " draws");
}

double simulate_z(const TrialSimConfig& config, std::span<const int> cluster_sizes,
                  std::uint64_t seed) {
    if (cluster_sizes.size() != static_cast<std::size_t>(config.clusters)) {
        throw DomainError("simulate_z: one size per cluster required");
    }
    RandomStream rng(seed);
    const double sd_b = std::sqrt(config.sigma_b_sq);
    const double sd_w = std::sqrt(config.sigma_w_sq);
    const int half = config.clusters / 2;
    double sum[2] = {0.0, 0.0};
    long long count[2] = {0, 0};
    for (int j = 0; j < config.clusters; ++j) {
        const int arm = j < half ? 0 : 1;
        const double cluster_mean =
            config.intercept + (arm == 1 ? config.delta_true : 0.0) + sd_b * rng.normal();
        for (int i = 0; i < cluster_sizes[static_cast<std::size_t>(j)]; ++i) {
            sum[arm] += cluster_mean + sd_w * rng.normal();
        }
        count[arm] += cluster_sizes[static_cast<std::size_t>(j)];
    }
    const double delta_hat = sum[1] / static_cast<double>(count[1]) -
                             sum[0] / static_cast<double>(count[0]);
    const double var = wald_variance(config.psi(), config.clusters, config.n_bar);
    return delta_hat / std::sqrt(var);
}

EmpiricalPower empirical_power(const TrialSimConfig& config) {
    config.validate();
    if (config.reps < 100) {
        throw DomainError("empirical_power needs at least 100 replicates");
    }
    const double critical = config.test.critical_value();
    std::size_t rejections = 0;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(config.seed, rep);
        const auto sizes =
            draw_cluster_sizes(config.n_bar, config.nu, config.clusters, derive_seed(rep_seed, 0));
        const double z = simulate_z(config, sizes, derive_seed(rep_seed, 1));
        const bool reject =
            config.test.sided == Sidedness::two ? std::abs(z) > critical : z > critical;
        rejections += reject ? 1 : 0;
    }
    EmpiricalPower out;
    out.reps = config.reps;
    out.rate = static_cast<double>(rejections) / static_cast<double>(config.reps);
    out.binomial_se = std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(config.reps));
    out.formula = power(config.delta_true, config.psi(), config.clusters, config.n_bar, config.test);
    return out;
}

}  // namespace crtassure
