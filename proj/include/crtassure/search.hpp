#pragma once

// Minimal-design searches, power/assurance curves and sensitivity sweeps.
//
// Every search materialises one draw set and evaluates all candidate designs
// against it, so the estimated assurance is strictly increasing in n̄ and in
// C and integer bisection is exact.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crtassure/assurance.hpp"
#include "crtassure/power.hpp"
#include "crtassure/priors.hpp"

namespace crtassure {

enum class Method { power, assurance };
std::string_view to_string(Method m);
Method parse_method(std::string_view text);

enum class Direction { cluster_size, clusters };
std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

/// Everything needed to evaluate a design: effect, test, prior and Monte
/// Carlo settings. In power mode the prior is collapsed to power_point().
struct EvaluationSpec {
    double delta_m = 0.0;
    WaldTest test;
    Method method = Method::assurance;
    PriorSpec prior;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
};

/// Evaluates power or assurance for (C, n̄) against one fixed draw set.
class DesignEvaluator {
public:
    explicit DesignEvaluator(const EvaluationSpec& spec);
    /// Reuses an existing draw set (nu sweeps share σ, ρ draws this way).
    DesignEvaluator(const EvaluationSpec& spec, NuisanceDrawSet draws);

    AssuranceEstimate evaluate(int clusters, double n_bar) const;
    double plateau(int clusters) const;

    const NuisanceDrawSet& draws() const { return draws_; }
    const EvaluationSpec& spec() const { return spec_; }

private:
    EvaluationSpec spec_;
    NuisanceDrawSet draws_;
};

struct SampleSizeResult {
    Method method = Method::power;
    Direction direction = Direction::cluster_size;
    int n_bar = 0;
    int clusters = 0;
    long long n_total = 0;
    double target = 0.0;
    bool feasible = false;
    double achieved = 0.0;
    double achieved_stderr = 0.0;
    /// Value one step below the solution (n̄ − 1 or C − 2); absent when the
    /// solution is the smallest admissible design.
    std::optional<double> previous;
    double plateau = 0.0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    std::string spec_digest;

    friend bool operator==(const SampleSizeResult&, const SampleSizeResult&) = default;
};

struct CurvePoint {
    double n_bar = 1.0;
    double value = 0.0;
    double mc_stderr = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct NuCurve {
    double nu = 0.0;
    std::vector<CurvePoint> points;
    /// Minimal n̄ at the sweep target, when one was requested.
    std::optional<SampleSizeResult> required;

    friend bool operator==(const NuCurve&, const NuCurve&) = default;
};

struct LabelledPrior {
    std::string label;
    PriorSpec prior;

    friend bool operator==(const LabelledPrior&, const LabelledPrior&) = default;
};

struct SensitivityRow {
    std::string scenario_label;
    int clusters = 0;
    int n_bar = 0;
    long long n_total = 0;
    Method method = Method::power;
    bool feasible = true;
    double achieved = 0.0;
    double plateau = 0.0;

    friend bool operator==(const SensitivityRow&, const SensitivityRow&) = default;
};

/// Smallest integer n̄ in [1, n_max] reaching `target` at C clusters. An
/// infeasible result (plateau < target) is returned, not thrown; throws
/// SearchLimitExceeded when the plateau allows the target but n_max does not.
SampleSizeResult min_cluster_size(const DesignEvaluator& evaluator, double target, int clusters,
                                  int n_max = 10000);
SampleSizeResult min_cluster_size(const EvaluationSpec& spec, double target, int clusters,
                                  int n_max = 10000);

/// Smallest even C in [2, c_max] reaching `target` at mean cluster size n̄.
SampleSizeResult min_clusters(const DesignEvaluator& evaluator, double target, int n_bar,
                              int c_max = 10000);
SampleSizeResult min_clusters(const EvaluationSpec& spec, double target, int n_bar,
                              int c_max = 10000);

std::vector<CurvePoint> curve(const EvaluationSpec& spec, int clusters,
                              const std::vector<double>& n_values);
std::vector<CurvePoint> curve(const DesignEvaluator& evaluator, int clusters,
                              const std::vector<double>& n_values);

/// One curve per ν, all sharing the (σ, ρ) draws of spec.prior.
std::vector<NuCurve> nu_sweep(const EvaluationSpec& spec, const std::vector<double>& nu_values,
                              int clusters, const std::vector<double>& n_values,
                              std::optional<double> target = std::nullopt, int n_max = 10000);

/// Table of minimal n̄ per scenario × C, in power mode (at each prior's
/// power_point) and assurance mode. `base` supplies δ_M, the test, S and the
/// seed; its prior and method are ignored.
std::vector<SensitivityRow> prior_comparison(const std::vector<LabelledPrior>& scenarios,
                                             const EvaluationSpec& base, double target,
                                             const std::vector<int>& cluster_values,
                                             int n_max = 10000);

/// Parses "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_range(std::string_view text);

}  // namespace crtassure
