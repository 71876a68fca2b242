#pragma once

// Scenario-driven operations shared by the CLI, the HTTP service and the
// Python module. Each takes a validated ScenarioDocument and returns a
// ResultDocument; none touches global state.

#include <string_view>
#include <vector>

#include "crtassure/io.hpp"

namespace crtassure::run {

inline constexpr std::string_view kOperations[] = {
    "power", "assurance", "samplesize", "curve", "nu-sweep", "compare-priors", "validate"};

bool is_operation(std::string_view name);

/// Default n̄ grid for curves and sweeps when the scenario gives none.
std::vector<double> default_cluster_sizes();
/// Default ν grid: 0, 0.1, ..., 1.
std::vector<double> default_nu_values();

io::ResultDocument run_power(const io::ScenarioDocument& doc);
io::ResultDocument run_assurance(const io::ScenarioDocument& doc);
/// Infeasible designs come back as a result with feasible = false.
io::ResultDocument run_samplesize(const io::ScenarioDocument& doc);
io::ResultDocument run_curve(const io::ScenarioDocument& doc);
io::ResultDocument run_nu_sweep(const io::ScenarioDocument& doc);
io::ResultDocument run_compare_priors(const io::ScenarioDocument& doc);
/// Simulator check at the power point: a null row, an equal-size row and,
/// when ν > 0, an unequal-size row.
io::ResultDocument run_validate(const io::ScenarioDocument& doc);

io::ResultDocument run_operation(std::string_view operation, const io::ScenarioDocument& doc);

/// Plain-text summary for terminals.
std::string describe(const io::ResultDocument& result);

/// True when the result is a sample-size search that found no design.
bool is_infeasible(const io::ResultDocument& result);

}  // namespace crtassure::run
