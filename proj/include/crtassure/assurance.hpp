#pragma once

// Monte Carlo assurance: the Wald-test power at the MCID averaged over a
// materialised set of prior draws for ψ. Evaluating every design against the
// same draw set (common random numbers) makes the estimate strictly
// monotone in n̄, which the searches rely on.

#include <cstddef>
#include <vector>

#include "crtassure/power.hpp"
#include "crtassure/priors.hpp"

namespace crtassure {

struct AssuranceEstimate {
    double value = 0.0;
    /// Standard deviation of the per-draw powers over sqrt(S).
    double mc_stderr = 0.0;
    std::size_t draws = 0;
    double n_bar = 0.0;
    int clusters = 0;

    friend bool operator==(const AssuranceEstimate&, const AssuranceEstimate&) = default;
};

AssuranceEstimate assurance(double delta_m, const NuisanceDrawSet& draws, int clusters,
                            double n_bar, const WaldTest& test);

/// Mean over draws of the per-draw power plateau; an upper bound on
/// assurance at every n̄ for this C.
double assurance_limit(double delta_m, const NuisanceDrawSet& draws, int clusters,
                       const WaldTest& test);

/// Per-draw powers in draw order (exposed for diagnostics and tests).
std::vector<double> per_draw_power(double delta_m, const NuisanceDrawSet& draws, int clusters,
                                   double n_bar, const WaldTest& test);

}  // namespace crtassure
