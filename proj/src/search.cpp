#include "crtassure/search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "crtassure/errors.hpp"

namespace crtassure {

std::string_view to_string(Method m) { return m == Method::power ? "power" : "assurance"; }

Method parse_method(std::string_view text) {
    if (text == "power") {
        return Method::power;
    }
    if (text == "assurance") {
        return Method::assurance;
    }
    throw DomainError("method must be 'power' or 'assurance', got '" + std::string(text) + "'");
}

std::string_view to_string(Direction d) {
    return d == Direction::cluster_size ? "cluster_size" : "clusters";
}

Direction parse_direction(std::string_view text) {
    if (text == "cluster_size" || text == "n_bar") {
        return Direction::cluster_size;
    }
    if (text == "clusters") {
        return Direction::clusters;
    }
    throw DomainError("direction must be 'cluster_size' or 'clusters', got '" +
                      std::string(text) + "'");
}

namespace {

NuisanceDrawSet materialise(const EvaluationSpec& spec) {
    if (spec.method == Method::power) {
        const auto point = point_prior(power_point(spec.prior));
        return sample_prior(point, 1, spec.seed);
    }
    if (spec.draws < 1) {
        throw DomainError("number of Monte Carlo draws must be >= 1");
    }
    return sample_prior(spec.prior, spec.draws, spec.seed);
}

void validate_target(double target) {
    if (!(target > 0.0 && target < 1.0)) {
        throw DomainError("target must lie in (0, 1), got " + std::to_string(target));
    }
}

SampleSizeResult base_result(const DesignEvaluator& ev, Direction direction, double target) {
    SampleSizeResult r;
    r.method = ev.spec().method;
    r.direction = direction;
    r.target = target;
    r.draws = ev.draws().size();
    r.seed = ev.spec().seed;
    r.spec_digest = ev.draws().spec_digest;
    return r;
}

// Smallest k in [1, k_max] with value(k) >= target, given value is strictly
// increasing in k and value(k_max) may or may not reach it. Returns 0 when
// k_max is not enough.
template <class Value>
int first_reaching(Value value, double target, int k_max) {
    if (value(1) >= target) {
        return 1;
    }
    int lo = 1;  // value(lo) < target
    int hi = 2;
    for (;;) {
        hi = std::min(hi, k_max);
        if (value(hi) >= target) {
            break;
        }
        if (hi == k_max) {
            return 0;
        }
        lo = hi;
        hi = hi > k_max / 2 ? k_max : 2 * hi;
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (value(mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

DesignEvaluator::DesignEvaluator(const EvaluationSpec& spec)
    : DesignEvaluator(spec, materialise(spec)) {}

DesignEvaluator::DesignEvaluator(const EvaluationSpec& spec, NuisanceDrawSet draws)
    : spec_(spec), draws_(std::move(draws)) {
    if (!(spec_.delta_m > 0.0 && std::isfinite(spec_.delta_m))) {
        throw DomainError("MCID delta must be positive, got " + std::to_string(spec_.delta_m));
    }
    spec_.test.validate();
    if (draws_.draws.empty()) {
        throw DomainError("evaluator needs a non-empty draw set");
    }
}

AssuranceEstimate DesignEvaluator::evaluate(int clusters, double n_bar) const {
    return assurance(spec_.delta_m, draws_, clusters, n_bar, spec_.test);
}

double DesignEvaluator::plateau(int clusters) const {
    return assurance_limit(spec_.delta_m, draws_, clusters, spec_.test);
}

SampleSizeResult min_cluster_size(const DesignEvaluator& evaluator, double target, int clusters,
                                  int n_max) {
    validate_target(target);
    validate_clusters(clusters);
    if (n_max < 1) {
        throw DomainError("n_max must be >= 1");
    }
    auto result = base_result(evaluator, Direction::cluster_size, target);
    result.clusters = clusters;
    result.plateau = evaluator.plateau(clusters);
    if (result.plateau < target) {
        result.feasible = false;
        return result;
    }
    const int n = first_reaching(
        [&](int k) { return evaluator.evaluate(clusters, k).value; }, target, n_max);
    if (n == 0) {
        throw SearchLimitExceeded(
            "target " + std::to_string(target) + " not reached by n_max=" + std::to_string(n_max) +
            " at C=" + std::to_string(clusters) + " although the plateau " +
            std::to_string(result.plateau) + " allows it; increase n_max");
    }
    const auto at = evaluator.evaluate(clusters, n);
    result.feasible = true;
    result.n_bar = n;
    result.n_total = static_cast<long long>(n) * clusters;
    result.achieved = at.value;
    result.achieved_stderr = at.mc_stderr;
    if (n > 1) {
        result.previous = evaluator.evaluate(clusters, n - 1).value;
    }
    return result;
}

SampleSizeResult min_cluster_size(const EvaluationSpec& spec, double target, int clusters,
                                  int n_max) {
    return min_cluster_size(DesignEvaluator(spec), target, clusters, n_max);
}

SampleSizeResult min_clusters(const DesignEvaluator& evaluator, double target, int n_bar,
                              int c_max) {
    validate_target(target);
    if (n_bar < 1) {
        throw DomainError("mean cluster size must be >= 1");
    }
    if (c_max < 2) {
        throw DomainError("C_max must be >= 2");
    }
    auto result = base_result(evaluator, Direction::clusters, target);
    result.n_bar = n_bar;
    // Power tends to one as C grows whenever δ > 0.
    result.plateau = 1.0;
    const int k = first_reaching(
        [&](int half) { return evaluator.evaluate(2 * half, n_bar).value; }, target, c_max / 2);
    if (k == 0) {
        throw SearchLimitExceeded("target " + std::to_string(target) + " not reached by C_max=" +
                                  std::to_string(c_max) + " at n_bar=" + std::to_string(n_bar) +
                                  "; increase C_max");
    }
    const int c = 2 * k;
    const auto at = evaluator.evaluate(c, n_bar);
    result.feasible = true;
    result.clusters = c;
    result.n_total = static_cast<long long>(c) * n_bar;
    result.achieved = at.value;
    result.achieved_stderr = at.mc_stderr;
    if (c > 2) {
        result.previous = evaluator.evaluate(c - 2, n_bar).value;
    }
    return result;
}

SampleSizeResult min_clusters(const EvaluationSpec& spec, double target, int n_bar, int c_max) {
    return min_clusters(DesignEvaluator(spec), target, n_bar, c_max);
}

std::vector<CurvePoint> curve(const DesignEvaluator& evaluator, int clusters,
                              const std::vector<double>& n_values) {
    if (n_values.empty()) {
        throw DomainError("curve needs at least one cluster size");
    }
    std::vector<CurvePoint> out;
    out.reserve(n_values.size());
    for (double n : n_values) {
        const auto est = evaluator.evaluate(clusters, n);
        out.push_back(CurvePoint{n, est.value, est.mc_stderr});
    }
    return out;
}

std::vector<CurvePoint> curve(const EvaluationSpec& spec, int clusters,
                              const std::vector<double>& n_values) {
    return curve(DesignEvaluator(spec), clusters, n_values);
}

std::vector<NuCurve> nu_sweep(const EvaluationSpec& spec, const std::vector<double>& nu_values,
                              int clusters, const std::vector<double>& n_values,
                              std::optional<double> target, int n_max) {
    if (nu_values.empty()) {
        throw DomainError("nu sweep needs at least one nu value");
    }
    const DesignEvaluator base(spec);
    std::vector<NuCurve> out;
    out.reserve(nu_values.size());
    for (double nu : nu_values) {
        const DesignEvaluator ev(spec, with_fixed_nu(base.draws(), nu));
        NuCurve c;
        c.nu = nu;
        c.points = curve(ev, clusters, n_values);
        if (target) {
            c.required = min_cluster_size(ev, *target, clusters, n_max);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SensitivityRow> prior_comparison(const std::vector<LabelledPrior>& scenarios,
                                             const EvaluationSpec& base, double target,
                                             const std::vector<int>& cluster_values, int n_max) {
    if (scenarios.empty()) {
        throw DomainError("prior comparison needs at least one scenario");
    }
    if (cluster_values.empty()) {
        throw DomainError("prior comparison needs at least one cluster count");
    }
    std::vector<SensitivityRow> rows;
    for (const auto& scenario : scenarios) {
        for (Method method : {Method::assurance, Method::power}) {
            EvaluationSpec spec = base;
            spec.prior = scenario.prior;
            spec.method = method;
            const DesignEvaluator ev(spec);
            for (int c : cluster_values) {
                const auto r = min_cluster_size(ev, target, c, n_max);
                rows.push_back(SensitivityRow{scenario.label, c, r.n_bar, r.n_total, method,
                                              r.feasible, r.achieved, r.plateau});
            }
        }
    }
    return rows;
}

std::vector<double> parse_range(std::string_view text) {
    auto to_double = [&](std::string_view part) {
        double v = 0.0;
        const auto* first = part.data();
        const auto* last = part.data() + part.size();
        while (first < last && *first == ' ') {
            ++first;
        }
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw DomainError("invalid number '" + std::string(part) + "' in range '" +
                              std::string(text) + "'");
        }
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        if (b == std::string_view::npos) {
            throw DomainError("range must be start:stop:step, got '" + std::string(text) + "'");
        }
        const double start = to_double(text.substr(0, a));
        const double stop = to_double(text.substr(a + 1, b - a - 1));
        const double step = to_double(text.substr(b + 1));
        if (!(step > 0.0) || stop < start) {
            throw DomainError("range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 100000) {
            throw DomainError("range has too many points");
        }
        for (long long i = 0; i < count; ++i) {
            // Snap to 12 decimals so 0:1:0.1 yields 0.3 rather than 0.30000000000000004.
            out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto part = text.substr(pos, comma == std::string_view::npos ? text.size() - pos
                                                                            : comma - pos);
        out.push_back(to_double(part));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

}  // namespace crtassure
