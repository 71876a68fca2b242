#include "crtassure/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "crtassure/digest.hpp"
#include "crtassure/errors.hpp"
#include "crtassure/random.hpp"

namespace crtassure::run {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

int require_cluster_size(const io::ScenarioDocument& doc, const char* operation) {
    if (!doc.cluster_size) {
        throw ValidationError("/design/cluster_size",
                              std::string(operation) + " needs a mean cluster size");
    }
    return *doc.cluster_size;
}

io::ResultDocument make_result(const char* operation, const io::ScenarioDocument& doc,
                               std::string digest, io::ResultPayload payload) {
    io::ResultDocument r;
    r.operation = operation;
    r.seed = doc.design.seed;
    r.draws = doc.design.draws;
    r.spec_digest = std::move(digest);
    r.payload = std::move(payload);
    return r;
}

std::vector<double> cluster_sizes_or_default(const io::ScenarioDocument& doc) {
    return doc.search.cluster_sizes.empty() ? default_cluster_sizes() : doc.search.cluster_sizes;
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

bool is_operation(std::string_view name) {
    return std::find(std::begin(kOperations), std::end(kOperations), name) != std::end(kOperations);
}

std::vector<double> default_cluster_sizes() {
    std::vector<double> out;
    for (int n = 1; n <= 50; ++n) {
        out.push_back(n);
    }
    return out;
}

std::vector<double> default_nu_values() { return parse_range("0:1:0.1"); }

io::ResultDocument run_power(const io::ScenarioDocument& doc) {
    const int n_bar = require_cluster_size(doc, "power");
    validate_clusters(doc.design.clusters);
    doc.design.test.validate();
    io::PowerResult p;
    p.psi = doc.power_psi();
    p.delta = doc.design.delta_m;
    p.clusters = doc.design.clusters;
    p.n_bar = n_bar;
    p.test = doc.design.test;
    p.value = power(p.delta, p.psi, p.clusters, p.n_bar, p.test);
    p.plateau = power_limit(p.delta, p.psi, p.clusters, p.test);
    auto r = make_result("power", doc, spec_digest(point_prior(p.psi)), p);
    r.draws = 1;
    return r;
}

io::ResultDocument run_assurance(const io::ScenarioDocument& doc) {
    const int n_bar = require_cluster_size(doc, "assurance");
    const DesignEvaluator evaluator(doc.evaluation_spec(Method::assurance));
    io::AssuranceResult a;
    a.estimate = evaluator.evaluate(doc.design.clusters, n_bar);
    a.plateau = evaluator.plateau(doc.design.clusters);
    return make_result("assurance", doc, evaluator.draws().spec_digest, a);
}

io::ResultDocument run_samplesize(const io::ScenarioDocument& doc) {
    const auto spec = doc.evaluation_spec(doc.search.mode);
    SampleSizeResult result;
    if (doc.search.direction == Direction::cluster_size) {
        result = min_cluster_size(spec, doc.search.target, doc.design.clusters, doc.search.n_max);
    } else {
        const int n_bar = require_cluster_size(doc, "a cluster-count search");
        result = min_clusters(spec, doc.search.target, n_bar, doc.search.c_max);
    }
    auto r = make_result("samplesize", doc, result.spec_digest, result);
    r.draws = result.draws;
    return r;
}

io::ResultDocument run_curve(const io::ScenarioDocument& doc) {
    const DesignEvaluator evaluator(doc.evaluation_spec(doc.search.mode));
    auto points = curve(evaluator, doc.design.clusters, cluster_sizes_or_default(doc));
    auto r = make_result("curve", doc, evaluator.draws().spec_digest, std::move(points));
    r.draws = evaluator.draws().draws.size();
    return r;
}

io::ResultDocument run_nu_sweep(const io::ScenarioDocument& doc) {
    const auto spec = doc.evaluation_spec(doc.search.mode);
    const auto nu_values = doc.nu_values.empty() ? default_nu_values() : doc.nu_values;
    auto curves = nu_sweep(spec, nu_values, doc.design.clusters, cluster_sizes_or_default(doc),
                           doc.search.target, doc.search.n_max);
    auto r = make_result("nu-sweep", doc, spec_digest(spec.prior), std::move(curves));
    if (spec.method == Method::power) {
        r.draws = 1;
    }
    return r;
}

io::ResultDocument run_compare_priors(const io::ScenarioDocument& doc) {
    std::vector<LabelledPrior> scenarios = doc.compare.scenarios;
    if (scenarios.empty()) {
        scenarios.push_back({doc.name.empty() ? "scenario" : doc.name, doc.prior});
    }
    std::vector<int> clusters = doc.compare.clusters;
    if (clusters.empty()) {
        clusters.push_back(doc.design.clusters);
    }
    auto rows = prior_comparison(scenarios, doc.evaluation_spec(Method::assurance),
                                 doc.search.target, clusters, doc.search.n_max);
    std::string text;
    for (const auto& s : scenarios) {
        text += s.label + "=" + spec_digest(s.prior) + ";";
    }
    return make_result("compare-priors", doc, digest_hex(text), std::move(rows));
}

io::ResultDocument run_validate(const io::ScenarioDocument& doc) {
    const NuisanceParams psi = doc.power_psi();
    const int clusters = doc.design.clusters;
    const WaldTest test = doc.design.test;
    int n_bar = 0;
    if (doc.cluster_size) {
        n_bar = *doc.cluster_size;
    } else {
        const auto found = min_cluster_size(doc.evaluation_spec(Method::power), doc.search.target,
                                            clusters, doc.search.n_max);
        if (!found.feasible) {
            throw InfeasibleDesign(found.plateau, found.target, clusters);
        }
        n_bar = found.n_bar;
    }

    std::vector<io::ValidationRow> rows;
    auto add = [&](const char* label, double delta, double nu, std::uint64_t stream) {
        NuisanceParams p = psi;
        p.nu = nu;
        const auto config = trial_config_from_psi(delta, p, clusters, n_bar, test, doc.reps,
                                                  derive_seed(doc.design.seed, stream));
        io::ValidationRow row;
        row.label = label;
        row.delta = delta;
        row.nu = nu;
        row.empirical = empirical_power(config);
        if (delta == 0.0) {
            // Under the null the reference is the nominal size, both tails.
            row.empirical.formula = test.alpha;
            row.tolerance = 3.0 * std::sqrt(test.alpha * (1.0 - test.alpha) /
                                            static_cast<double>(doc.reps));
        } else {
            row.tolerance = nu == 0.0 ? 0.02 : 0.03;
        }
        row.passed = std::abs(row.empirical.rate - row.empirical.formula) <= row.tolerance;
        rows.push_back(std::move(row));
    };
    add("null", 0.0, 0.0, 0);
    add("equal_sizes", doc.design.delta_m, 0.0, 1);
    if (psi.nu > 0.0) {
        add("unequal_sizes", doc.design.delta_m, psi.nu, 2);
    }
    auto r = make_result("validate", doc, spec_digest(point_prior(psi)), std::move(rows));
    r.draws = doc.reps;
    return r;
}

io::ResultDocument run_operation(std::string_view operation, const io::ScenarioDocument& doc) {
    if (operation == "power") return run_power(doc);
    if (operation == "assurance") return run_assurance(doc);
    if (operation == "samplesize") return run_samplesize(doc);
    if (operation == "curve") return run_curve(doc);
    if (operation == "nu-sweep") return run_nu_sweep(doc);
    if (operation == "compare-priors") return run_compare_priors(doc);
    if (operation == "validate") return run_validate(doc);
    throw DomainError("unknown operation '" + std::string(operation) + "'");
}

bool is_infeasible(const io::ResultDocument& result) {
    if (const auto* s = std::get_if<SampleSizeResult>(&result.payload)) {
        return !s->feasible;
    }
    return false;
}

std::string describe(const io::ResultDocument& result) {
    std::ostringstream out;
    std::visit(
        overloaded{
            [&](const io::PowerResult& p) {
                out << "power " << num(p.value, 6) << "  (C=" << p.clusters
                    << ", n_bar=" << p.n_bar << ", sigma=" << p.psi.sigma << ", rho=" << p.psi.rho
                    << ", nu=" << p.psi.nu << ")\n"
                    << "plateau " << num(p.plateau, 6) << '\n';
            },
            [&](const io::AssuranceResult& a) {
                out << "assurance " << num(a.estimate.value, 6) << " +/- "
                    << num(a.estimate.mc_stderr, 6) << "  (C=" << a.estimate.clusters
                    << ", n_bar=" << a.estimate.n_bar << ")\n"
                    << "plateau " << num(a.plateau, 6) << '\n';
            },
            [&](const SampleSizeResult& s) {
                out << to_string(s.method) << " search, target " << s.target << '\n';
                if (s.feasible) {
                    out << "n_bar " << s.n_bar << "  C " << s.clusters << "  N " << s.n_total << '\n'
                        << "achieved " << num(s.achieved, 6);
                    if (s.method == Method::assurance) {
                        out << " +/- " << num(s.achieved_stderr, 6);
                    }
                    out << '\n';
                    if (s.previous) {
                        out << "previous " << num(*s.previous, 6) << '\n';
                    }
                } else {
                    out << "infeasible: plateau " << num(s.plateau, 6) << " is below the target at C="
                        << s.clusters << "; increase the number of clusters\n";
                }
            },
            [&](const std::vector<CurvePoint>& points) {
                out << "n_bar,value,mc_stderr\n";
                for (const auto& p : points) {
                    out << p.n_bar << ',' << num(p.value, 6) << ',' << num(p.mc_stderr, 6) << '\n';
                }
            },
            [&](const std::vector<NuCurve>& curves) {
                out << "nu  required_n_bar  value_at_first_n  value_at_last_n\n";
                for (const auto& c : curves) {
                    out << num(c.nu, 2) << "  ";
                    if (c.required && c.required->feasible) {
                        out << c.required->n_bar;
                    } else {
                        out << "NA";
                    }
                    if (!c.points.empty()) {
                        out << "  " << num(c.points.front().value, 4) << "  "
                            << num(c.points.back().value, 4);
                    }
                    out << '\n';
                }
            },
            [&](const std::vector<SensitivityRow>& rows) {
                out << "scenario  C  method  n_bar  N\n";
                for (const auto& r : rows) {
                    out << r.scenario_label << "  " << r.clusters << "  " << to_string(r.method)
                        << "  ";
                    if (r.feasible) {
                        out << r.n_bar << "  " << r.n_total;
                    } else {
                        out << "NA  NA (plateau " << num(r.plateau, 4) << ")";
                    }
                    out << '\n';
                }
            },
            [&](const std::vector<io::ValidationRow>& rows) {
                out << "label  nu  empirical  se  formula  |diff|  tolerance  result\n";
                for (const auto& r : rows) {
                    out << r.label << "  " << num(r.nu, 2) << "  " << num(r.empirical.rate) << "  "
                        << num(r.empirical.binomial_se) << "  " << num(r.empirical.formula) << "  "
                        << num(std::abs(r.empirical.rate - r.empirical.formula)) << "  "
                        << num(r.tolerance) << "  " << (r.passed ? "ok" : "FAIL") << '\n';
                }
            },
        },
        result.payload);
    out << "seed " << result.seed << "  S " << result.draws << "  digest " << result.spec_digest
        << '\n';
    return out.str();
}

}  // namespace crtassure::run
