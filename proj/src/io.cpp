#include "crtassure/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "crtassure/digest.hpp"
#include "crtassure/errors.hpp"

namespace crtassure::io {

namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// ---------------------------------------------------------------------------
// YAML -> JSON

json scalar_to_json(const YAML::Node& node) {
    const std::string& text = node.Scalar();
    if (node.Tag() == "!") {
        return text;  // quoted scalar
    }
    if (text == "null" || text == "~" || text.empty()) {
        return nullptr;
    }
    if (text == "true" || text == "True") {
        return true;
    }
    if (text == "false" || text == "False") {
        return false;
    }
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') {
        ++first;
    }
    std::int64_t i = 0;
    if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) {
        return i;
    }
    double d = 0.0;
    if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) {
        return d;
    }
    return text;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Scalar:
            return scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (const auto& item : node) {
                out.push_back(yaml_to_json(item));
            }
            return out;
        }
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& kv : node) {
                const auto key = kv.first.as<std::string>();
                if (out.contains(key)) {
                    const auto mark = kv.first.Mark();
                    throw ParseError("<scenario>", mark.line + 1, mark.column + 1,
                                     "duplicate key '" + key + "'");
                }
                out[key] = yaml_to_json(kv.second);
            }
            return out;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Validation helpers

std::string child(const std::string& path, std::string_view key) {
    return path + "/" + std::string(key);
}

std::string child(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

/// Reads the members of one JSON object, rejecting unknown keys on finish().
class ObjectReader {
public:
    ObjectReader(const json& value, std::string path) : value_(value), path_(std::move(path)) {
        if (!value_.is_object()) {
            throw ValidationError(path_.empty() ? "/" : path_, "expected an object");
        }
    }

    bool has(std::string_view key) const { return value_.contains(std::string(key)); }

    const json* find(std::string_view key) {
        const auto it = value_.find(std::string(key));
        if (it == value_.end()) {
            return nullptr;
        }
        used_.insert(std::string(key));
        return &*it;
    }

    const json& require(std::string_view key) {
        const json* v = find(key);
        if (v == nullptr) {
            throw ValidationError(child(path_, key), "required field is missing");
        }
        return *v;
    }

    std::string path(std::string_view key) const { return child(path_, key); }
    const std::string& path() const { return path_; }

    void finish() const {
        for (const auto& [key, _] : value_.items()) {
            if (!used_.contains(key)) {
                throw ValidationError(child(path_, key), "unknown key");
            }
        }
    }

private:
    const json& value_;
    std::string path_;
    std::set<std::string> used_;
};

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ValidationError(path, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ValidationError(path, "expected a finite number");
    }
    return d;
}

std::int64_t as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
            return static_cast<std::int64_t>(d);
        }
    }
    throw ValidationError(path, "expected an integer");
}

std::uint64_t as_seed(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    const auto i = as_integer(v, path);
    if (i < 0) {
        throw ValidationError(path, "seed must be non-negative");
    }
    return static_cast<std::uint64_t>(i);
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw ValidationError(path, "expected a string");
    }
    return v.get<std::string>();
}

double number_in(const json& v, const std::string& path, double lo, double hi, bool lo_open,
                 bool hi_open, const char* support) {
    const double d = as_number(v, path);
    const bool ok_lo = lo_open ? d > lo : d >= lo;
    const bool ok_hi = hi_open ? d < hi : d <= hi;
    if (!ok_lo || !ok_hi) {
        std::ostringstream msg;
        msg << "value " << d << " outside the support " << support;
        throw ValidationError(path, msg.str());
    }
    return d;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Fn>
auto rethrow_as_validation(const std::string& path, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DomainError& e) {
        throw ValidationError(path, e.what());
    }
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (v.is_string()) {
        return rethrow_as_validation(path, [&] { return parse_range(v.get<std::string>()); });
    }
    if (!v.is_array() || v.empty()) {
        throw ValidationError(path, "expected a non-empty list of numbers or a start:stop:step range");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_number(v[i], child(path, i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Priors

dist::GammaSpec gamma_from_json(const json& v, const std::string& path) {
    ObjectReader r(v, path);
    dist::GammaSpec g;
    if (r.has("mean") || r.has("variance")) {
        const double m = number_in(r.require("mean"), r.path("mean"), 0, kInf, true, true, "(0, inf)");
        const double var =
            number_in(r.require("variance"), r.path("variance"), 0, kInf, true, true, "(0, inf)");
        g = gamma_from_mean_var(m, var);
    } else {
        g.shape = number_in(r.require("shape"), r.path("shape"), 0, kInf, true, true, "(0, inf)");
        g.rate = number_in(r.require("rate"), r.path("rate"), 0, kInf, true, true, "(0, inf)");
    }
    r.finish();
    return g;
}

dist::LogitNormalSpec logit_normal_from_json(const json& v, const std::string& path) {
    ObjectReader r(v, path);
    dist::LogitNormalSpec spec;
    if (r.has("median")) {
        const double med = number_in(r.require("median"), r.path("median"), 0, 1, true, true, "(0, 1)");
        const double lo = number_in(r.require("lo95"), r.path("lo95"), 0, 1, true, true, "(0, 1)");
        const double hi = number_in(r.require("hi95"), r.path("hi95"), 0, 1, true, true, "(0, 1)");
        spec = rethrow_as_validation(path, [&] { return fit_icc_from_quantiles(med, lo, hi); });
        if (const json* scale = r.find("spread_scale")) {
            spec.sigma_logit *= number_in(*scale, r.path("spread_scale"), 0, kInf, true, true, "(0, inf)");
        }
    } else {
        spec.mu = as_number(r.require("mu"), r.path("mu"));
        spec.sigma_logit =
            number_in(r.require("sigma_logit"), r.path("sigma_logit"), 0, kInf, true, true, "(0, inf)");
    }
    r.finish();
    return spec;
}

const char* support_text(Parameter p) {
    switch (p) {
        case Parameter::sigma:
            return "(0, inf)";
        case Parameter::rho:
            return "[0, 1)";
        case Parameter::nu:
            return "[0, inf)";
    }
    return "";
}

double check_support(const json& v, const std::string& path, Parameter p) {
    switch (p) {
        case Parameter::sigma:
            return number_in(v, path, 0, kInf, true, true, support_text(p));
        case Parameter::rho:
            return number_in(v, path, 0, 1, false, true, support_text(p));
        case Parameter::nu:
            return number_in(v, path, 0, kInf, false, true, support_text(p));
    }
    return 0.0;
}

MarginalPrior marginal_from_json(const json& v, const std::string& path, Parameter param,
                                 const std::string& base_dir) {
    if (v.is_number()) {
        return PointMass{check_support(v, path, param)};
    }
    ObjectReader r(v, path);
    std::vector<std::string> present;
    for (const char* key : {"point", "gamma", "logit_normal", "samples", "samples_file"}) {
        if (r.has(key)) {
            present.emplace_back(key);
        }
    }
    if (present.size() != 1) {
        throw ValidationError(path, "expected exactly one of point, gamma, logit_normal, samples, "
                                    "samples_file");
    }
    const std::string& kind = present.front();
    MarginalPrior prior;
    if (kind == "point") {
        prior = PointMass{check_support(r.require("point"), r.path("point"), param)};
    } else if (kind == "gamma") {
        prior = gamma_from_json(r.require("gamma"), r.path("gamma"));
    } else if (kind == "logit_normal") {
        prior = logit_normal_from_json(r.require("logit_normal"), r.path("logit_normal"));
    } else if (kind == "samples") {
        const json& list = r.require("samples");
        const auto sp = r.path("samples");
        if (!list.is_array() || list.empty()) {
            throw ValidationError(sp, "expected a non-empty list of numbers");
        }
        std::vector<double> values;
        for (std::size_t i = 0; i < list.size(); ++i) {
            values.push_back(check_support(list[i], child(sp, i), param));
        }
        prior = dist::EmpiricalDist(std::move(values));
    } else {
        const auto sp = r.path("samples_file");
        if (param != Parameter::rho) {
            throw ValidationError(sp, "sample files are only supported for rho");
        }
        fs::path file = as_string(r.require("samples_file"), sp);
        if (file.is_relative()) {
            file = fs::path(base_dir) / file;
        }
        try {
            prior = load_icc_samples(file.string());
        } catch (const ParseError& e) {
            throw ValidationError(sp, e.what());
        }
    }
    r.finish();
    rethrow_as_validation(path, [&] { validate_marginal(prior, param); });
    return prior;
}

json marginal_to_json(const MarginalPrior& prior) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return json{{"point", p.value}}; },
                          [](const dist::GammaSpec& g) {
                              return json{{"gamma", {{"shape", g.shape}, {"rate", g.rate}}}};
                          },
                          [](const dist::EmpiricalDist& e) {
                              json list = json::array();
                              for (double x : e.samples()) {
                                  list.push_back(x);
                              }
                              return json{{"samples", list}};
                          },
                          [](const dist::LogitNormalSpec& l) {
                              return json{{"logit_normal",
                                           {{"mu", l.mu}, {"sigma_logit", l.sigma_logit}}}};
                          },
                      },
                      prior);
}

// ---------------------------------------------------------------------------
// Result helpers

json psi_to_json(const NuisanceParams& psi) {
    return json{{"sigma", psi.sigma}, {"rho", psi.rho}, {"nu", psi.nu}};
}

NuisanceParams psi_from_json(const json& v) {
    return NuisanceParams{v.at("sigma").get<double>(), v.at("rho").get<double>(),
                          v.at("nu").get<double>()};
}

json sample_size_to_json(const SampleSizeResult& r) {
    json out{{"method", to_string(r.method)},
             {"direction", to_string(r.direction)},
             {"n_bar", r.n_bar},
             {"clusters", r.clusters},
             {"n_total", r.n_total},
             {"target", r.target},
             {"feasible", r.feasible},
             {"achieved", r.achieved},
             {"achieved_stderr", r.achieved_stderr},
             {"previous", r.previous ? json(*r.previous) : json(nullptr)},
             {"plateau", r.plateau},
             {"draws", r.draws},
             {"seed", r.seed},
             {"spec_digest", r.spec_digest}};
    return out;
}

SampleSizeResult sample_size_from_json(const json& v) {
    SampleSizeResult r;
    r.method = parse_method(v.at("method").get<std::string>());
    r.direction = parse_direction(v.at("direction").get<std::string>());
    r.n_bar = v.at("n_bar").get<int>();
    r.clusters = v.at("clusters").get<int>();
    r.n_total = v.at("n_total").get<long long>();
    r.target = v.at("target").get<double>();
    r.feasible = v.at("feasible").get<bool>();
    r.achieved = v.at("achieved").get<double>();
    r.achieved_stderr = v.at("achieved_stderr").get<double>();
    if (!v.at("previous").is_null()) {
        r.previous = v.at("previous").get<double>();
    }
    r.plateau = v.at("plateau").get<double>();
    r.draws = v.at("draws").get<std::size_t>();
    r.seed = v.at("seed").get<std::uint64_t>();
    r.spec_digest = v.at("spec_digest").get<std::string>();
    return r;
}

json curve_to_json(const std::vector<CurvePoint>& points) {
    json out = json::array();
    for (const auto& p : points) {
        out.push_back({{"n_bar", p.n_bar}, {"value", p.value}, {"mc_stderr", p.mc_stderr}});
    }
    return out;
}

std::vector<CurvePoint> curve_from_json(const json& v) {
    std::vector<CurvePoint> out;
    for (const auto& p : v) {
        out.push_back(CurvePoint{p.at("n_bar").get<double>(), p.at("value").get<double>(),
                                 p.at("mc_stderr").get<double>()});
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Priors and scenarios

json prior_to_json(const PriorSpec& prior) {
    json out = json::object();
    std::visit(overloaded{
                   [&](const IndependentJoint& j) {
                       out["joint"] = "independent";
                       out["sigma"] = marginal_to_json(j.sigma);
                       out["rho"] = marginal_to_json(j.rho);
                   },
                   [&](const CopulaJointSpec& c) {
                       out["joint"] = "copula";
                       out["sigma"] = marginal_to_json(c.sigma);
                       out["rho"] = marginal_to_json(c.rho);
                       out["copula"] = {{"gamma", c.gamma_corr},
                                        {"sigma_quantile", c.sigma_quantile == SigmaQuantile::normal
                                                               ? "normal"
                                                               : "marginal"}};
                   },
                   [&](const InducedJointSpec& i) {
                       out["joint"] = "induced";
                       out["induced"] = {
                           {"sigma_b_sq", {{"shape", i.sigma_b_sq.shape}, {"rate", i.sigma_b_sq.rate}}},
                           {"sigma_w_sq", {{"shape", i.sigma_w_sq.shape}, {"rate", i.sigma_w_sq.rate}}}};
                   },
               },
               prior.joint);
    out["nu"] = marginal_to_json(prior.nu);
    return out;
}

PriorSpec prior_from_json(const json& value, const std::string& path, const std::string& base_dir) {
    ObjectReader r(value, path);
    std::string joint = "independent";
    if (const json* j = r.find("joint")) {
        joint = as_string(*j, r.path("joint"));
    }
    PriorSpec prior;
    prior.nu = marginal_from_json(r.require("nu"), r.path("nu"), Parameter::nu, base_dir);
    if (joint == "independent") {
        prior.joint = IndependentJoint{
            marginal_from_json(r.require("sigma"), r.path("sigma"), Parameter::sigma, base_dir),
            marginal_from_json(r.require("rho"), r.path("rho"), Parameter::rho, base_dir)};
    } else if (joint == "copula") {
        CopulaJointSpec c;
        c.sigma = marginal_from_json(r.require("sigma"), r.path("sigma"), Parameter::sigma, base_dir);
        c.rho = marginal_from_json(r.require("rho"), r.path("rho"), Parameter::rho, base_dir);
        ObjectReader cr(r.require("copula"), r.path("copula"));
        c.gamma_corr = number_in(cr.require("gamma"), cr.path("gamma"), -1, 1, true, true, "(-1, 1)");
        if (const json* q = cr.find("sigma_quantile")) {
            const auto text = as_string(*q, cr.path("sigma_quantile"));
            if (text == "marginal" || text == "gamma") {
                c.sigma_quantile = SigmaQuantile::marginal;
            } else if (text == "normal") {
                c.sigma_quantile = SigmaQuantile::normal;
            } else {
                throw ValidationError(cr.path("sigma_quantile"), "expected 'marginal' or 'normal'");
            }
        }
        cr.finish();
        rethrow_as_validation(r.path("copula"), [&] { c.validate(); });
        prior.joint = std::move(c);
    } else if (joint == "induced") {
        for (const char* key : {"sigma", "rho"}) {
            if (r.has(key)) {
                throw ValidationError(r.path(key),
                                      "not allowed with an induced joint prior (sigma and rho "
                                      "follow from the variance components)");
            }
        }
        ObjectReader ir(r.require("induced"), r.path("induced"));
        InducedJointSpec spec{gamma_from_json(ir.require("sigma_b_sq"), ir.path("sigma_b_sq")),
                              gamma_from_json(ir.require("sigma_w_sq"), ir.path("sigma_w_sq"))};
        ir.finish();
        prior.joint = spec;
    } else {
        throw ValidationError(r.path("joint"), "expected 'independent', 'copula' or 'induced'");
    }
    r.finish();
    return prior;
}

NuisanceParams ScenarioDocument::power_psi() const {
    return point ? *point : power_point(prior);
}

EvaluationSpec ScenarioDocument::evaluation_spec(Method method) const {
    EvaluationSpec spec;
    spec.delta_m = design.delta_m;
    spec.test = design.test;
    spec.method = method;
    spec.prior = method == Method::power && point ? point_prior(*point) : prior;
    spec.draws = design.draws;
    spec.seed = design.seed;
    return spec;
}

ScenarioDocument scenario_from_json(const json& doc, const std::string& base_dir) {
    ObjectReader r(doc, "");
    ScenarioDocument s;
    if (const json* v = r.find("name")) {
        s.name = as_string(*v, "/name");
    }
    if (const json* v = r.find("description")) {
        s.description = as_string(*v, "/description");
    }

    {
        ObjectReader d(r.require("design"), "/design");
        // δ = 0 is admissible for power (size check); searches reject it.
        s.design.delta_m = number_in(d.require("delta"), d.path("delta"), 0, kInf, false, true, "[0, inf)");
        if (const json* v = d.find("alpha")) {
            s.design.test.alpha = number_in(*v, d.path("alpha"), 0, 1, true, true, "(0, 1)");
        }
        if (const json* v = d.find("sided")) {
            const auto text = as_string(*v, d.path("sided"));
            s.design.test.sided =
                rethrow_as_validation(d.path("sided"), [&] { return parse_sidedness(text); });
        }
        const auto clusters = as_integer(d.require("clusters"), d.path("clusters"));
        if (clusters < 2 || clusters % 2 != 0 || clusters > 1000000) {
            throw ValidationError(d.path("clusters"), "must be an even integer >= 2");
        }
        s.design.clusters = static_cast<int>(clusters);
        if (const json* v = d.find("cluster_size")) {
            const auto n = as_integer(*v, d.path("cluster_size"));
            if (n < 1 || n > 100000000) {
                throw ValidationError(d.path("cluster_size"), "must be an integer >= 1");
            }
            s.cluster_size = static_cast<int>(n);
        }
        s.design.draws = kDefaultDraws;
        if (const json* v = d.find("draws")) {
            const auto n = as_integer(*v, d.path("draws"));
            if (n < 1) {
                throw ValidationError(d.path("draws"), "must be an integer >= 1");
            }
            s.design.draws = static_cast<std::size_t>(n);
        }
        s.design.seed = kDefaultSeed;
        if (const json* v = d.find("seed")) {
            s.design.seed = as_seed(*v, d.path("seed"));
        }
        d.finish();
    }

    s.prior = prior_from_json(r.require("prior"), "/prior", base_dir);

    if (const json* v = r.find("point")) {
        ObjectReader p(*v, "/point");
        NuisanceParams psi;
        psi.sigma = check_support(p.require("sigma"), p.path("sigma"), Parameter::sigma);
        psi.rho = check_support(p.require("rho"), p.path("rho"), Parameter::rho);
        psi.nu = check_support(p.require("nu"), p.path("nu"), Parameter::nu);
        p.finish();
        s.point = psi;
    }

    if (const json* v = r.find("search")) {
        ObjectReader q(*v, "/search");
        if (const json* m = q.find("mode")) {
            const auto text = as_string(*m, q.path("mode"));
            s.search.mode = rethrow_as_validation(q.path("mode"), [&] { return parse_method(text); });
        }
        if (const json* t = q.find("target")) {
            s.search.target = number_in(*t, q.path("target"), 0, 1, true, true, "(0, 1)");
        }
        if (const json* dir = q.find("direction")) {
            const auto text = as_string(*dir, q.path("direction"));
            s.search.direction =
                rethrow_as_validation(q.path("direction"), [&] { return parse_direction(text); });
        }
        if (const json* n = q.find("n_max")) {
            const auto value = as_integer(*n, q.path("n_max"));
            if (value < 1 || value > 100000000) {
                throw ValidationError(q.path("n_max"), "must be an integer >= 1");
            }
            s.search.n_max = static_cast<int>(value);
        }
        if (const json* c = q.find("c_max")) {
            const auto value = as_integer(*c, q.path("c_max"));
            if (value < 2 || value > 100000000) {
                throw ValidationError(q.path("c_max"), "must be an integer >= 2");
            }
            s.search.c_max = static_cast<int>(value);
        }
        if (const json* sizes = q.find("cluster_sizes")) {
            s.search.cluster_sizes = number_list(*sizes, q.path("cluster_sizes"));
            for (std::size_t i = 0; i < s.search.cluster_sizes.size(); ++i) {
                if (!(s.search.cluster_sizes[i] >= 1.0)) {
                    throw ValidationError(child(q.path("cluster_sizes"), i), "cluster size must be >= 1");
                }
            }
        }
        q.finish();
    }

    if (const json* v = r.find("sweep")) {
        ObjectReader w(*v, "/sweep");
        s.nu_values = number_list(w.require("nu_values"), w.path("nu_values"));
        for (std::size_t i = 0; i < s.nu_values.size(); ++i) {
            if (!(s.nu_values[i] >= 0.0)) {
                throw ValidationError(child(w.path("nu_values"), i), "nu must be >= 0");
            }
        }
        w.finish();
    }

    if (const json* v = r.find("compare")) {
        ObjectReader c(*v, "/compare");
        if (const json* cl = c.find("clusters")) {
            const auto path = c.path("clusters");
            if (!cl->is_array() || cl->empty()) {
                throw ValidationError(path, "expected a non-empty list of even integers");
            }
            for (std::size_t i = 0; i < cl->size(); ++i) {
                const auto value = as_integer((*cl)[i], child(path, i));
                if (value < 2 || value % 2 != 0 || value > 1000000) {
                    throw ValidationError(child(path, i), "must be an even integer >= 2");
                }
                s.compare.clusters.push_back(static_cast<int>(value));
            }
        }
        if (const json* sc = c.find("scenarios")) {
            const auto path = c.path("scenarios");
            if (!sc->is_array() || sc->empty()) {
                throw ValidationError(path, "expected a non-empty list");
            }
            for (std::size_t i = 0; i < sc->size(); ++i) {
                ObjectReader item((*sc)[i], child(path, i));
                LabelledPrior lp;
                lp.label = as_string(item.require("label"), item.path("label"));
                lp.prior = prior_from_json(item.require("prior"), item.path("prior"), base_dir);
                item.finish();
                s.compare.scenarios.push_back(std::move(lp));
            }
        }
        c.finish();
    }

    if (const json* v = r.find("validation")) {
        ObjectReader val(*v, "/validation");
        if (const json* reps = val.find("reps")) {
            const auto n = as_integer(*reps, val.path("reps"));
            if (n < 100) {
                throw ValidationError(val.path("reps"), "must be an integer >= 100");
            }
            s.reps = static_cast<std::size_t>(n);
        }
        val.finish();
    }

    if (const json* v = r.find("outputs")) {
        if (!v->is_array()) {
            throw ValidationError("/outputs", "expected a list of output paths");
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            const auto path = as_string((*v)[i], child("/outputs", i));
            rethrow_as_validation(child("/outputs", i), [&] { (void)format_for_path(path); });
            s.outputs.push_back(path);
        }
    }

    r.finish();
    return s;
}

json scenario_to_json(const ScenarioDocument& s) {
    json out = json::object();
    out["name"] = s.name;
    out["description"] = s.description;
    json design{{"delta", s.design.delta_m},
                {"alpha", s.design.test.alpha},
                {"sided", to_string(s.design.test.sided)},
                {"clusters", s.design.clusters},
                {"draws", s.design.draws},
                {"seed", s.design.seed}};
    if (s.cluster_size) {
        design["cluster_size"] = *s.cluster_size;
    }
    out["design"] = design;
    out["prior"] = prior_to_json(s.prior);
    if (s.point) {
        out["point"] = psi_to_json(*s.point);
    }
    json search{{"mode", to_string(s.search.mode)},
                {"target", s.search.target},
                {"direction", to_string(s.search.direction)},
                {"n_max", s.search.n_max},
                {"c_max", s.search.c_max}};
    if (!s.search.cluster_sizes.empty()) {
        search["cluster_sizes"] = s.search.cluster_sizes;
    }
    out["search"] = search;
    if (!s.nu_values.empty()) {
        out["sweep"] = {{"nu_values", s.nu_values}};
    }
    if (!s.compare.clusters.empty() || !s.compare.scenarios.empty()) {
        json compare = json::object();
        if (!s.compare.clusters.empty()) {
            compare["clusters"] = s.compare.clusters;
        }
        if (!s.compare.scenarios.empty()) {
            json list = json::array();
            for (const auto& lp : s.compare.scenarios) {
                list.push_back({{"label", lp.label}, {"prior", prior_to_json(lp.prior)}});
            }
            compare["scenarios"] = list;
        }
        out["compare"] = compare;
    }
    out["validation"] = {{"reps", s.reps}};
    if (!s.outputs.empty()) {
        out["outputs"] = s.outputs;
    }
    return out;
}

json parse_scenario_text(std::string_view text, const std::string& source_name) {
    try {
        const YAML::Node root = YAML::Load(std::string(text));
        json out = yaml_to_json(root);
        if (!out.is_object()) {
            throw ParseError(source_name, 1, 1, "scenario must be a mapping at the top level");
        }
        return out;
    } catch (const YAML::Exception& e) {
        throw ParseError(source_name, e.mark.line + 1, e.mark.column + 1, e.msg);
    } catch (const ParseError& e) {
        if (std::string_view(e.what()).starts_with("<scenario>")) {
            throw ParseError(source_name, e.line(), e.column(),
                             std::string(e.what()).substr(std::string_view("<scenario>").size()));
        }
        throw;
    }
}

std::optional<std::string_view> find_preset(std::string_view name) {
    for (const auto& p : bundled_presets()) {
        if (p.name == name) {
            return p.text;
        }
    }
    return std::nullopt;
}

json load_scenario_json(const std::string& path_or_preset, std::string* base_dir) {
    std::error_code ec;
    if (fs::is_regular_file(path_or_preset, ec)) {
        std::ifstream in(path_or_preset, std::ios::binary);
        if (!in) {
            throw IoError("cannot read scenario file '" + path_or_preset + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        if (base_dir != nullptr) {
            *base_dir = fs::path(path_or_preset).parent_path().string();
            if (base_dir->empty()) {
                *base_dir = ".";
            }
        }
        return parse_scenario_text(buf.str(), path_or_preset);
    }
    std::string name = path_or_preset;
    if (name.ends_with(".scenario")) {
        name = fs::path(name).stem().string();
    }
    if (const auto text = find_preset(name)) {
        if (base_dir != nullptr) {
            *base_dir = ".";
        }
        return parse_scenario_text(*text, "preset:" + name);
    }
    if (fs::exists(path_or_preset, ec)) {
        throw IoError("scenario '" + path_or_preset + "' is not a regular file");
    }
    throw ValidationError("/scenario", "'" + path_or_preset +
                                           "' is neither an existing file nor a bundled preset");
}

ScenarioDocument load_scenario(const std::string& path_or_preset) {
    std::string base_dir;
    const json doc = load_scenario_json(path_or_preset, &base_dir);
    return scenario_from_json(doc, base_dir);
}

// ---------------------------------------------------------------------------
// Results

json result_to_json(const ResultDocument& result) {
    json out{{"operation", result.operation},
             {"seed", result.seed},
             {"draws", result.draws},
             {"spec_digest", result.spec_digest}};
    std::visit(overloaded{
                   [&](const PowerResult& p) {
                       out["kind"] = "power";
                       out["result"] = {{"value", p.value},
                                        {"delta", p.delta},
                                        {"psi", psi_to_json(p.psi)},
                                        {"clusters", p.clusters},
                                        {"n_bar", p.n_bar},
                                        {"alpha", p.test.alpha},
                                        {"sided", to_string(p.test.sided)},
                                        {"plateau", p.plateau}};
                   },
                   [&](const AssuranceResult& a) {
                       out["kind"] = "assurance";
                       out["result"] = {{"value", a.estimate.value},
                                        {"mc_stderr", a.estimate.mc_stderr},
                                        {"draws", a.estimate.draws},
                                        {"n_bar", a.estimate.n_bar},
                                        {"clusters", a.estimate.clusters},
                                        {"plateau", a.plateau}};
                   },
                   [&](const SampleSizeResult& r) {
                       out["kind"] = "samplesize";
                       out["result"] = sample_size_to_json(r);
                   },
                   [&](const std::vector<CurvePoint>& c) {
                       out["kind"] = "curve";
                       out["result"] = curve_to_json(c);
                   },
                   [&](const std::vector<NuCurve>& curves) {
                       out["kind"] = "nu_sweep";
                       json list = json::array();
                       for (const auto& c : curves) {
                           list.push_back({{"nu", c.nu},
                                           {"points", curve_to_json(c.points)},
                                           {"required", c.required ? sample_size_to_json(*c.required)
                                                                   : json(nullptr)}});
                       }
                       out["result"] = list;
                   },
                   [&](const std::vector<SensitivityRow>& rows) {
                       out["kind"] = "compare_priors";
                       json list = json::array();
                       for (const auto& row : rows) {
                           list.push_back({{"scenario", row.scenario_label},
                                           {"clusters", row.clusters},
                                           {"n_bar", row.n_bar},
                                           {"n_total", row.n_total},
                                           {"method", to_string(row.method)},
                                           {"feasible", row.feasible},
                                           {"achieved", row.achieved},
                                           {"plateau", row.plateau}});
                       }
                       out["result"] = list;
                   },
                   [&](const std::vector<ValidationRow>& rows) {
                       out["kind"] = "validation";
                       json list = json::array();
                       for (const auto& row : rows) {
                           list.push_back({{"label", row.label},
                                           {"delta", row.delta},
                                           {"nu", row.nu},
                                           {"reps", row.empirical.reps},
                                           {"rate", row.empirical.rate},
                                           {"binomial_se", row.empirical.binomial_se},
                                           {"formula", row.empirical.formula},
                                           {"tolerance", row.tolerance},
                                           {"passed", row.passed}});
                       }
                       out["result"] = list;
                   },
               },
               result.payload);
    return out;
}

ResultDocument result_from_json(const json& value) {
    try {
        ResultDocument doc;
        doc.operation = value.at("operation").get<std::string>();
        doc.seed = value.at("seed").get<std::uint64_t>();
        doc.draws = value.at("draws").get<std::size_t>();
        doc.spec_digest = value.at("spec_digest").get<std::string>();
        const auto kind = value.at("kind").get<std::string>();
        const json& r = value.at("result");
        if (kind == "power") {
            PowerResult p;
            p.value = r.at("value").get<double>();
            p.delta = r.at("delta").get<double>();
            p.psi = psi_from_json(r.at("psi"));
            p.clusters = r.at("clusters").get<int>();
            p.n_bar = r.at("n_bar").get<double>();
            p.test.alpha = r.at("alpha").get<double>();
            p.test.sided = parse_sidedness(r.at("sided").get<std::string>());
            p.plateau = r.at("plateau").get<double>();
            doc.payload = p;
        } else if (kind == "assurance") {
            AssuranceResult a;
            a.estimate.value = r.at("value").get<double>();
            a.estimate.mc_stderr = r.at("mc_stderr").get<double>();
            a.estimate.draws = r.at("draws").get<std::size_t>();
            a.estimate.n_bar = r.at("n_bar").get<double>();
            a.estimate.clusters = r.at("clusters").get<int>();
            a.plateau = r.at("plateau").get<double>();
            doc.payload = a;
        } else if (kind == "samplesize") {
            doc.payload = sample_size_from_json(r);
        } else if (kind == "curve") {
            doc.payload = curve_from_json(r);
        } else if (kind == "nu_sweep") {
            std::vector<NuCurve> curves;
            for (const auto& item : r) {
                NuCurve c;
                c.nu = item.at("nu").get<double>();
                c.points = curve_from_json(item.at("points"));
                if (!item.at("required").is_null()) {
                    c.required = sample_size_from_json(item.at("required"));
                }
                curves.push_back(std::move(c));
            }
            doc.payload = std::move(curves);
        } else if (kind == "compare_priors") {
            std::vector<SensitivityRow> rows;
            for (const auto& item : r) {
                rows.push_back(SensitivityRow{item.at("scenario").get<std::string>(),
                                              item.at("clusters").get<int>(),
                                              item.at("n_bar").get<int>(),
                                              item.at("n_total").get<long long>(),
                                              parse_method(item.at("method").get<std::string>()),
                                              item.at("feasible").get<bool>(),
                                              item.at("achieved").get<double>(),
                                              item.at("plateau").get<double>()});
            }
            doc.payload = std::move(rows);
        } else if (kind == "validation") {
            std::vector<ValidationRow> rows;
            for (const auto& item : r) {
                ValidationRow row;
                row.label = item.at("label").get<std::string>();
                row.delta = item.at("delta").get<double>();
                row.nu = item.at("nu").get<double>();
                row.empirical.reps = item.at("reps").get<std::size_t>();
                row.empirical.rate = item.at("rate").get<double>();
                row.empirical.binomial_se = item.at("binomial_se").get<double>();
                row.empirical.formula = item.at("formula").get<double>();
                row.tolerance = item.at("tolerance").get<double>();
                row.passed = item.at("passed").get<bool>();
                rows.push_back(std::move(row));
            }
            doc.payload = std::move(rows);
        } else {
            throw ValidationError("/kind", "unknown result kind '" + kind + "'");
        }
        return doc;
    } catch (const json::exception& e) {
        throw ValidationError("/", std::string("malformed result document: ") + e.what());
    }
}

OutputFormat format_for_path(const std::string& path) {
    const auto ext = fs::path(path).extension().string();
    if (ext == ".json") {
        return OutputFormat::json;
    }
    if (ext == ".csv") {
        return OutputFormat::csv;
    }
    throw DomainError("output path '" + path + "' must end in .json or .csv");
}

std::string result_to_csv(const ResultDocument& result) {
    std::ostringstream out;
    std::visit(
        overloaded{
            [&](const PowerResult& p) {
                out << "value,delta,sigma,rho,nu,clusters,n_bar,alpha,sided,plateau\n"
                    << fmt(p.value) << ',' << fmt(p.delta) << ',' << fmt(p.psi.sigma) << ','
                    << fmt(p.psi.rho) << ',' << fmt(p.psi.nu) << ',' << p.clusters << ','
                    << fmt(p.n_bar) << ',' << fmt(p.test.alpha) << ',' << to_string(p.test.sided)
                    << ',' << fmt(p.plateau) << '\n';
            },
            [&](const AssuranceResult& a) {
                out << "n_bar,clusters,value,mc_stderr,draws,plateau,seed,spec_digest\n"
                    << fmt(a.estimate.n_bar) << ',' << a.estimate.clusters << ','
                    << fmt(a.estimate.value) << ',' << fmt(a.estimate.mc_stderr) << ','
                    << a.estimate.draws << ',' << fmt(a.plateau) << ',' << result.seed << ','
                    << result.spec_digest << '\n';
            },
            [&](const SampleSizeResult& r) {
                out << "method,direction,clusters,n_bar,n_total,target,feasible,achieved,"
                       "achieved_stderr,previous,plateau,draws,seed,spec_digest\n"
                    << to_string(r.method) << ',' << to_string(r.direction) << ',' << r.clusters
                    << ',' << r.n_bar << ',' << r.n_total << ',' << fmt(r.target) << ','
                    << (r.feasible ? "true" : "false") << ',' << fmt(r.achieved) << ','
                    << fmt(r.achieved_stderr) << ',' << (r.previous ? fmt(*r.previous) : "")
                    << ',' << fmt(r.plateau) << ',' << r.draws << ',' << r.seed << ','
                    << r.spec_digest << '\n';
            },
            [&](const std::vector<CurvePoint>& c) {
                out << "n_bar,value,mc_stderr\n";
                for (const auto& p : c) {
                    out << fmt(p.n_bar) << ',' << fmt(p.value) << ',' << fmt(p.mc_stderr) << '\n';
                }
            },
            [&](const std::vector<NuCurve>& curves) {
                out << "nu,n_bar,value,mc_stderr\n";
                for (const auto& c : curves) {
                    for (const auto& p : c.points) {
                        out << fmt(c.nu) << ',' << fmt(p.n_bar) << ',' << fmt(p.value) << ','
                            << fmt(p.mc_stderr) << '\n';
                    }
                }
            },
            [&](const std::vector<SensitivityRow>& rows) {
                // One line per scenario; column groups per C, then method.
                std::vector<std::string> labels;
                std::vector<int> clusters;
                for (const auto& row : rows) {
                    if (std::find(labels.begin(), labels.end(), row.scenario_label) == labels.end()) {
                        labels.push_back(row.scenario_label);
                    }
                    if (std::find(clusters.begin(), clusters.end(), row.clusters) == clusters.end()) {
                        clusters.push_back(row.clusters);
                    }
                }
                out << "scenario";
                for (int c : clusters) {
                    for (const char* m : {"assurance", "power"}) {
                        out << ",C" << c << '_' << m << "_n_bar,C" << c << '_' << m << "_N";
                    }
                }
                out << '\n';
                for (const auto& label : labels) {
                    out << label;
                    for (int c : clusters) {
                        for (Method m : {Method::assurance, Method::power}) {
                            const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) {
                                return r.scenario_label == label && r.clusters == c && r.method == m;
                            });
                            if (it == rows.end() || !it->feasible) {
                                out << ",NA,NA";
                            } else {
                                out << ',' << it->n_bar << ',' << it->n_total;
                            }
                        }
                    }
                    out << '\n';
                }
            },
            [&](const std::vector<ValidationRow>& rows) {
                out << "label,delta,nu,reps,rate,binomial_se,formula,difference,tolerance,passed\n";
                for (const auto& r : rows) {
                    out << r.label << ',' << fmt(r.delta) << ',' << fmt(r.nu) << ','
                        << r.empirical.reps << ',' << fmt(r.empirical.rate) << ','
                        << fmt(r.empirical.binomial_se) << ',' << fmt(r.empirical.formula) << ','
                        << fmt(r.empirical.rate - r.empirical.formula) << ',' << fmt(r.tolerance)
                        << ',' << (r.passed ? "true" : "false") << '\n';
                }
            },
        },
        result.payload);
    return out.str();
}

void write_results(const ResultDocument& result, const std::string& path, OutputFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    if (format == OutputFormat::json) {
        out << result_to_json(result).dump(2) << '\n';
    } else {
        out << result_to_csv(result);
    }
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

ResultDocument read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    try {
        return result_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, static_cast<int>(e.byte), e.what());
    }
}

}  // namespace crtassure::io
