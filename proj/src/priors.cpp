#include "crtassure/priors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crtassure/digest.hpp"
#include "crtassure/errors.hpp"
#include "crtassure/stats.hpp"

namespace crtassure {

namespace {

// Stream indices for derive_seed; fixed so that draws are reproducible.
constexpr std::uint64_t kCopulaStream = 1;
constexpr std::uint64_t kNuStream = 2;
constexpr std::uint64_t kSigmaStream = 3;
constexpr std::uint64_t kRhoStream = 4;
constexpr std::uint64_t kBetweenStream = 5;
constexpr std::uint64_t kWithinStream = 6;
constexpr std::uint64_t kBootstrapStream = 7;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double marginal_mean(const MarginalPrior& prior) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return p.value; },
                          [](const dist::GammaSpec& g) { return g.mean(); },
                          [](const dist::EmpiricalDist& e) { return stats::mean(e.samples()); },
                          [](const dist::LogitNormalSpec& l) { return l.median(); },
                      },
                      prior);
}

double marginal_variance(const MarginalPrior& prior) {
    return std::visit(overloaded{
                          [](const PointMass&) { return 0.0; },
                          [](const dist::GammaSpec& g) { return g.variance(); },
                          [](const dist::EmpiricalDist& e) {
                              const double sd = stats::sample_sd(e.samples());
                              return sd * sd;
                          },
                          [](const dist::LogitNormalSpec&) -> double {
                              throw DomainError(
                                  "normal sigma quantile needs a point, gamma or empirical "
                                  "sigma marginal");
                          },
                      },
                      prior);
}

void append_marginal(std::ostringstream& out, const MarginalPrior& prior) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    std::visit(overloaded{
                   [&](const PointMass& p) {
                       out << "point(";
                       num(p.value);
                       out << ")";
                   },
                   [&](const dist::GammaSpec& g) {
                       out << "gamma(";
                       num(g.shape);
                       out << ",";
                       num(g.rate);
                       out << ")";
                   },
                   [&](const dist::EmpiricalDist& e) {
                       out << "empirical[" << e.size() << "](";
                       for (double v : e.samples()) {
                           num(v);
                           out << ";";
                       }
                       out << ")";
                   },
                   [&](const dist::LogitNormalSpec& l) {
                       out << "logit_normal(";
                       num(l.mu);
                       out << ",";
                       num(l.sigma_logit);
                       out << ")";
                   },
               },
               prior);
}

void check_count(std::size_t count) {
    if (count < 1) {
        throw DomainError("number of prior draws must be >= 1");
    }
}

}  // namespace

std::string_view to_string(Parameter p) {
    switch (p) {
        case Parameter::sigma:
            return "sigma";
        case Parameter::rho:
            return "rho";
        case Parameter::nu:
            return "nu";
    }
    return "?";
}

std::string_view kind_name(const MarginalPrior& prior) {
    return std::visit(overloaded{
                          [](const PointMass&) { return std::string_view("point"); },
                          [](const dist::GammaSpec&) { return std::string_view("gamma"); },
                          [](const dist::EmpiricalDist&) { return std::string_view("empirical"); },
                          [](const dist::LogitNormalSpec&) {
                              return std::string_view("logit_normal");
                          },
                      },
                      prior);
}

void validate_marginal(const MarginalPrior& prior, Parameter param) {
    const std::string name(to_string(param));
    auto check_value = [&](double v) {
        const bool ok = param == Parameter::sigma ? (v > 0.0 && std::isfinite(v))
                        : param == Parameter::rho ? (v >= 0.0 && v < 1.0)
                                                  : (v >= 0.0 && std::isfinite(v));
        if (!ok) {
            const char* support = param == Parameter::sigma ? "(0, inf)"
                                  : param == Parameter::rho ? "[0, 1)"
                                                            : "[0, inf)";
            throw DomainError(name + " prior value " + std::to_string(v) +
                              " is outside the support " + support);
        }
    };
    std::visit(overloaded{
                   [&](const PointMass& p) { check_value(p.value); },
                   [&](const dist::GammaSpec& g) {
                       g.validate();
                       if (param == Parameter::rho) {
                           throw DomainError("rho prior cannot be gamma: support must lie in [0, 1)");
                       }
                   },
                   [&](const dist::EmpiricalDist& e) {
                       check_value(e.samples().front());
                       check_value(e.samples().back());
                   },
                   [&](const dist::LogitNormalSpec& l) {
                       l.validate();
                       if (param != Parameter::rho) {
                           throw DomainError("logit-normal priors are only supported for rho");
                       }
                   },
               },
               prior);
}

double quantile_from_score(const MarginalPrior& prior, double z) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return p.value; },
                          [z](const dist::GammaSpec& g) {
                              return z <= 0.0 ? dist::gamma_quantile(g, dist::standard_normal_cdf(z))
                                              : dist::gamma_quantile_upper(
                                                    g, dist::standard_normal_cdf(-z));
                          },
                          [z](const dist::EmpiricalDist& e) {
                              return e.quantile(dist::standard_normal_cdf(z));
                          },
                          [z](const dist::LogitNormalSpec& l) { return l.from_score(z); },
                      },
                      prior);
}

double marginal_quantile(const MarginalPrior& prior, double u) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return p.value; },
                          [u](const dist::GammaSpec& g) { return dist::gamma_quantile(g, u); },
                          [u](const dist::EmpiricalDist& e) { return e.quantile(u); },
                          [u](const dist::LogitNormalSpec& l) { return l.quantile(u); },
                      },
                      prior);
}

double marginal_median(const MarginalPrior& prior) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return p.value; },
                          [](const dist::GammaSpec& g) { return g.median(); },
                          [](const dist::EmpiricalDist& e) { return e.median(); },
                          [](const dist::LogitNormalSpec& l) { return l.median(); },
                      },
                      prior);
}

double marginal_centre(const MarginalPrior& prior) {
    if (const auto* g = std::get_if<dist::GammaSpec>(&prior)) {
        return g->mean();
    }
    return marginal_median(prior);
}

void CopulaJointSpec::validate() const {
    validate_marginal(rho, Parameter::rho);
    validate_marginal(sigma, Parameter::sigma);
    if (!(gamma_corr > -1.0 && gamma_corr < 1.0)) {
        throw DomainError("copula correlation must lie in (-1, 1), got " +
                          std::to_string(gamma_corr));
    }
    if (sigma_quantile == SigmaQuantile::normal) {
        (void)marginal_variance(sigma);
    }
}

void InducedJointSpec::validate() const {
    sigma_b_sq.validate();
    sigma_w_sq.validate();
}

void PriorSpec::validate() const {
    std::visit(overloaded{
                   [](const IndependentJoint& j) {
                       validate_marginal(j.sigma, Parameter::sigma);
                       validate_marginal(j.rho, Parameter::rho);
                   },
                   [](const CopulaJointSpec& c) { c.validate(); },
                   [](const InducedJointSpec& i) { i.validate(); },
               },
               joint);
    validate_marginal(nu, Parameter::nu);
}

bool PriorSpec::is_point() const {
    const auto* ind = std::get_if<IndependentJoint>(&joint);
    return ind != nullptr && std::holds_alternative<PointMass>(ind->sigma) &&
           std::holds_alternative<PointMass>(ind->rho) && std::holds_alternative<PointMass>(nu);
}

PriorSpec point_prior(const NuisanceParams& psi) {
    psi.validate();
    return PriorSpec{IndependentJoint{PointMass{psi.sigma}, PointMass{psi.rho}}, PointMass{psi.nu}};
}

std::string canonical_text(const PriorSpec& spec) {
    std::ostringstream out;
    char buf[64];
    std::visit(overloaded{
                   [&](const IndependentJoint& j) {
                       out << "independent{sigma=";
                       append_marginal(out, j.sigma);
                       out << ",rho=";
                       append_marginal(out, j.rho);
                       out << "}";
                   },
                   [&](const CopulaJointSpec& c) {
                       std::snprintf(buf, sizeof buf, "%.17g", c.gamma_corr);
                       out << "copula{gamma=" << buf << ",sigma_quantile="
                           << (c.sigma_quantile == SigmaQuantile::normal ? "normal" : "marginal")
                           << ",rho=";
                       append_marginal(out, c.rho);
                       out << ",sigma=";
                       append_marginal(out, c.sigma);
                       out << "}";
                   },
                   [&](const InducedJointSpec& i) {
                       out << "induced{between=";
                       append_marginal(out, i.sigma_b_sq);
                       out << ",within=";
                       append_marginal(out, i.sigma_w_sq);
                       out << "}";
                   },
               },
               spec.joint);
    out << ";nu=";
    append_marginal(out, spec.nu);
    return out.str();
}

std::string spec_digest(const PriorSpec& spec) { return digest_hex(canonical_text(spec)); }

void NuisanceDrawSet::validate() const {
    if (!weights.empty() && weights.size() != draws.size()) {
        throw std::logic_error("draw set: weight count does not match draw count");
    }
    for (std::size_t i = 0; i < draws.size(); ++i) {
        try {
            draws[i].validate();
        } catch (const DomainError& e) {
            throw std::logic_error("prior draw " + std::to_string(i) +
                                   " violates the parameter support: " + e.what());
        }
    }
    for (double w : weights) {
        if (!(w >= 0.0 && std::isfinite(w))) {
            throw std::logic_error("draw set: weights must be finite and non-negative");
        }
    }
}

dist::GammaSpec gamma_from_mean_var(double mean, double variance) {
    if (!(mean > 0.0 && std::isfinite(mean)) || !(variance > 0.0 && std::isfinite(variance))) {
        throw DomainError("gamma_from_mean_var: mean and variance must be positive");
    }
    return dist::GammaSpec{mean * mean / variance, mean / variance};
}

dist::LogitNormalSpec fit_icc_from_quantiles(double median, double lo95, double hi95) {
    if (!(0.0 < lo95 && lo95 < median && median < hi95 && hi95 < 1.0)) {
        throw DomainError("fit_icc_from_quantiles: need 0 < lo95 < median < hi95 < 1");
    }
    // With mu pinned at logit(median) the fitted 2.5%/97.5% quantiles are
    // mu ∓ z s, so the squared tail error is a quadratic in s whose minimiser
    // is the mean of the two single-tail fits.
    const double z = dist::standard_normal_quantile(0.975);
    const double mu = dist::logit(median);
    const double lower_fit = (mu - dist::logit(lo95)) / z;
    const double upper_fit = (dist::logit(hi95) - mu) / z;
    return dist::LogitNormalSpec{mu, 0.5 * (lower_fit + upper_fit)};
}

std::vector<RhoSigma> sample_copula(const CopulaJointSpec& spec, std::size_t count,
                                    std::uint64_t seed) {
    spec.validate();
    check_count(count);
    RandomStream rng(derive_seed(seed, kCopulaStream));
    const double g = spec.gamma_corr;
    const double h = std::sqrt(1.0 - g * g);

    double sigma_mean = 0.0;
    double sigma_sd = 0.0;
    if (spec.sigma_quantile == SigmaQuantile::normal) {
        sigma_mean = marginal_mean(spec.sigma);
        sigma_sd = std::sqrt(marginal_variance(spec.sigma));
    }

    std::vector<RhoSigma> out(count);
    for (auto& draw : out) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double x = z1;
        const double y = g * z1 + h * z2;
        draw.rho = quantile_from_score(spec.rho, x);
        draw.sigma = spec.sigma_quantile == SigmaQuantile::normal
                         ? sigma_mean + sigma_sd * y
                         : quantile_from_score(spec.sigma, y);
    }
    return out;
}

std::vector<VarianceComponents> sample_variance_components(const InducedJointSpec& spec,
                                                           std::size_t count,
                                                           std::uint64_t seed) {
    spec.validate();
    check_count(count);
    RandomStream between(derive_seed(seed, kBetweenStream));
    RandomStream within(derive_seed(seed, kWithinStream));
    std::vector<VarianceComponents> out(count);
    for (auto& vc : out) {
        vc.between = dist::gamma_draw(spec.sigma_b_sq, between);
        vc.within = dist::gamma_draw(spec.sigma_w_sq, within);
    }
    return out;
}

std::vector<RhoSigma> sample_induced(const InducedJointSpec& spec, std::size_t count,
                                     std::uint64_t seed) {
    const auto components = sample_variance_components(spec, count, seed);
    std::vector<RhoSigma> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double total = components[i].between + components[i].within;
        out[i].rho = components[i].between / total;
        out[i].sigma = std::sqrt(total);
    }
    return out;
}

CorrelationEstimate estimate_copula_gamma(const InducedJointSpec& spec, std::size_t count,
                                          std::uint64_t seed, std::size_t bootstrap_resamples) {
    if (count < 10000) {
        throw DomainError("estimate_copula_gamma needs at least 10^4 draws");
    }
    const auto pairs = sample_induced(spec, count, seed);
    std::vector<double> rho(count);
    std::vector<double> sigma(count);
    for (std::size_t i = 0; i < count; ++i) {
        rho[i] = pairs[i].rho;
        sigma[i] = pairs[i].sigma;
    }
    const double value = stats::pearson(rho, sigma);

    RandomStream rng(derive_seed(seed, kBootstrapStream));
    std::vector<double> boot(bootstrap_resamples);
    std::vector<double> br(count);
    std::vector<double> bs(count);
    for (auto& b : boot) {
        for (std::size_t i = 0; i < count; ++i) {
            const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(count));
            br[i] = rho[k];
            bs[i] = sigma[k];
        }
        b = stats::pearson(br, bs);
    }
    return {value, stats::sample_sd(boot)};
}

NuisanceDrawSet sample_prior(const PriorSpec& spec, std::size_t count, std::uint64_t seed) {
    spec.validate();
    check_count(count);
    NuisanceDrawSet set;
    set.seed = seed;
    set.spec_digest = spec_digest(spec);
    set.draws.resize(count);

    std::visit(overloaded{
                   [&](const IndependentJoint& j) {
                       RandomStream sigma_rng(derive_seed(seed, kSigmaStream));
                       RandomStream rho_rng(derive_seed(seed, kRhoStream));
                       for (auto& d : set.draws) {
                           d.sigma = quantile_from_score(j.sigma, sigma_rng.normal());
                           d.rho = quantile_from_score(j.rho, rho_rng.normal());
                       }
                   },
                   [&](const CopulaJointSpec& c) {
                       const auto pairs = sample_copula(c, count, seed);
                       for (std::size_t i = 0; i < count; ++i) {
                           set.draws[i].rho = pairs[i].rho;
                           set.draws[i].sigma = pairs[i].sigma;
                       }
                   },
                   [&](const InducedJointSpec& ind) {
                       const auto pairs = sample_induced(ind, count, seed);
                       for (std::size_t i = 0; i < count; ++i) {
                           set.draws[i].rho = pairs[i].rho;
                           set.draws[i].sigma = pairs[i].sigma;
                       }
                   },
               },
               spec.joint);

    RandomStream nu_rng(derive_seed(seed, kNuStream));
    for (auto& d : set.draws) {
        d.nu = quantile_from_score(spec.nu, nu_rng.normal());
    }
    set.validate();
    return set;
}

NuisanceDrawSet stratified_draws(std::span<const DiscreteAtom> atoms) {
    if (atoms.empty()) {
        throw DomainError("discrete prior needs at least one atom");
    }
    NuisanceDrawSet set;
    double total = 0.0;
    for (const auto& atom : atoms) {
        atom.psi.validate();
        if (!(atom.weight > 0.0 && std::isfinite(atom.weight))) {
            throw DomainError("discrete prior atom weights must be positive");
        }
        set.draws.push_back(atom.psi);
        set.weights.push_back(atom.weight);
        total += atom.weight;
    }
    for (auto& w : set.weights) {
        w /= total;
    }
    std::ostringstream text;
    char buf[128];
    for (const auto& atom : atoms) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g;", atom.psi.sigma, atom.psi.rho,
                      atom.psi.nu, atom.weight);
        text << buf;
    }
    set.spec_digest = digest_hex("discrete:" + text.str());
    return set;
}

NuisanceParams power_point(const PriorSpec& spec) {
    spec.validate();
    NuisanceParams psi;
    psi.nu = marginal_centre(spec.nu);
    std::visit(overloaded{
                   [&](const IndependentJoint& j) {
                       psi.sigma = marginal_centre(j.sigma);
                       psi.rho = marginal_median(j.rho);
                   },
                   [&](const CopulaJointSpec& c) {
                       psi.sigma = marginal_centre(c.sigma);
                       psi.rho = marginal_median(c.rho);
                   },
                   [&](const InducedJointSpec& ind) {
                       psi.sigma = std::sqrt(ind.sigma_b_sq.mean() + ind.sigma_w_sq.mean());
                       const auto pairs = sample_induced(ind, 100000, 0);
                       std::vector<double> rho(pairs.size());
                       std::transform(pairs.begin(), pairs.end(), rho.begin(),
                                      [](const RhoSigma& p) { return p.rho; });
                       psi.rho = dist::EmpiricalDist(std::move(rho)).median();
                   },
               },
               spec.joint);
    psi.validate();
    return psi;
}

NuisanceDrawSet with_fixed_nu(const NuisanceDrawSet& draws, double nu) {
    if (!(nu >= 0.0 && std::isfinite(nu))) {
        throw DomainError("nu must be >= 0, got " + std::to_string(nu));
    }
    NuisanceDrawSet out = draws;
    for (auto& d : out.draws) {
        d.nu = nu;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", nu);
    out.spec_digest = draws.spec_digest + "/nu=" + buf;
    return out;
}

dist::EmpiricalDist load_icc_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open ICC sample file '" + path + "'");
    }
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(first, last - first + 1);
        double v = 0.0;
        std::size_t used = 0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw ParseError(path, line_no, static_cast<int>(first) + 1,
                             "expected a number, got '" + token + "'");
        }
        if (!(v >= 0.0 && v < 1.0)) {
            throw ParseError(path, line_no, static_cast<int>(first) + 1,
                             "ICC sample " + token + " outside the support [0, 1)");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw ParseError(path, line_no, 1, "ICC sample file contains no values");
    }
    return dist::EmpiricalDist(std::move(values));
}

}  // namespace crtassure
