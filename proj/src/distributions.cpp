#include "crtassure/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "crtassure/errors.hpp"

namespace crtassure {

double RandomStream::normal() { return dist::standard_normal_quantile(uniform()); }

namespace dist {

namespace {

void require_open_unit(double u, const char* what) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError(std::string(what) + ": probability must lie in (0, 1), got " +
                          std::to_string(u));
    }
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double standard_normal_quantile(double u) {
    require_open_unit(u, "standard_normal_quantile");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

void GammaSpec::validate() const {
    if (!(shape > 0.0 && std::isfinite(shape)) || !(rate > 0.0 && std::isfinite(rate))) {
        throw DomainError("gamma: shape and rate must be positive and finite (shape=" +
                          std::to_string(shape) + ", rate=" + std::to_string(rate) + ")");
    }
}

double GammaSpec::median() const { return gamma_quantile(*this, 0.5); }

double gamma_pdf(const GammaSpec& spec, double x) {
    spec.validate();
    if (x < 0.0) {
        return 0.0;
    }
    return spec.rate * boost::math::gamma_p_derivative(spec.shape, spec.rate * x);
}

double gamma_cdf(const GammaSpec& spec, double x) {
    spec.validate();
    return x <= 0.0 ? 0.0 : boost::math::gamma_p(spec.shape, spec.rate * x);
}

double gamma_survival(const GammaSpec& spec, double x) {
    spec.validate();
    return x <= 0.0 ? 1.0 : boost::math::gamma_q(spec.shape, spec.rate * x);
}

double gamma_quantile(const GammaSpec& spec, double u) {
    spec.validate();
    require_open_unit(u, "gamma_quantile");
    return boost::math::gamma_p_inv(spec.shape, u) / spec.rate;
}

double gamma_quantile_upper(const GammaSpec& spec, double q) {
    spec.validate();
    require_open_unit(q, "gamma_quantile_upper");
    return boost::math::gamma_q_inv(spec.shape, q) / spec.rate;
}

double gamma_draw(const GammaSpec& spec, RandomStream& rng) {
    double a = spec.shape;
    double boost_factor = 1.0;
    if (a < 1.0) {
        boost_factor = std::pow(rng.uniform(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 ||
            std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v * boost_factor / spec.rate;
        }
    }
}

std::vector<double> gamma_sample(const GammaSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    RandomStream rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) {
        x = gamma_draw(spec, rng);
    }
    return out;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double inverse_logit(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void LogitNormalSpec::validate() const {
    if (!std::isfinite(mu) || !(sigma_logit > 0.0 && std::isfinite(sigma_logit))) {
        throw DomainError("logit-normal: mu must be finite and sigma_logit positive");
    }
}

double LogitNormalSpec::median() const { return inverse_logit(mu); }

double LogitNormalSpec::cdf(double x) const {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    return standard_normal_cdf((logit(x) - mu) / sigma_logit);
}

double LogitNormalSpec::quantile(double u) const {
    return from_score(standard_normal_quantile(u));
}

double LogitNormalSpec::from_score(double z) const {
    // Far-tail scores would round to 1, outside the support.
    return std::min(inverse_logit(mu + sigma_logit * z), std::nextafter(1.0, 0.0));
}

EmpiricalDist::EmpiricalDist(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) {
        throw DomainError("empirical distribution needs at least one sample");
    }
    for (double x : samples_) {
        if (!std::isfinite(x)) {
            throw DomainError("empirical distribution: non-finite sample");
        }
    }
    std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDist::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw DomainError("empirical_quantile: probability must lie in [0, 1], got " +
                          std::to_string(u));
    }
    const auto n = samples_.size();
    auto index = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
    index = std::clamp<std::size_t>(index, 1, n);
    return samples_[index - 1];
}

double EmpiricalDist::cdf(double x) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

}  // namespace dist
}  // namespace crtassure
