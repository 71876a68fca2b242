#include "crtassure/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crtassure/errors.hpp"

namespace crtassure::stats {

double compensated_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("mean of an empty sample");
    }
    return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [m](double v) { return (v - m) * (v - m); });
    return std::sqrt(compensated_sum(sq) / static_cast<double>(values.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("pearson: need two equal-length samples of size >= 2");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> out(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            out[order[k]] = r;
        }
        i = j + 1;
    }
    return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    return pearson(rx, ry);
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // Tied sample values form one step of the empirical CDF.
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) {
            continue;
        }
        const double f = cdf(sorted[i]);
        std::size_t first = i;
        while (first > 0 && sorted[first - 1] == sorted[i]) {
            --first;
        }
        const double below = static_cast<double>(first) / n;
        const double upto = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(upto - f), std::abs(f - below)});
    }
    return d;
}

}  // namespace crtassure::stats
