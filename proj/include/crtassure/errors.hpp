#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace crtassure {

/// Input outside an operation's mathematical domain (bad probability,
/// non-positive variance, unordered quantiles, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scenario/request document failed validation. `path` is a JSON-pointer
/// style location such as "/prior/rho/point".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Scenario text could not be parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, int column, const std::string& message)
        : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                             ": " + message),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// The design cannot reach the target at this cluster count: the large-n
/// plateau of power/assurance lies below it.
class InfeasibleDesign : public std::runtime_error {
public:
    InfeasibleDesign(double plateau, double target, int clusters)
        : std::runtime_error("infeasible design: plateau " + std::to_string(plateau) +
                             " is below target " + std::to_string(target) + " at C=" +
                             std::to_string(clusters) + "; increase the number of clusters"),
          plateau_(plateau),
          target_(target),
          clusters_(clusters) {}

    double plateau() const noexcept { return plateau_; }
    double target() const noexcept { return target_; }
    int clusters() const noexcept { return clusters_; }

private:
    double plateau_;
    double target_;
    int clusters_;
};

/// Target is reachable in principle but not inside the configured search
/// bound (n_max or C_max).
class SearchLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace crtassure
