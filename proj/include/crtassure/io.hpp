#pragma once

// Scenario documents, bundled presets and result serialisation.
//
// A scenario is one reproducible run: design, prior, search settings and
// requested outputs. Scenario files are YAML; the service accepts the same
// document as JSON. Both are validated by one schema with JSON-pointer paths
// in error messages.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "crtassure/power.hpp"
#include "crtassure/priors.hpp"
#include "crtassure/search.hpp"
#include "crtassure/trialsim.hpp"

namespace crtassure::io {

using json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 20240607;
inline constexpr std::size_t kDefaultDraws = 10000;

struct SearchSettings {
    Method mode = Method::assurance;
    double target = 0.8;
    Direction direction = Direction::cluster_size;
    int n_max = 10000;
    int c_max = 10000;
    /// Cluster sizes for curve outputs.
    std::vector<double> cluster_sizes;

    friend bool operator==(const SearchSettings&, const SearchSettings&) = default;
};

struct ComparisonSettings {
    std::vector<int> clusters;
    std::vector<LabelledPrior> scenarios;

    friend bool operator==(const ComparisonSettings&, const ComparisonSettings&) = default;
};

struct ScenarioDocument {
    std::string name;
    std::string description;
    DesignConfig design;
    /// Mean cluster size for operations evaluated at a fixed design.
    std::optional<int> cluster_size;
    PriorSpec prior;
    /// Explicit ψ for power-mode calculations; defaults to power_point(prior).
    std::optional<NuisanceParams> point;
    SearchSettings search;
    std::vector<double> nu_values;
    ComparisonSettings compare;
    std::size_t reps = 10000;
    std::vector<std::string> outputs;

    NuisanceParams power_psi() const;
    EvaluationSpec evaluation_spec(Method method) const;

    friend bool operator==(const ScenarioDocument&, const ScenarioDocument&) = default;
};

/// Builds and validates a scenario from a JSON value (YAML files are
/// converted first). Relative sample-file paths resolve against base_dir.
/// Throws ValidationError with a JSON-pointer path.
ScenarioDocument scenario_from_json(const json& doc, const std::string& base_dir = ".");
/// Canonical JSON form; scenario_from_json(scenario_to_json(d)) == d.
json scenario_to_json(const ScenarioDocument& doc);

/// Parses YAML scenario text into JSON. Throws ParseError with line/column.
json parse_scenario_text(std::string_view text, const std::string& source_name);
/// Reads a scenario file (or bundled preset name) without validating it.
json load_scenario_json(const std::string& path_or_preset, std::string* base_dir = nullptr);
ScenarioDocument load_scenario(const std::string& path_or_preset);

json prior_to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const json& value, const std::string& path = "/prior",
                          const std::string& base_dir = ".");

struct Preset {
    std::string_view name;
    std::string_view text;
};
const std::vector<Preset>& bundled_presets();
std::optional<std::string_view> find_preset(std::string_view name);

/// JSON Schema (draft 2020-12) describing scenario documents.
const json& scenario_schema();

// ---------------------------------------------------------------------------
// Results

struct PowerResult {
    double value = 0.0;
    double delta = 0.0;
    NuisanceParams psi;
    int clusters = 0;
    double n_bar = 0.0;
    WaldTest test;
    double plateau = 0.0;

    friend bool operator==(const PowerResult&, const PowerResult&) = default;
};

struct AssuranceResult {
    AssuranceEstimate estimate;
    double plateau = 0.0;

    friend bool operator==(const AssuranceResult&, const AssuranceResult&) = default;
};

struct ValidationRow {
    std::string label;
    double delta = 0.0;
    double nu = 0.0;
    EmpiricalPower empirical;
    double tolerance = 0.0;
    bool passed = false;

    friend bool operator==(const ValidationRow&, const ValidationRow&) = default;
};

using ResultPayload =
    std::variant<PowerResult, AssuranceResult, SampleSizeResult, std::vector<CurvePoint>,
                 std::vector<NuCurve>, std::vector<SensitivityRow>, std::vector<ValidationRow>>;

/// A completed run with everything needed to regenerate it.
struct ResultDocument {
    std::string operation;
    std::uint64_t seed = 0;
    std::size_t draws = 0;
    std::string spec_digest;
    ResultPayload payload;

    friend bool operator==(const ResultDocument&, const ResultDocument&) = default;
};

json result_to_json(const ResultDocument& result);
ResultDocument result_from_json(const json& value);

enum class OutputFormat { json, csv };
/// json for ".json", csv for ".csv"; anything else is a DomainError.
OutputFormat format_for_path(const std::string& path);

/// Delimited view: comma-separated, '.' decimal, LF endings, header row.
std::string result_to_csv(const ResultDocument& result);
void write_results(const ResultDocument& result, const std::string& path, OutputFormat format);
ResultDocument read_results(const std::string& path);

}  // namespace crtassure::io
