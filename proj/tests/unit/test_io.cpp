#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crtassure/errors.hpp"
#include "crtassure/io.hpp"
#include "crtassure/runner.hpp"

using namespace crtassure;
using io::json;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("crtassure_test_" + name);
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json minimal() {
    return json::parse(R"({"design": {"delta": 2.52, "clusters": 40},
                           "prior": {"sigma": 8.32, "rho": 0.0296, "nu": 0.49}})");
}

std::string error_path(const json& doc) {
    try {
        io::scenario_from_json(doc);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "";
}

}  // namespace

TEST_CASE("bundled power preset") {
    const auto doc = io::load_scenario("icons_power");
    CHECK(doc.design.delta_m == 2.52);
    CHECK(doc.design.test.alpha == 0.05);
    CHECK(doc.design.test.sided == Sidedness::two);
    CHECK(doc.design.clusters == 40);
    CHECK(doc.prior.is_point());
    CHECK(doc.power_psi() == NuisanceParams{8.32, 0.0296, 0.49});
}

TEST_CASE("all presets load and round-trip through canonical JSON") {
    REQUIRE(io::bundled_presets().size() == 4);
    for (const auto& p : io::bundled_presets()) {
        INFO(p.name);
        const auto doc = io::load_scenario(std::string(p.name));
        const auto again = io::scenario_from_json(io::scenario_to_json(doc));
        CHECK(again == doc);
        CHECK(p.text.find("#") != std::string_view::npos);
    }
    const auto full = io::load_scenario("icons_assurance_full_psi");
    const auto& copula = std::get<CopulaJointSpec>(full.prior.joint);
    CHECK(copula.gamma_corr == 0.44);
    CHECK(std::get<dist::GammaSpec>(copula.sigma).shape == doctest::Approx(69.2224));
    CHECK(std::get<dist::GammaSpec>(full.prior.nu).mean() == doctest::Approx(0.49));
}

TEST_CASE("validation errors carry JSON-pointer paths") {
    auto doc = minimal();
    doc["prior"]["rho"] = 1.0;
    CHECK(error_path(doc) == "/prior/rho");
    try {
        io::scenario_from_json(doc);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("[0, 1)") != std::string::npos);
    }
    doc = minimal();
    doc["design"]["colours"] = 3;
    CHECK(error_path(doc) == "/design/colours");
    doc = minimal();
    doc["design"]["clusters"] = 41;
    CHECK(error_path(doc) == "/design/clusters");
    doc = minimal();
    doc["prior"]["sigma"] = json{{"gamma", {{"shape", -1}, {"rate", 1}}}};
    CHECK(error_path(doc) == "/prior/sigma/gamma/shape");
    doc = minimal();
    doc["prior"].erase("nu");
    CHECK(error_path(doc) == "/prior/nu");
    doc = minimal();
    doc["compare"] = json{{"scenarios", json::array({json{{"label", "x"}, {"prior", {{"nu", -1}}}}})}};
    CHECK(error_path(doc) == "/compare/scenarios/0/prior/nu");
    doc = minimal();
    doc["outputs"] = json::array({"result.txt"});
    CHECK(error_path(doc) == "/outputs/0");
}

TEST_CASE("YAML parse errors report line and column") {
    try {
        io::parse_scenario_text("design:\n  delta: 2.52\n  clusters: [40\n", "bad.scenario");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 3);
        CHECK(std::string(e.what()).find("bad.scenario:") == 0);
    }
    CHECK_THROWS_AS(io::parse_scenario_text("a: 1\na: 2\n", "dup"), ParseError);
    const auto j = io::parse_scenario_text("x: '12'\ny: 12\nz: 1.5e-3\nw: two\n", "t");
    CHECK(j["x"].is_string());
    CHECK(j["y"].is_number_integer());
    CHECK(j["z"].get<double>() == 1.5e-3);
    CHECK(j["w"] == "two");
}

TEST_CASE("ICC samples file referenced from a scenario") {
    const auto dir = std::filesystem::temp_directory_path() / "crtassure_test_dir";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "icc.txt");
        out << "# draws\n0.01\n0.02\n0.04\n0.08\n0.16\n";
    }
    {
        std::ofstream out(dir / "s.scenario");
        out << "design: {delta: 2.52, clusters: 40}\n"
               "prior:\n  sigma: 8.32\n  nu: 0.49\n  rho: {samples_file: icc.txt}\n";
    }
    const auto doc = io::load_scenario((dir / "s.scenario").string());
    const auto& rho = std::get<dist::EmpiricalDist>(std::get<IndependentJoint>(doc.prior.joint).rho);
    CHECK(rho.size() == 5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing scenario is a validation error, not an I/O error") {
    CHECK_THROWS_AS(io::load_scenario("/nonexistent/file.scenario"), ValidationError);
}

TEST_CASE("every result type round-trips through JSON files") {
    auto base = io::load_scenario("icons_assurance_rho_only");
    base.design.draws = 500;
    base.reps = 200;
    base.search.cluster_sizes = {5, 10, 15};
    base.nu_values = {0.0, 0.5};
    auto point = io::load_scenario("icons_power");
    point.reps = 200;
    const std::pair<const char*, io::ScenarioDocument> cases[] = {
        {"power", point},         {"assurance", base}, {"samplesize", base},
        {"curve", base},          {"nu-sweep", base},  {"compare-priors", base},
        {"validate", point},
    };
    for (const auto& [op, doc] : cases) {
        INFO(op);
        const auto result = run::run_operation(op, doc);
        const auto path = temp_file(std::string(op) + ".json");
        io::write_results(result, path.string(), io::OutputFormat::json);
        const auto back = io::read_results(path.string());
        CHECK(back == result);
        const auto j = json::parse(read_text(path));
        CHECK(j.contains("seed"));
        CHECK(j.contains("draws"));
        CHECK(j.contains("spec_digest"));
        std::filesystem::remove(path);
    }
}

TEST_CASE("delimited output shapes") {
    io::ResultDocument r;
    r.operation = "curve";
    r.payload = std::vector<CurvePoint>{{1, 0.1, 0.01}, {2, 0.2, 0.01}, {3, 0.3, 0.0}};
    const auto path = temp_file("curve.csv");
    io::write_results(r, path.string(), io::format_for_path(path.string()));
    const auto text = read_text(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.rfind("n_bar,value,mc_stderr\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::filesystem::remove(path);

    SampleSizeResult s;
    s.method = Method::power;
    s.n_bar = 9;
    s.clusters = 50;
    s.n_total = 450;
    s.feasible = true;
    s.seed = 5;
    r.payload = s;
    const auto csv = io::result_to_csv(r);
    CHECK(csv.find("n_bar") != std::string::npos);
    CHECK(csv.find("n_total") != std::string::npos);
    CHECK(csv.find("plateau") != std::string::npos);
    CHECK(csv.find("seed") != std::string::npos);
    CHECK_THROWS_AS(io::format_for_path("x.xlsx"), DomainError);
    CHECK_THROWS_AS(io::write_results(r, "/nonexistent/dir/out.json", io::OutputFormat::json), IoError);
}

TEST_CASE("sensitivity grid has the comparison-table layout") {
    io::ResultDocument r;
    r.payload = std::vector<SensitivityRow>{
        {"original", 50, 12, 600, Method::assurance, true, 0.81, 0.9},
        {"original", 50, 9, 450, Method::power, true, 0.80, 0.99},
        {"original", 40, 18, 720, Method::assurance, true, 0.80, 0.88},
        {"original", 40, 12, 480, Method::power, true, 0.80, 0.99},
        {"top12", 50, 15, 750, Method::assurance, true, 0.80, 0.9},
        {"top12", 50, 9, 450, Method::power, true, 0.80, 0.99},
        {"top12", 40, 0, 0, Method::assurance, false, 0.0, 0.7},
        {"top12", 40, 12, 480, Method::power, true, 0.80, 0.99},
    };
    const auto csv = io::result_to_csv(r);
    CHECK(csv ==
          "scenario,C50_assurance_n_bar,C50_assurance_N,C50_power_n_bar,C50_power_N,"
          "C40_assurance_n_bar,C40_assurance_N,C40_power_n_bar,C40_power_N\n"
          "original,12,600,9,450,18,720,12,480\n"
          "top12,15,750,9,450,NA,NA,12,480\n");
}
