#include <doctest.h>

#include "crtassure/io.hpp"
#include "crtassure/service.hpp"

using namespace crtassure;
using io::json;

namespace {

json post(const std::string& endpoint, const json& body, int expected = 200) {
    const auto r = service::handle("POST", "/api/" + endpoint, body.dump());
    CHECK(r.status == expected);
    return json::parse(r.body);
}

}  // namespace

TEST_CASE("health, presets and schema") {
    CHECK(service::handle("GET", "/healthz", "").status == 200);
    const auto presets = json::parse(service::handle("GET", "/api/presets", "").body);
    CHECK(presets["presets"].size() == 4);
    const auto schema = json::parse(service::handle("GET", "/api/schema", "").body);
    CHECK(schema["type"] == "object");
    CHECK(service::handle("GET", "/api/nothing", "").status == 404);
    CHECK(service::handle("GET", "/api/power", "").status == 405);
}

TEST_CASE("sample size from the power preset") {
    const auto r = post("samplesize", json{{"preset", "icons_power"}, {"design", {{"clusters", 50}}}});
    CHECK(r["result"]["n_bar"] == 9);
    CHECK(r["result"]["n_total"] == 450);
    CHECK(r.contains("request_digest"));
    CHECK(r.contains("seed"));
    CHECK(r.contains("draws"));
    CHECK(r.contains("spec_digest"));
}

TEST_CASE("assurance with point priors equals power") {
    const json body = {{"preset", "icons_power"}, {"design", {{"cluster_size", 12}}}};
    const auto p = post("power", body);
    json a_body = body;
    a_body["search"] = {{"mode", "assurance"}};
    const auto a = post("assurance", a_body);
    CHECK(a["result"]["value"].get<double>() == p["result"]["value"].get<double>());
}

TEST_CASE("curve over 50 points is monotone") {
    json body = {{"preset", "icons_assurance_rho_only"}, {"search", {{"cluster_sizes", "1:50:1"}}}};
    const auto r = post("curve", body);
    REQUIRE(r["result"].size() == 50);
    for (std::size_t i = 1; i < 50; ++i) {
        CHECK(r["result"][i]["value"].get<double>() >= r["result"][i - 1]["value"].get<double>());
    }
}

TEST_CASE("responses are deterministic") {
    const std::string body = R"({"preset": "icons_assurance_full_psi", "design": {"draws": 2000}})";
    const auto a = service::handle("POST", "/api/samplesize", body);
    const auto b = service::handle("POST", "/api/samplesize", body);
    CHECK(a.status == 200);
    CHECK(a.body == b.body);
    CHECK(a.headers.at("X-Request-Digest") == b.headers.at("X-Request-Digest"));
}

TEST_CASE("errors: schema, limits, infeasibility") {
    auto r = post("power", json{{"preset", "icons_power"}, {"prior", {{"rho", 1.5}}}}, 400);
    CHECK(r["error"]["path"] == "/prior/rho");
    r = post("assurance", json{{"preset", "icons_power"}, {"design", {{"draws", 2000000}}}}, 400);
    CHECK(r["error"]["path"] == "/design/draws");
    r = post("curve", json{{"preset", "icons_power"}, {"search", {{"cluster_sizes", "1:1001:1"}}}}, 400);
    r = post("samplesize", json{{"preset", "icons_power"}, {"design", {{"clusters", 4}}}, {"search", {{"target", 0.99}}}}, 422);
    CHECK(r["error"]["plateau"].get<double>() < 0.99);
    r = post("samplesize", json{{"preset", "nope"}}, 400);
    CHECK(r["error"]["path"] == "/preset");
    r = post("assurance", json{{"preset", "icons_power"}, {"prior", {{"rho", {{"samples_file", "/etc/passwd"}}}}}}, 400);
    CHECK(service::handle("POST", "/api/power", "{not json").status == 400);
}

TEST_CASE("time budget") {
    service::Limits limits;
    limits.time_budget = std::chrono::milliseconds(1);
    const std::string body =
        R"({"preset": "icons_assurance_full_psi", "design": {"draws": 100000}, "search": {"cluster_sizes": "1:200:1"}})";
    CHECK(service::handle("POST", "/api/curve", body, limits).status == 503);
}
