#include "crtassure/service.hpp"

#include <chrono>
#include <cstdlib>
#include <future>
#include <memory>
#include <thread>

#include <httplib.h>

#include "crtassure/digest.hpp"
#include "crtassure/errors.hpp"
#include "crtassure/io.hpp"
#include "crtassure/runner.hpp"

namespace crtassure::service {

namespace {

using io::json;

constexpr std::string_view kPrefix = "/api/";
constexpr std::string_view kEndpoints[] = {"power", "curve", "assurance", "samplesize",
                                           "nu-sweep", "compare-priors"};

Response json_response(int status, const json& body) {
    Response r;
    r.status = status;
    r.body = body.dump();
    r.headers["Content-Type"] = "application/json";
    return r;
}

Response error_response(int status, const std::string& path, const std::string& message,
                        json extra = json::object()) {
    json err{{"status", status}, {"path", path}, {"message", message}};
    for (auto& [k, v] : extra.items()) {
        err[k] = v;
    }
    return json_response(status, json{{"error", err}});
}

bool contains_key(const json& value, std::string_view key) {
    if (value.is_object()) {
        for (const auto& [k, v] : value.items()) {
            if (k == key || contains_key(v, key)) {
                return true;
            }
        }
    } else if (value.is_array()) {
        for (const auto& v : value) {
            if (contains_key(v, key)) {
                return true;
            }
        }
    }
    return false;
}

/// Body is a scenario, or {"preset": name, ...} merged over that preset.
json resolve_request(const json& body) {
    if (!body.is_object()) {
        throw ValidationError("/", "request body must be a JSON object");
    }
    if (!body.contains("preset")) {
        return body;
    }
    if (!body["preset"].is_string()) {
        throw ValidationError("/preset", "expected a preset name");
    }
    const auto name = body["preset"].get<std::string>();
    const auto text = io::find_preset(name);
    if (!text) {
        throw ValidationError("/preset", "unknown preset '" + name + "'");
    }
    json merged = io::parse_scenario_text(*text, "preset:" + name);
    json patch = body;
    patch.erase("preset");
    merged.merge_patch(patch);
    return merged;
}

void enforce_limits(const std::string& operation, const io::ScenarioDocument& doc,
                    const Limits& limits) {
    if (doc.design.draws > limits.max_draws) {
        throw ValidationError("/design/draws", "at most " + std::to_string(limits.max_draws) +
                                                   " Monte Carlo draws per request");
    }
    std::size_t points = 0;
    const std::size_t per_curve =
        doc.search.cluster_sizes.empty() ? run::default_cluster_sizes().size()
                                         : doc.search.cluster_sizes.size();
    if (operation == "curve") {
        points = per_curve;
    } else if (operation == "nu-sweep") {
        points = per_curve * (doc.nu_values.empty() ? run::default_nu_values().size()
                                                    : doc.nu_values.size());
    }
    if (points > limits.max_curve_points) {
        throw ValidationError("/search/cluster_sizes",
                              "at most " + std::to_string(limits.max_curve_points) +
                                  " curve points per request, got " + std::to_string(points));
    }
}

Response run_endpoint(const std::string& operation, const std::string& body, const Limits& limits) {
    json request;
    try {
        request = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_response(400, "/", std::string("invalid JSON: ") + e.what());
    }

    json resolved;
    io::ScenarioDocument doc;
    try {
        resolved = resolve_request(request);
        if (contains_key(resolved, "samples_file")) {
            throw ValidationError("/prior", "sample files are not read by the service; send the "
                                            "values inline as 'samples'");
        }
        doc = io::scenario_from_json(resolved);
        enforce_limits(operation, doc, limits);
    } catch (const ValidationError& e) {
        return error_response(400, e.path(), e.what());
    } catch (const ParseError& e) {
        return error_response(400, "/preset", e.what());
    }
    const std::string request_digest = digest_hex(operation + "\n" + resolved.dump());

    // The computation runs on its own thread so the budget can be enforced;
    // an abandoned computation finishes in the background and is discarded.
    auto task = std::make_shared<std::packaged_task<io::ResultDocument()>>(
        [operation, doc] { return run::run_operation(operation, doc); });
    auto future = task->get_future();
    const auto start = std::chrono::steady_clock::now();
    std::thread([task] { (*task)(); }).detach();
    if (future.wait_for(limits.time_budget) != std::future_status::ready) {
        return error_response(503, "/", "computation exceeded the time budget of " +
                                            std::to_string(limits.time_budget.count()) + " ms",
                              json{{"request_digest", request_digest}});
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    Response response;
    try {
        const auto result = future.get();
        json out = io::result_to_json(result);
        out["request_digest"] = request_digest;
        if (run::is_infeasible(result)) {
            const auto& s = std::get<SampleSizeResult>(result.payload);
            response = error_response(
                422, "/design/clusters",
                "infeasible design: plateau " + std::to_string(s.plateau) +
                    " is below the target; increase the number of clusters",
                json{{"plateau", s.plateau}, {"target", s.target}, {"clusters", s.clusters},
                     {"request_digest", request_digest}, {"result", out}});
        } else {
            response = json_response(200, out);
        }
    } catch (const ValidationError& e) {
        response = error_response(400, e.path(), e.what());
    } catch (const DomainError& e) {
        response = error_response(400, "/", e.what());
    } catch (const InfeasibleDesign& e) {
        response = error_response(422, "/design/clusters", e.what(),
                                  json{{"plateau", e.plateau()}, {"target", e.target()}});
    } catch (const SearchLimitExceeded& e) {
        response = error_response(422, "/search", e.what());
    }
    response.headers["X-Request-Digest"] = request_digest;
    response.headers["X-Compute-Time-Ms"] = std::to_string(elapsed.count());
    return response;
}

json presets_body() {
    json list = json::array();
    for (const auto& p : io::bundled_presets()) {
        list.push_back({{"name", p.name}, {"scenario", io::parse_scenario_text(p.text, "preset")}});
    }
    return json{{"presets", list}};
}

}  // namespace

Response handle(const std::string& method, const std::string& path, const std::string& body,
                const Limits& limits) {
    try {
        if (method == "GET") {
            if (path == "/healthz") {
                return json_response(200, json{{"status", "ok"}});
            }
            if (path == "/api/presets") {
                return json_response(200, presets_body());
            }
            if (path == "/api/schema") {
                return json_response(200, io::scenario_schema());
            }
        }
        if (path.starts_with(kPrefix)) {
            const std::string operation = path.substr(kPrefix.size());
            for (auto endpoint : kEndpoints) {
                if (operation == endpoint) {
                    if (method != "POST") {
                        return error_response(405, path, "use POST");
                    }
                    return run_endpoint(operation, body, limits);
                }
            }
        }
        return error_response(404, path, "no such endpoint");
    } catch (const std::exception& e) {
        return error_response(500, path, e.what());
    }
}

ServerConfig config_from_env(ServerConfig base) {
    if (const char* v = std::getenv("CRTASSURE_BIND")) {
        base.bind = v;
    }
    if (const char* v = std::getenv("CRTASSURE_PORT")) {
        base.port = std::atoi(v);
    }
    if (const char* v = std::getenv("CRTASSURE_CORS_ORIGIN")) {
        base.cors_origin = v;
    }
    if (const char* v = std::getenv("CRTASSURE_WORKERS")) {
        base.workers = static_cast<std::size_t>(std::max(1, std::atoi(v)));
    }
    if (const char* v = std::getenv("CRTASSURE_TIME_BUDGET_MS")) {
        base.limits.time_budget = std::chrono::milliseconds(std::max(1, std::atoi(v)));
    }
    return base;
}

bool serve(const ServerConfig& config) {
    httplib::Server server;
    const std::size_t workers = std::max<std::size_t>(1, config.workers);
    server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };

    const auto limits = config.limits;
    auto forward = [limits](const httplib::Request& req, httplib::Response& res) {
        const auto r = handle(req.method, req.path, req.body, limits);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) {
            if (k != "Content-Type") {
                res.set_header(k, v);
            }
        }
        res.set_content(r.body, "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    const std::string origin = config.cors_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Expose-Headers", "X-Request-Digest, X-Compute-Time-Ms");
        }
    });
    return server.listen(config.bind, config.port);
}

}  // namespace crtassure::service
