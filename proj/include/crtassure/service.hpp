#pragma once

// JSON-over-HTTP front end. Request handling is a pure function of
// (method, path, body) so it can be tested without sockets; serve() wires it
// to cpp-httplib.

#include <chrono>
#include <cstddef>
#include <map>
#include <string>

namespace crtassure::service {

struct Limits {
    std::size_t max_draws = 1000000;
    std::size_t max_curve_points = 1000;
    std::chrono::milliseconds time_budget{30000};
};

struct Response {
    int status = 200;
    std::string body;
    std::map<std::string, std::string> headers;
};

/// Handles one request. Never throws; unexpected failures become 500.
Response handle(const std::string& method, const std::string& path, const std::string& body,
                const Limits& limits = {});

struct ServerConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
    std::string cors_origin = "*";
    std::size_t workers = 4;
    Limits limits;
};

/// Reads CRTASSURE_BIND, CRTASSURE_PORT, CRTASSURE_CORS_ORIGIN,
/// CRTASSURE_WORKERS and CRTASSURE_TIME_BUDGET_MS over the defaults.
ServerConfig config_from_env(ServerConfig base = {});

/// Blocks serving requests until the process is stopped. Returns false if
/// the address could not be bound.
bool serve(const ServerConfig& config);

}  // namespace crtassure::service
