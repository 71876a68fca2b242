// Command-line front end. Every subcommand builds a scenario document
// (flags > scenario file > defaults), validates it, runs one operation and
// prints a plain-text summary; --out writes machine-readable files.
//
// Exit codes: 0 success, 1 infeasible design, 2 validation or usage error,
// 3 I/O error.

#include <charconv>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crtassure/errors.hpp"
#include "crtassure/io.hpp"
#include "crtassure/runner.hpp"
#include "crtassure/service.hpp"

namespace {

using crtassure::io::json;

enum Exit { kOk = 0, kInfeasible = 1, kUsage = 2, kIo = 3 };

/// Flag text as a JSON scalar: integers and reals become numbers, anything
/// else stays a string and is reported by the schema.
json scalar(const std::string& text) {
    const char* first = text.data();
    const char* last = first + text.size();
    std::uint64_t u = 0;
    if (auto [p, ec] = std::from_chars(first, last, u); ec == std::errc() && p == last) {
        return u;
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

json list_of_scalars(const std::string& text) {
    json out = json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string::npos ? text.size() : comma;
        out.push_back(scalar(text.substr(start, end - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

void set_pointer(json& doc, const std::string& pointer, json value) {
    doc[json::json_pointer(pointer)] = std::move(value);
}

/// One flag bound to a location in the scenario document.
struct Override {
    std::string value;
    CLI::Option* option = nullptr;
    std::string pointer;
    bool as_list = false;
    bool as_text = false;

    bool given() const { return option != nullptr && option->count() > 0; }
    json to_json() const {
        if (as_text) {
            return value;
        }
        return as_list ? list_of_scalars(value) : scalar(value);
    }
};

struct Command {
    std::string operation;
    CLI::App* app = nullptr;
    std::string scenario;
    std::vector<std::string> outputs;
    std::vector<std::unique_ptr<Override>> overrides;
    std::map<std::string, std::unique_ptr<Override>> psi;  // sigma, rho, nu

    Override& add(const std::string& flag, const std::string& pointer, const std::string& help,
                  bool as_list = false, bool as_text = false) {
        auto o = std::make_unique<Override>();
        o->pointer = pointer;
        o->as_list = as_list;
        o->as_text = as_text;
        o->option = app->add_option(flag, o->value, help);
        overrides.push_back(std::move(o));
        return *overrides.back();
    }

    void add_psi(const std::string& name, const std::string& help) {
        auto o = std::make_unique<Override>();
        o->option = app->add_option("--" + name, o->value, help);
        psi[name] = std::move(o);
    }
};

void add_design_flags(Command& c, bool clusters_as_list = false) {
    c.add("--delta", "/design/delta", "MCID delta_M in outcome units (required without a scenario)");
    c.add("--alpha", "/design/alpha", "significance level [default: 0.05]");
    c.add("--sided", "/design/sided", "one or two [default: two]", false, true);
    if (clusters_as_list) {
        c.add("--clusters", "/compare/clusters",
              "comma-separated even cluster counts, e.g. 50,40 [default: design clusters]", true);
    } else {
        c.add("--clusters", "/design/clusters", "number of clusters C, even, both arms together");
    }
    c.add("--cluster-size", "/design/cluster_size", "mean cluster size n_bar (individuals)");
    c.add("--seed", "/design/seed", "random seed [default: 20240607]");
}

void add_mc_flags(Command& c) {
    c.add("--draws", "/design/draws", "Monte Carlo draws S from the prior [default: 10000]");
}

void add_search_flags(Command& c) {
    c.add("--target", "/search/target", "target power or assurance [default: 0.8]");
    c.add("--mode", "/search/mode", "power or assurance [default: assurance]", false, true);
    c.add("--n-max", "/search/n_max", "largest cluster size searched [default: 10000]");
}

/// Base document when no scenario is given: point priors from flags.
json bare_scenario(const Command& c) {
    json doc{{"design", json::object()}, {"prior", json::object()}};
    for (const auto& [name, o] : c.psi) {
        if (o->given()) {
            doc["prior"][name] = scalar(o->value);
        }
    }
    if (!c.psi.empty()) {
        doc["search"] = {{"mode", "power"}};
    }
    return doc;
}

crtassure::io::ScenarioDocument build(Command& c) {
    json doc;
    std::string base_dir = ".";
    const bool has_scenario = !c.scenario.empty();
    if (has_scenario) {
        doc = crtassure::io::load_scenario_json(c.scenario, &base_dir);
    } else {
        doc = bare_scenario(c);
    }
    json patch = json::object();
    for (const auto& o : c.overrides) {
        if (o->given()) {
            set_pointer(patch, o->pointer, o->to_json());
        }
    }
    doc.merge_patch(patch);

    bool psi_given = false;
    for (const auto& [_, o] : c.psi) {
        psi_given = psi_given || o->given();
    }
    if (has_scenario && psi_given) {
        // Point values start from the scenario's power point.
        const auto current = crtassure::io::scenario_from_json(doc, base_dir).power_psi();
        json point{{"sigma", current.sigma}, {"rho", current.rho}, {"nu", current.nu}};
        for (const auto& [name, o] : c.psi) {
            if (o->given()) {
                point[name] = scalar(o->value);
            }
        }
        doc["point"] = point;
    }
    return crtassure::io::scenario_from_json(doc, base_dir);
}

int execute(Command& c) {
    const auto doc = build(c);
    const auto result = crtassure::run::run_operation(c.operation, doc);
    std::cout << crtassure::run::describe(result);
    const auto& outputs = c.outputs.empty() ? doc.outputs : c.outputs;
    for (const auto& path : outputs) {
        crtassure::io::write_results(result, path, crtassure::io::format_for_path(path));
        std::cout << "wrote " << path << '\n';
    }
    return crtassure::run::is_infeasible(result) ? kInfeasible : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample size, power and assurance for two-arm cluster randomised trials"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"power", "power of the Wald test at fixed nuisance parameters"},
        {"assurance", "assurance (prior-averaged power) at a fixed design"},
        {"samplesize", "smallest cluster size (or cluster count) reaching the target"},
        {"curve", "power or assurance over a range of cluster sizes"},
        {"nu-sweep", "assurance curves for a grid of cluster-size CVs"},
        {"compare-priors", "power vs assurance sample sizes across alternative priors"},
        {"validate", "check the power formula against simulated trials"},
    };

    std::vector<std::unique_ptr<Command>> commands;
    for (const auto& s : specs) {
        auto c = std::make_unique<Command>();
        c->operation = s.name;
        c->app = app.add_subcommand(s.name, s.help);
        c->app->add_option("--scenario", c->scenario,
                           "scenario file or bundled preset name (icons_power, "
                           "icons_assurance_rho_only, icons_assurance_full_psi, "
                           "icons_compare_priors)");
        c->app->add_option("--out", c->outputs,
                           "write results to this path; .json or .csv (repeatable)");
        const std::string op = s.name;
        add_design_flags(*c, op == "compare-priors");
        if (op == "power" || op == "validate") {
            c->add_psi("sigma", "outcome standard deviation sigma (outcome units)");
            c->add_psi("rho", "intra-cluster correlation rho, in [0, 1)");
            c->add_psi("nu", "coefficient of variation of cluster size nu, >= 0");
        }
        if (op != "power" && op != "validate") {
            add_mc_flags(*c);
        }
        if (op == "samplesize" || op == "nu-sweep" || op == "compare-priors" || op == "validate") {
            add_search_flags(*c);
        }
        if (op == "curve") {
            c->add("--mode", "/search/mode", "power or assurance [default: assurance]", false, true);
        }
        if (op == "samplesize") {
            c->add("--direction", "/search/direction",
                   "cluster_size (smallest n_bar at --clusters) or clusters (smallest C at "
                   "--cluster-size) [default: cluster_size]",
                   false, true);
            c->add("--c-max", "/search/c_max", "largest cluster count searched [default: 10000]");
        }
        if (op == "curve" || op == "nu-sweep") {
            c->add("--cluster-sizes", "/search/cluster_sizes",
                   "n_bar grid as start:stop:step or a comma list [default: 1:50:1]", false, true);
        }
        if (op == "nu-sweep") {
            c->add("--nu", "/sweep/nu_values",
                   "nu grid as start:stop:step or a comma list [default: 0:1:0.1]", false, true);
        }
        if (op == "validate") {
            c->add("--reps", "/validation/reps", "simulated trials per row [default: 10000]");
        }
        commands.push_back(std::move(c));
    }

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    auto config = crtassure::service::config_from_env();
    serve->add_option("--bind", config.bind, "address to bind [env CRTASSURE_BIND]")
        ->capture_default_str();
    serve->add_option("--port", config.port, "port [env CRTASSURE_PORT]")->capture_default_str();
    serve->add_option("--cors-origin", config.cors_origin,
                      "Access-Control-Allow-Origin value; empty disables [env CRTASSURE_CORS_ORIGIN]")
        ->capture_default_str();
    serve->add_option("--workers", config.workers, "worker threads [env CRTASSURE_WORKERS]")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (serve->parsed()) {
        std::cout << "listening on " << config.bind << ':' << config.port << std::endl;
        if (!crtassure::service::serve(config)) {
            std::cerr << "error: cannot listen on " << config.bind << ':' << config.port << '\n';
            return kIo;
        }
        return kOk;
    }

    for (auto& c : commands) {
        if (!c->app->parsed()) {
            continue;
        }
        try {
            return execute(*c);
        } catch (const crtassure::InfeasibleDesign& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kInfeasible;
        } catch (const crtassure::SearchLimitExceeded& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kInfeasible;
        } catch (const crtassure::ValidationError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const crtassure::ParseError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const crtassure::DomainError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const crtassure::IoError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kIo;
        }
    }
    return kUsage;
}
