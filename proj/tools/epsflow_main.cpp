// Command-line front end. Subcommands: run, solve, flow, associate,
// conditions. Flags override config-file keys; EPSFLOW_OUT overrides both.
// Exit codes: 0 ok, 1 assertion failure, 2 bad configuration, 3 numerical
// failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <epsflow/scenarios.hpp>

namespace {

using epsflow::ConfigError;
using json = nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::string scenario;
    std::string step_case;
    std::string out;
    double eps_min = 0.0;
    double eps_max = 0.0;
    double tol = 0.0;
    std::size_t eps_count = 0;
    std::size_t grid_t = 0;
    std::size_t grid_p = 0;
    CLI::Option* o_config = nullptr;
    CLI::Option* o_scenario = nullptr;
    CLI::Option* o_case = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_eps_min = nullptr;
    CLI::Option* o_eps_max = nullptr;
    CLI::Option* o_eps_count = nullptr;
    CLI::Option* o_tol = nullptr;
    CLI::Option* o_grid_t = nullptr;
    CLI::Option* o_grid_p = nullptr;
};

void attach_common(CLI::App& sub, CommonOpts& o) {
    o.o_scenario =
        sub.add_option("scenario", o.scenario, "marsden, torus, hierarchy, or custom");
    o.o_config = sub.add_option("--config", o.config_path, "JSON config file");
    o.o_eps_min = sub.add_option("--epsilon-min", o.eps_min, "smallest net member");
    o.o_eps_max = sub.add_option("--epsilon-max", o.eps_max, "largest net member");
    o.o_eps_count = sub.add_option("--epsilon-count", o.eps_count, "net size");
    o.o_tol = sub.add_option("--tol", o.tol, "solver error target per step");
    o.o_grid_t = sub.add_option("--grid-t", o.grid_t, "time nodes (odd, so t=0 is a node)");
    o.o_grid_p = sub.add_option("--grid-p", o.grid_p, "spatial grid points");
    o.o_case = sub.add_option("--case", o.step_case, "field variant")
                   ->check(CLI::IsMember({"a", "b", "c"}));
    o.o_out = sub.add_option("--out", o.out, "output directory");
}

// Flag values are layered onto the file contents, then the whole object goes
// through the one strict parser so every path is validated identically.
epsflow::RunConfig load_config(const CommonOpts& o) {
    json j = json::object();
    if (*o.o_config) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("config: cannot open '" + o.config_path + "'");
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    }
    try {
        if (*o.o_scenario) j["scenario"] = o.scenario;
        if (*o.o_case) j["case"] = o.step_case;
        if (*o.o_eps_min) j["net"]["eps_min"] = o.eps_min;
        if (*o.o_eps_max) j["net"]["eps_max"] = o.eps_max;
        if (*o.o_eps_count) j["net"]["count"] = o.eps_count;
        if (*o.o_tol) j["tolerances"]["ivp"] = o.tol;
        if (*o.o_grid_t) j["grid"]["t_count"] = o.grid_t;
        if (*o.o_grid_p) j["grid"]["p_count"] = o.grid_p;
        if (*o.o_out) j["out"] = o.out;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    epsflow::RunConfig cfg = epsflow::parse_config(j);
    if (const char* env = std::getenv("EPSFLOW_OUT"); env && *env) cfg.out = env;
    return cfg;
}

void report_written(const epsflow::RunArtifacts& art, const std::string& out_dir) {
    std::cout << "wrote " << art.files.size() << " file" << (art.files.size() == 1 ? "" : "s")
              << " to " << out_dir << '\n';
}

int cmd_run(const CommonOpts& o) {
    const epsflow::RunConfig cfg = load_config(o);
    const epsflow::RunArtifacts art = epsflow::run_scenario(cfg);
    epsflow::write_artifacts(art, cfg.out);
    for (const auto& a : art.report.at("assertions")) {
        std::cout << (a.at("passed").get<bool>() ? "[pass] " : "[FAIL] ")
                  << a.at("name").get<std::string>() << ": "
                  << a.at("detail").get<std::string>() << '\n';
    }
    for (const auto& line : art.report.at("lines"))
        std::cout << "  " << line.get<std::string>() << '\n';
    report_written(art, cfg.out);
    if (!art.ok) {
        std::cerr << "epsflow: " << art.failures.size() << " assertion(s) failed\n";
        return 1;
    }
    return 0;
}

int cmd_solve(const CommonOpts& o) {
    const epsflow::RunConfig cfg = load_config(o);
    const epsflow::RunArtifacts art = epsflow::run_solve(cfg);
    std::cout << "field " << art.report.at("field").get<std::string>() << ", "
              << art.report.at("trajectories").get<std::size_t>() << " trajectories\n";
    epsflow::write_artifacts(art, cfg.out);
    report_written(art, cfg.out);
    return 0;
}

int cmd_flow(const CommonOpts& o) {
    const epsflow::RunConfig cfg = load_config(o);
    const epsflow::RunArtifacts art = epsflow::run_flow(cfg);
    std::cout << art.report.at("uniform_summary").at("conclusion").get<std::string>() << '\n';
    epsflow::write_artifacts(art, cfg.out);
    report_written(art, cfg.out);
    return 0;
}

int cmd_conditions(const CommonOpts& o) {
    const epsflow::RunConfig cfg = load_config(o);
    const epsflow::RunArtifacts art = epsflow::run_conditions(cfg);
    for (const auto& [name, rep] : art.report.at("conditions").items()) {
        std::cout << name << ": " << rep.at("verdict").get<std::string>() << " ("
                  << rep.at("growth").at("class").get<std::string>() << ")\n";
    }
    epsflow::write_artifacts(art, cfg.out);
    report_written(art, cfg.out);
    return 0;
}

int cmd_associate(const CommonOpts& o, const std::string& notion) {
    const epsflow::RunConfig cfg = load_config(o);
    const epsflow::RunArtifacts art = epsflow::run_associate(cfg, notion);
    if (art.report.contains("verdict")) {
        const auto& v = art.report.at("verdict");
        std::cout << v.at("notion").get<std::string>() << ": "
                  << v.at("verdict").get<std::string>() << '\n';
    } else {
        for (const char* key : {"sine", "comb"}) {
            const auto& v = art.report.at(key);
            std::cout << key << " " << v.at("notion").get<std::string>() << ": "
                      << v.at("verdict").get<std::string>() << '\n';
        }
    }
    epsflow::write_artifacts(art, cfg.out);
    report_written(art, cfg.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized flows of singular vector fields: nets, limits, verdicts"};
    app.require_subcommand(1);

    CommonOpts run_o, solve_o, flow_o, assoc_o, cond_o;
    std::string notion;

    CLI::App* run = app.add_subcommand("run", "full scenario with preset assertions");
    attach_common(*run, run_o);
    CLI::App* solve = app.add_subcommand("solve", "trajectory bundle for every net member");
    attach_common(*solve, solve_o);
    CLI::App* flow = app.add_subcommand("flow", "flow table and uniform-conditions digest");
    attach_common(*flow, flow_o);
    CLI::App* assoc = app.add_subcommand("associate", "one association notion");
    attach_common(*assoc, assoc_o);
    assoc->add_option("--notion", notion, "zero, pw, pwae, model, assoc-Rn, fast, fast-off-layer")
        ->required();
    CLI::App* cond = app.add_subcommand("conditions", "hypothesis checkers on the field");
    attach_common(*cond, cond_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return 0;
        std::cerr << "epsflow: configuration error: invalid command line\n";
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_o);
        if (solve->parsed()) return cmd_solve(solve_o);
        if (flow->parsed()) return cmd_flow(flow_o);
        if (assoc->parsed()) return cmd_associate(assoc_o, notion);
        if (cond->parsed()) return cmd_conditions(cond_o);
    } catch (const ConfigError& e) {
        std::cerr << "epsflow: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "epsflow: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const epsflow::NumericalError& e) {
        std::cerr << "epsflow: numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "epsflow: error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
