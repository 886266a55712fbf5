#pragma once
// Batch surface of the laboratory: a validated run configuration, the three
// scenario presets (the regularized jump flow on the circle, the transport
// field on the torus, and the association-hierarchy witnesses), and the
// single-operation runners behind the solve/flow/conditions/associate
// subcommands. Every runner returns the finished report plus the text files
// to write; nothing here touches the filesystem except write_artifacts.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "association.hpp"
#include "epsilon.hpp"
#include "errors.hpp"
#include "fields.hpp"
#include "flow.hpp"
#include "manifold.hpp"
#include "mollifier.hpp"
#include "report.hpp"

namespace epsflow {

/// Fully resolved run parameters. Every field has a scenario-dependent
/// default and is echoed into the report, so a run is reproducible from the
/// report alone.
struct RunConfig {
    std::string scenario = "marsden";  ///< marsden | torus | hierarchy | custom
    std::string field = "marsden";     ///< custom runs: marsden | torus | zero
    std::string space = "circle";      ///< zero-field carrier: circle | torus | euclidean
    StepCase step_case = StepCase::SymmetricA;

    double eps_max = 1e-2;
    double eps_min = 1e-8;
    std::size_t eps_count = 7;
    std::string scaling = "inverse-log";  ///< inverse-log | power
    double scaling_exponent = 1.0;

    /// Flow-table grids. The t grid is symmetric about 0 with an odd count,
    /// so 0 is always a node and the extraction has both time directions.
    double t_max = pi;
    std::size_t t_count = 9;
    std::size_t p_count = 60;       ///< circle nodes, or torus first-angle nodes
    std::size_t p_beta_count = 5;   ///< torus second-angle rows
    double p_min = -2.0, p_max = 2.0;  ///< euclidean carrier interval

    /// Trajectory bundle for trajectories.csv.
    double traj_t_max = 5.0;
    std::size_t traj_t_count = 201;
    std::vector<std::vector<double>> starts{{-1.2}, {-0.6}, {0.0}, {0.3}, {0.9}};

    double ivp_tol = 1e-10;
    double assoc_tol = 1e-9;
    double assoc_tol_zero = 0.1;
    double flow_defect_tol = 1e-6;

    std::vector<std::string> witness_tests{"x", "x^2", "sin"};
    std::vector<std::string> witness_densities{"bump", "bump(0.3,0.7)"};

    std::string out = "out";

    EpsilonNet net() const {
        ScalingLaw law = scaling == "power" ? ScalingLaw::power(scaling_exponent)
                                            : ScalingLaw::inverse_log();
        return make_epsilon_net(eps_max, eps_min, eps_count, law);
    }
};

inline const char* step_case_token(StepCase c) {
    switch (c) {
        case StepCase::SymmetricA: return "a";
        case StepCase::RightB: return "b";
        default: return "c";
    }
}

inline StepCase step_case_from_token(const std::string& s) {
    if (s == "a") return StepCase::SymmetricA;
    if (s == "b") return StepCase::RightB;
    if (s == "c") return StepCase::LeftC;
    throw ConfigError("config: case must be one of a, b, c (got '" + s + "')");
}

/// Scenario presets. Flow scenarios default to the deep inverse-log net; the
/// hierarchy runs on a shallower power-law net whose members keep the comb's
/// teeth representable.
inline RunConfig default_config(const std::string& scenario) {
    RunConfig cfg;
    cfg.scenario = scenario;
    if (scenario == "marsden" || scenario == "custom") return cfg;
    if (scenario == "torus") {
        cfg.field = "torus";
        cfg.space = "torus";
        cfg.t_max = 0.9;
        cfg.t_count = 21;
        cfg.p_count = 16;
        cfg.traj_t_max = 0.9;
        cfg.traj_t_count = 37;
        cfg.starts = {{-0.5, 0.0}, {-0.25, 0.5}, {0.3, 1.0}};
        return cfg;
    }
    if (scenario == "hierarchy") {
        cfg.field = "";
        cfg.space = "euclidean";
        cfg.eps_max = 1e-1;
        cfg.eps_min = 1e-4;
        cfg.scaling = "power";
        cfg.scaling_exponent = 1.0;
        cfg.starts.clear();
        return cfg;
    }
    throw ConfigError("config: scenario must be one of marsden, torus, hierarchy, custom (got '" +
                      scenario + "')");
}

namespace detail {

inline void reject_unknown(const json& j, const std::vector<std::string>& keys,
                           const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

inline double num_or(const json& j, const char* key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number())
        throw ConfigError("config: '" + where + key + "' must be a number");
    return j[key].get<double>();
}

inline std::size_t count_or(const json& j, const char* key, std::size_t fallback,
                            const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned() || j[key].get<double>() != std::floor(j[key].get<double>()))
        throw ConfigError("config: '" + where + key + "' must be a nonnegative integer");
    return j[key].get<std::size_t>();
}

inline std::string str_or(const json& j, const char* key, const std::string& fallback,
                          const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string())
        throw ConfigError("config: '" + where + key + "' must be a string");
    return j[key].get<std::string>();
}

inline std::vector<std::string> str_list_or(const json& j, const char* key,
                                            std::vector<std::string> fallback,
                                            const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array())
        throw ConfigError("config: '" + where + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j[key]) {
        if (!e.is_string())
            throw ConfigError("config: '" + where + key + "' must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace detail

inline void validate_config(const RunConfig& cfg) {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed,
                     const char* what) {
        for (const char* a : allowed)
            if (v == a) return;
        std::string msg = std::string("config: ") + what + " must be one of";
        for (const char* a : allowed) msg += std::string(" ") + a;
        throw ConfigError(msg + " (got '" + v + "')");
    };
    one_of(cfg.scenario, {"marsden", "torus", "hierarchy", "custom"}, "scenario");
    if (cfg.scenario == "custom" || !cfg.field.empty())
        one_of(cfg.field, {"marsden", "torus", "zero"}, "field");
    one_of(cfg.space, {"circle", "torus", "euclidean"}, "space");
    one_of(cfg.scaling, {"inverse-log", "power"}, "net.scaling");
    if (!(cfg.eps_min > 0.0 && cfg.eps_min < cfg.eps_max && cfg.eps_max <= 0.5))
        throw ConfigError("config: need 0 < net.eps_min < net.eps_max <= 0.5");
    if (cfg.eps_count < 4 || cfg.eps_count > 64)
        throw ConfigError("config: net.count must lie in [4, 64]");
    if (!(cfg.scaling_exponent > 0.0))
        throw ConfigError("config: net.exponent must be > 0");
    if (!(cfg.t_max > 0.0)) throw ConfigError("config: grid.t_max must be > 0");
    if (cfg.t_count < 3 || cfg.t_count % 2 == 0)
        throw ConfigError("config: grid.t_count must be odd and >= 3 so t = 0 is a node");
    if (cfg.p_count < 4) throw ConfigError("config: grid.p_count must be >= 4");
    if (cfg.p_beta_count < 4) throw ConfigError("config: grid.p_beta_count must be >= 4");
    if (!(cfg.p_min < cfg.p_max)) throw ConfigError("config: need grid.p_min < grid.p_max");
    if (!(cfg.traj_t_max > 0.0)) throw ConfigError("config: trajectories.t_max must be > 0");
    if (cfg.traj_t_count < 3 || cfg.traj_t_count % 2 == 0)
        throw ConfigError("config: trajectories.t_count must be odd and >= 3");
    if (!(cfg.ivp_tol > 0.0 && cfg.assoc_tol > 0.0 && cfg.assoc_tol_zero > 0.0 &&
          cfg.flow_defect_tol > 0.0))
        throw ConfigError("config: tolerances must all be > 0");
    const std::size_t start_dim = cfg.space == "torus" ? 2 : 1;
    for (const auto& s : cfg.starts) {
        if (s.size() != start_dim)
            throw ConfigError("config: trajectories.starts entries must have dimension " +
                              std::to_string(start_dim) + " on space " + cfg.space);
        for (double c : s)
            if (!std::isfinite(c)) throw ConfigError("config: trajectories.starts must be finite");
    }
    if (cfg.witness_tests.empty() || cfg.witness_densities.empty())
        throw ConfigError("config: witnesses.tests and witnesses.densities must be non-empty");
    for (const auto& n : cfg.witness_tests) (void)smooth_test(n);
    for (const auto& n : cfg.witness_densities) (void)named_density(n);
    if (cfg.out.empty()) throw ConfigError("config: out must be a non-empty path");
    (void)cfg.net();  // net-level invariants (monotone sigma, 4+ members)
}

/// Strict parse: every key is checked against the schema, unknown keys are
/// rejected, and absent keys take the scenario's defaults.
inline RunConfig parse_config(const json& j) {
    detail::reject_unknown(j, {"scenario", "case", "field", "space", "net", "grid",
                               "trajectories", "tolerances", "witnesses", "out"},
                           "");
    const std::string scenario = detail::str_or(j, "scenario", "marsden", "");
    RunConfig cfg = default_config(scenario);
    cfg.step_case = step_case_from_token(detail::str_or(j, "case", step_case_token(cfg.step_case), ""));
    cfg.field = detail::str_or(j, "field", cfg.field, "");
    cfg.space = detail::str_or(j, "space", cfg.space, "");
    if (j.contains("net")) {
        const json& n = j["net"];
        detail::reject_unknown(n, {"eps_max", "eps_min", "count", "scaling", "exponent"}, "net.");
        cfg.eps_max = detail::num_or(n, "eps_max", cfg.eps_max, "net.");
        cfg.eps_min = detail::num_or(n, "eps_min", cfg.eps_min, "net.");
        cfg.eps_count = detail::count_or(n, "count", cfg.eps_count, "net.");
        cfg.scaling = detail::str_or(n, "scaling", cfg.scaling, "net.");
        cfg.scaling_exponent = detail::num_or(n, "exponent", cfg.scaling_exponent, "net.");
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        detail::reject_unknown(
            g, {"t_max", "t_count", "p_count", "p_beta_count", "p_min", "p_max"}, "grid.");
        cfg.t_max = detail::num_or(g, "t_max", cfg.t_max, "grid.");
        cfg.t_count = detail::count_or(g, "t_count", cfg.t_count, "grid.");
        cfg.p_count = detail::count_or(g, "p_count", cfg.p_count, "grid.");
        cfg.p_beta_count = detail::count_or(g, "p_beta_count", cfg.p_beta_count, "grid.");
        cfg.p_min = detail::num_or(g, "p_min", cfg.p_min, "grid.");
        cfg.p_max = detail::num_or(g, "p_max", cfg.p_max, "grid.");
    }
    if (j.contains("trajectories")) {
        const json& t = j["trajectories"];
        detail::reject_unknown(t, {"t_max", "t_count", "starts"}, "trajectories.");
        cfg.traj_t_max = detail::num_or(t, "t_max", cfg.traj_t_max, "trajectories.");
        cfg.traj_t_count = detail::count_or(t, "t_count", cfg.traj_t_count, "trajectories.");
        if (t.contains("starts")) {
            if (!t["starts"].is_array())
                throw ConfigError("config: trajectories.starts must be an array of arrays");
            cfg.starts.clear();
            for (const auto& row : t["starts"]) {
                if (!row.is_array())
                    throw ConfigError("config: trajectories.starts must be an array of arrays");
                std::vector<double> s;
                for (const auto& c : row) {
                    if (!c.is_number())
                        throw ConfigError("config: trajectories.starts must hold numbers");
                    s.push_back(c.get<double>());
                }
                cfg.starts.push_back(std::move(s));
            }
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        detail::reject_unknown(t, {"ivp", "assoc", "assoc_zero", "flow_defect"}, "tolerances.");
        cfg.ivp_tol = detail::num_or(t, "ivp", cfg.ivp_tol, "tolerances.");
        cfg.assoc_tol = detail::num_or(t, "assoc", cfg.assoc_tol, "tolerances.");
        cfg.assoc_tol_zero = detail::num_or(t, "assoc_zero", cfg.assoc_tol_zero, "tolerances.");
        cfg.flow_defect_tol = detail::num_or(t, "flow_defect", cfg.flow_defect_tol, "tolerances.");
    }
    if (j.contains("witnesses")) {
        const json& w = j["witnesses"];
        detail::reject_unknown(w, {"tests", "densities"}, "witnesses.");
        cfg.witness_tests = detail::str_list_or(w, "tests", cfg.witness_tests, "witnesses.");
        cfg.witness_densities =
            detail::str_list_or(w, "densities", cfg.witness_densities, "witnesses.");
    }
    cfg.out = detail::str_or(j, "out", cfg.out, "");
    validate_config(cfg);
    return cfg;
}

/// Full echo of a resolved config; parse_config(config_to_json(c)) == c.
inline json config_to_json(const RunConfig& cfg) {
    return json{
        {"scenario", cfg.scenario},
        {"case", step_case_token(cfg.step_case)},
        {"field", cfg.field},
        {"space", cfg.space},
        {"net", json{{"eps_max", cfg.eps_max},
                     {"eps_min", cfg.eps_min},
                     {"count", cfg.eps_count},
                     {"scaling", cfg.scaling},
                     {"exponent", cfg.scaling_exponent}}},
        {"grid", json{{"t_max", cfg.t_max},
                      {"t_count", cfg.t_count},
                      {"p_count", cfg.p_count},
                      {"p_beta_count", cfg.p_beta_count},
                      {"p_min", cfg.p_min},
                      {"p_max", cfg.p_max}}},
        {"trajectories",
         json{{"t_max", cfg.traj_t_max}, {"t_count", cfg.traj_t_count}, {"starts", cfg.starts}}},
        {"tolerances", json{{"ivp", cfg.ivp_tol},
                            {"assoc", cfg.assoc_tol},
                            {"assoc_zero", cfg.assoc_tol_zero},
                            {"flow_defect", cfg.flow_defect_tol}}},
        {"witnesses", json{{"tests", cfg.witness_tests}, {"densities", cfg.witness_densities}}},
        {"out", cfg.out}};
}

/// Finished run: the report document, the text files to place in the output
/// directory, and the scenario's own pass/fail assertions.
struct RunArtifacts {
    json report;
    std::vector<std::pair<std::string, std::string>> files;
    bool ok = true;
    std::vector<std::string> failures;
};

namespace detail {

/// Symmetric time grid about 0 with an exact 0 at the center node.
inline std::vector<double> symmetric_grid(double t_max, std::size_t n) {
    std::vector<double> t(n);
    const double step = 2.0 * t_max / double(n - 1);
    for (std::size_t k = 0; k < n; ++k) t[k] = -t_max + step * double(k);
    t[(n - 1) / 2] = 0.0;
    t.back() = t_max;
    return t;
}

inline std::string utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json report_skeleton(const RunConfig& cfg, const std::string& operation) {
    return json{{"schema", "epsflow-report"},
                {"schema_version", report_schema_version},
                {"created_utc", utc_now()},
                {"operation", operation},
                {"scenario", cfg.scenario},
                {"config", config_to_json(cfg)}};
}

inline void record(RunArtifacts& art, json& list, const std::string& name, bool passed,
                   const std::string& detail) {
    list.push_back(json{{"name", name}, {"passed", passed}, {"detail", detail}});
    if (!passed) {
        art.ok = false;
        art.failures.push_back(name + ": " + detail);
    }
}

/// The scenario field for a config (custom runs pick by cfg.field).
inline VectorFieldNet make_field(const RunConfig& cfg, const EpsilonNet& net) {
    const std::string which = cfg.scenario == "custom" ? cfg.field : cfg.scenario;
    if (which == "marsden") return marsden_field(cfg.step_case, net);
    if (which == "torus") return torus_field(build_bump(cfg.step_case, false), net);
    if (which == "zero") {
        if (cfg.space == "circle") return zero_field(Space::circle(), net);
        if (cfg.space == "torus") return zero_field(Space::torus2(), net);
        return zero_field(Space::euclidean(1), net);
    }
    throw ConfigError("config: scenario '" + cfg.scenario + "' has no field to run");
}

inline std::vector<Point> make_p_grid(const RunConfig& cfg, const Space& space) {
    switch (space.kind()) {
        case Space::Kind::Circle: return circle_grid(cfg.p_count).points;
        case Space::Kind::Torus2: return torus_grid(cfg.p_count, cfg.p_beta_count).points;
        default: return euclidean_grid(cfg.p_min, cfg.p_max, std::max<std::size_t>(cfg.p_count, 4)).points;
    }
}

/// Closed-form limit flow for the two scenario fields; empty for others.
inline std::function<Point(double, const Point&)> make_limit_map(const RunConfig& cfg) {
    const std::string which = cfg.scenario == "custom" ? cfg.field : cfg.scenario;
    if (which == "marsden") {
        const StepCase cs = cfg.step_case;
        return [cs](double t, const Point& p) {
            return closed_form_marsden_limit(cs, p[0], t);
        };
    }
    if (which == "torus") {
        auto step = std::make_shared<SmoothedStep>(build_bump(cfg.step_case, false), 1.0);
        return [step](double t, const Point& p) {
            return closed_form_torus(*step, t, wrap(p[0]), p[1]).limit;
        };
    }
    if (which == "zero") {
        return [](double, const Point& p) { return p; };
    }
    return {};
}

/// Largest jump of the limit map across the field's layer centers at the
/// slice extremes. delta brackets the line; anything above 0.1 is a jump no
/// continuous limit could produce at that scale.
inline double limit_jump(const std::function<Point(double, const Point&)>& psi,
                         const VectorFieldNet& f, double t_max) {
    if (!psi || !f.space().angular() || f.layer_centers().empty()) return 0.0;
    const double delta = 1e-6;
    double worst = 0.0;
    for (double t : {-t_max, t_max})
        for (double c : f.layer_centers())
            for (double shift : {0.0, -t}) {
                // Layers sit at the centers and at their preimages under the
                // drift; probing both sides catches either kind of jump.
                const double a = wrap(c + shift);
                Point lo, hi;
                if (f.space().kind() == Space::Kind::Circle) {
                    lo = Point::circle(a - delta);
                    hi = Point::circle(a + delta);
                } else {
                    lo = Point::torus(a - delta, 0.25);
                    hi = Point::torus(a + delta, 0.25);
                }
                worst = std::max(worst, distance(psi(t, lo), psi(t, hi)));
            }
    return worst;
}

inline std::vector<Trajectory> make_trajectories(const RunConfig& cfg, const VectorFieldNet& f) {
    IvpConfig icfg;
    icfg.t_grid = symmetric_grid(cfg.traj_t_max, cfg.traj_t_count);
    icfg.abs_tol = icfg.rel_tol = cfg.ivp_tol;
    std::vector<Trajectory> trajs;
    for (const auto& s : cfg.starts) {
        const Point p0 = Point::on(f.space(), s);
        for (double eps : f.net().values()) trajs.push_back(solve_ivp(f, eps, p0, icfg));
    }
    return trajs;
}

inline std::string csv_string(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

/// Profile of the limit flow at the slice extremes: one gnuplot block per
/// slice, rows "alpha0 psi_coords...".
inline std::string limit_profile_dat(const FlowTable& table) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t it : {std::size_t(0), table.n_t() - 1}) {
        if (!first) os << "\n\n";
        first = false;
        os << "# limit profile at t = " << format_double(table.t_grid[it]) << '\n';
        for (std::size_t ip = 0; ip < table.n_p(); ++ip) {
            os << format_double(table.p_grid[ip][0]);
            const double* c = table.limit_at(ip, it);
            for (std::size_t d = 0; d < table.dim(); ++d) os << ' ' << format_double(c[d]);
            os << '\n';
        }
    }
    return os.str();
}

inline std::string growth_dat(const std::string& title, const GrowthClass& g) {
    std::ostringstream os;
    std::vector<double> xs, ys;
    for (const auto& [e, v] : g.evidence) {
        xs.push_back(e);
        ys.push_back(v);
    }
    write_series_dat(os, title + " [" + std::string(GrowthClass::name(g.cls)) + "]", xs, ys);
    return os.str();
}

inline std::string evidence_dat(const AssociationVerdict& v) {
    std::ostringstream os;
    write_evidence_dat(os, v);
    return os.str();
}

}  // namespace detail

/// Flow scenario (marsden or torus): fill the table, compare the net against
/// the closed-form limit under each association notion, measure the limit's
/// group law, and gate the exit status on the scenario's expected pattern.
inline RunArtifacts run_flow_scenario(const RunConfig& cfg) {
    RunArtifacts art;
    const EpsilonNet net = cfg.net();
    const VectorFieldNet field = detail::make_field(cfg, net);
    const auto limit_map = detail::make_limit_map(cfg);

    IvpConfig icfg;
    icfg.t_grid = detail::symmetric_grid(cfg.t_max, cfg.t_count);
    icfg.abs_tol = icfg.rel_tol = cfg.ivp_tol;
    const FlowTable table = flow_table(field, icfg, detail::make_p_grid(cfg, field.space()));

    AssocConfig acfg;
    acfg.tol = cfg.assoc_tol;
    acfg.tol_zero = cfg.assoc_tol_zero;
    acfg.flow_defect_tol = cfg.flow_defect_tol;
    const LimitingFlowReport rep = limiting_flow_report(table, field, limit_map, acfg);

    // Named probe of the violating composition: inner leg backward, outer
    // leg forward, against the closed-form value of the same composition.
    IvpConfig pcfg;
    pcfg.abs_tol = pcfg.rel_tol = cfg.assoc_tol;
    const Point probe_start = field.space().kind() == Space::Kind::Circle
                                  ? Point::circle(0.0)
                                  : Point::on(field.space(), std::vector<double>(field.space().dimension(), 0.0));
    const CompositionProbe probe =
        compose_limit_flows(field, -cfg.t_max, cfg.t_max, probe_start, pcfg, table.p_grid);
    const Point cf_inner = limit_map(-cfg.t_max, probe_start);
    const Point cf_composed = limit_map(cfg.t_max, cf_inner);
    const Point cf_direct = limit_map(0.0, probe_start);
    const double expected_defect = distance(cf_composed, cf_direct);

    const double jump = detail::limit_jump(limit_map, field, cfg.t_max);
    const bool discontinuous = jump > 0.1;
    const bool flow_holds = rep.flow_property_measured;
    const std::string limit_line = std::string(discontinuous ? "limit discontinuous"
                                                             : "limit continuous on probes") +
                                   ", " + (flow_holds ? "flow property holds" : "flow property fails");

    json assertions = json::array();
    const double probe_tol = 2.0 * net.sigma_min() + 20.0 * cfg.assoc_tol;
    if (cfg.scenario == "marsden") {
        detail::record(art, assertions, "pw-association-holds",
                       rep.assoc_pw.verdict == Verdict::Holds, name(rep.assoc_pw.verdict));
        detail::record(art, assertions, "zero-association-fails",
                       rep.assoc_zero.verdict == Verdict::Fails, name(rep.assoc_zero.verdict));
        detail::record(art, assertions, "fast-association-fails",
                       rep.assoc_fast.verdict == Verdict::Fails, name(rep.assoc_fast.verdict));
        detail::record(art, assertions, "flow-property-fails", !flow_holds,
                       "defect " + format_double(rep.flow_defect));
        detail::record(art, assertions, "headline",
                       rep.headline == "pw-association held, flow property failed", rep.headline);
        detail::record(art, assertions, "violation-probe-nontrivial", expected_defect >= 0.5,
                       "closed-form composition defect " + format_double(expected_defect));
        detail::record(art, assertions, "violation-probe-matches-closed-form",
                       std::abs(probe.defect - expected_defect) <= probe_tol,
                       "measured " + format_double(probe.defect) + " vs closed form " +
                           format_double(expected_defect) + " (tol " + format_double(probe_tol) +
                           ")");
        detail::record(art, assertions, "uniform-conditions-hold",
                       rep.summary.uniform_conditions_met,
                       rep.summary.conclusion);
        detail::record(art, assertions, "prediction-agrees", rep.prediction_agrees,
                       rep.prediction_basis.empty() ? "no notion predicted the flow property"
                                                    : rep.prediction_basis);
    } else {
        detail::record(art, assertions, "flow-property-holds", flow_holds,
                       "defect " + format_double(rep.flow_defect) + " (tol " +
                           format_double(rep.flow_defect_tol) + ")");
        detail::record(art, assertions, "fast-holds-off-layers",
                       rep.assoc_fast_off_layer.verdict == Verdict::Holds &&
                           rep.off_layer_points > 0,
                       name(rep.assoc_fast_off_layer.verdict) + std::string(" at ") +
                           std::to_string(rep.off_layer_points) + " nodes");
        detail::record(art, assertions, "pw-association-holds",
                       rep.assoc_pw.verdict == Verdict::Holds, name(rep.assoc_pw.verdict));
        detail::record(art, assertions, "zero-association-fails",
                       rep.assoc_zero.verdict == Verdict::Fails, name(rep.assoc_zero.verdict));
        detail::record(art, assertions, "global-bound-fails-log-type",
                       rep.summary.global_bound.verdict == ConditionReport::Verdict::Fails &&
                           rep.summary.global_bound.growth.cls == GrowthClass::Class::LogType,
                       std::string(ConditionReport::verdict_name(rep.summary.global_bound.verdict)) +
                           ", " + GrowthClass::name(rep.summary.global_bound.growth.cls));
        detail::record(art, assertions, "limit-discontinuous", discontinuous,
                       "jump " + format_double(jump) + " across the layer");
        detail::record(art, assertions, "discontinuity-line",
                       limit_line == "limit discontinuous, flow property holds", limit_line);
        detail::record(art, assertions, "prediction-agrees", rep.prediction_agrees,
                       rep.prediction_basis.empty() ? "no notion predicted the flow property"
                                                    : rep.prediction_basis);
    }

    json report = detail::report_skeleton(cfg, "run");
    report["flow_table"] = to_json(table);
    report["limit_report"] = to_json(rep);
    report["violation_probe"] =
        json{{"probe", to_json(probe)}, {"expected_defect", expected_defect}, {"tol", probe_tol}};
    report["limit_jump"] = jump;
    json lines = json::array();
    for (const auto& l : rep.lines) lines.push_back(l);
    lines.push_back(limit_line);
    report["lines"] = std::move(lines);
    report["assertions"] = std::move(assertions);
    report["ok"] = art.ok;
    art.report = std::move(report);

    const auto trajs = detail::make_trajectories(cfg, field);
    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    art.files.emplace_back("trajectories.csv", detail::csv_string([&](std::ostream& os) {
                               write_trajectories_csv(os, trajs);
                           }));
    art.files.emplace_back("flowtable.csv", detail::csv_string([&](std::ostream& os) {
                               write_flowtable_csv(os, table);
                           }));
    art.files.emplace_back("assoc_zero.dat", detail::evidence_dat(rep.assoc_zero));
    art.files.emplace_back("assoc_pw.dat", detail::evidence_dat(rep.assoc_pw));
    art.files.emplace_back("assoc_fast.dat", detail::evidence_dat(rep.assoc_fast));
    art.files.emplace_back("limit_profile.dat", detail::limit_profile_dat(table));
    art.files.emplace_back("growth_global_bound.dat",
                           detail::growth_dat("sup |xi_eps|", rep.summary.global_bound.growth));
    art.files.emplace_back(
        "growth_derivative.dat",
        detail::growth_dat("sup |D xi_eps|", rep.summary.derivative_logtype.growth));
    return art;
}

/// Hierarchy scenario: the two counterexample nets against zero.
inline RunArtifacts run_hierarchy_scenario(const RunConfig& cfg) {
    RunArtifacts art;
    AssocConfig acfg;
    acfg.tol = cfg.assoc_tol;
    acfg.tol_zero = cfg.assoc_tol_zero;
    const HierarchyReport rep = hierarchy_report(cfg.net(), acfg);

    json assertions = json::array();
    detail::record(art, assertions, "sine-separates-weak-from-model", rep.sine_pattern_ok,
                   "assoc-Rn " + std::string(name(rep.sine.weak.verdict)) + ", model " +
                       name(rep.sine.model.verdict));
    detail::record(art, assertions, "comb-separates-model-from-pointwise", rep.comb_pattern_ok,
                   "model " + std::string(name(rep.comb.model.verdict)) + ", pw " +
                       name(rep.comb.pw.verdict));
    detail::record(art, assertions, "hierarchy-passed", rep.passed,
                   rep.lines.empty() ? "" : rep.lines.back());

    json report = detail::report_skeleton(cfg, "run");
    report["hierarchy"] = to_json(rep);
    report["lines"] = rep.lines;
    report["assertions"] = std::move(assertions);
    report["ok"] = art.ok;
    art.report = std::move(report);

    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    art.files.emplace_back("sine_weak.dat", detail::evidence_dat(rep.sine.weak));
    art.files.emplace_back("sine_model.dat", detail::evidence_dat(rep.sine.model));
    art.files.emplace_back("comb_model.dat", detail::evidence_dat(rep.comb.model));
    art.files.emplace_back("comb_pw.dat", detail::evidence_dat(rep.comb.pw));
    return art;
}

/// Scenario dispatch. Custom configs carry no expected-outcome pattern, so
/// they are exercised through the solve/flow/conditions runners instead.
inline RunArtifacts run_scenario(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.scenario == "hierarchy") return run_hierarchy_scenario(cfg);
    if (cfg.scenario == "marsden" || cfg.scenario == "torus") return run_flow_scenario(cfg);
    throw ConfigError("run_scenario: scenario '" + cfg.scenario +
                      "' has no preset assertions; use the solve/flow/conditions runners");
}

/// Trajectory bundle only: every net member from every configured start.
inline RunArtifacts run_solve(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.starts.empty()) throw ConfigError("solve: trajectories.starts must be non-empty");
    RunArtifacts art;
    const EpsilonNet net = cfg.net();
    const VectorFieldNet field = detail::make_field(cfg, net);
    const auto trajs = detail::make_trajectories(cfg, field);

    json report = detail::report_skeleton(cfg, "solve");
    report["field"] = field.label();
    report["space"] = to_json(field.space());
    report["net"] = to_json(net);
    StepperStats total;
    for (const auto& t : trajs) total.absorb(t.stats);
    report["stats"] = to_json(total);
    report["trajectories"] = trajs.size();
    report["ok"] = true;
    art.report = std::move(report);
    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    art.files.emplace_back("trajectories.csv", detail::csv_string([&](std::ostream& os) {
                               write_trajectories_csv(os, trajs);
                           }));
    return art;
}

/// Flow table plus the uniform-conditions digest, no association verdicts.
inline RunArtifacts run_flow(const RunConfig& cfg) {
    validate_config(cfg);
    RunArtifacts art;
    const EpsilonNet net = cfg.net();
    const VectorFieldNet field = detail::make_field(cfg, net);
    IvpConfig icfg;
    icfg.t_grid = detail::symmetric_grid(cfg.t_max, cfg.t_count);
    icfg.abs_tol = icfg.rel_tol = cfg.ivp_tol;
    const FlowTable table = flow_table(field, icfg, detail::make_p_grid(cfg, field.space()));
    const UniformLimitSummary summary = uniform_limit_summary(table, field);

    json report = detail::report_skeleton(cfg, "flow");
    report["flow_table"] = to_json(table);
    report["uniform_summary"] = to_json(summary);
    report["ok"] = true;
    art.report = std::move(report);
    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    art.files.emplace_back("flowtable.csv", detail::csv_string([&](std::ostream& os) {
                               write_flowtable_csv(os, table);
                           }));
    art.files.emplace_back("limit_profile.dat", detail::limit_profile_dat(table));
    return art;
}

/// Hypothesis checkers on the configured field. The grid is densified to the
/// smallest layer scale automatically; the configured p_count is a floor.
inline RunArtifacts run_conditions(const RunConfig& cfg) {
    validate_config(cfg);
    RunArtifacts art;
    const EpsilonNet net = cfg.net();
    const VectorFieldNet field = detail::make_field(cfg, net);

    SampleGrid grid;
    if (field.space().angular()) {
        std::size_t m = std::size_t(std::ceil(two_pi / (net.sigma_min() / 4.0))) + 1;
        m += m % 2;
        m = std::max(m, cfg.p_count);
        grid = field.space().kind() == Space::Kind::Circle
                   ? circle_grid(m)
                   : torus_grid(m, std::max<std::size_t>(cfg.p_beta_count, 4));
    } else {
        grid = euclidean_grid(cfg.p_min, cfg.p_max, std::max<std::size_t>(cfg.p_count, 128));
    }

    json conditions;
    conditions["global-bound-h"] = to_json(check_global_bound(field, grid));
    conditions["logtype-derivative"] = to_json(check_logtype_derivative(field, grid));
    conditions["bounded-derivative"] = to_json(check_bounded_derivative(field, grid));
    if (!field.space().angular())
        conditions["linear-growth"] = to_json(check_linear_growth(field, grid));

    json report = detail::report_skeleton(cfg, "conditions");
    report["field"] = field.label();
    report["grid"] = json{{"size", grid.points.size()}, {"spacing", grid.spacing}};
    report["conditions"] = std::move(conditions);
    report["ok"] = true;
    art.report = std::move(report);
    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    return art;
}

/// One association notion on the configured scenario. Flow scenarios compare
/// the flow net against the closed-form limit; the hierarchy compares both
/// counterexample nets against zero with the configured witness families.
inline RunArtifacts run_associate(const RunConfig& cfg, const std::string& notion) {
    validate_config(cfg);
    RunArtifacts art;
    json report = detail::report_skeleton(cfg, "associate");
    report["notion"] = notion;

    if (cfg.scenario == "hierarchy") {
        const EpsilonNet net = cfg.net();
        AssocConfig acfg;
        acfg.tol = cfg.assoc_tol;
        acfg.tol_zero = cfg.assoc_tol_zero;
        const NetFunction sine = sine_oscillation_net(net);
        const NetFunction comb = dyadic_comb_net(net);
        const NetFunction target = zero_target_net(net);
        std::vector<SmoothTest> tests;
        for (const auto& n : cfg.witness_tests) tests.push_back(smooth_test(n));
        std::vector<Density> densities;
        for (const auto& n : cfg.witness_densities) densities.push_back(named_density(n));
        const std::vector<Point> sine_pts{Point::euclidean({0.3}), Point::euclidean({0.7}),
                                          Point::euclidean({1.3})};
        const std::vector<Point> comb_pts{Point::euclidean({0.5}), Point::euclidean({1.0}),
                                          Point::euclidean({2.0})};
        const SubnetFn subnet = comb_tooth_subnet(net.values().front());
        const double need = sigma(net.scaling(), net.values().back()) / 4.0;
        const SampleGrid K = euclidean_grid(-2.5, 2.5, std::size_t(std::ceil(5.0 / need)) + 1);

        auto run_one = [&](const NetFunction& u, const std::vector<Point>& pts,
                           const SubnetFn& sn) -> AssociationVerdict {
            if (notion == "zero") return zero_assoc(u, target, K, acfg);
            if (notion == "pw") return pw_assoc(u, target, pts, acfg, sn);
            if (notion == "pwae")
                return pwae_assoc(u, target, euclidean_grid(0.1, 2.1, 101), acfg, sn);
            if (notion == "model") return model_assoc(u, target, tests, densities, acfg);
            if (notion == "assoc-Rn") return assoc_Rn(u, target, densities, acfg);
            if (notion == "fast") return fast_assoc(u, target, pts, acfg);
            throw ConfigError("associate: unknown notion '" + notion +
                              "' (known: zero, pw, pwae, model, assoc-Rn, fast)");
        };
        const AssociationVerdict vs = run_one(sine, sine_pts, {});
        const AssociationVerdict vc = run_one(comb, comb_pts, subnet);
        report["sine"] = to_json(vs);
        report["comb"] = to_json(vc);
        report["ok"] = true;
        art.report = std::move(report);
        art.files.emplace_back("report.json", art.report.dump(2) + "\n");
        art.files.emplace_back("sine_evidence.dat", detail::evidence_dat(vs));
        art.files.emplace_back("comb_evidence.dat", detail::evidence_dat(vc));
        return art;
    }

    if (cfg.scenario != "marsden" && cfg.scenario != "torus")
        throw ConfigError("associate: scenario must be marsden, torus, or hierarchy");
    const EpsilonNet net = cfg.net();
    const VectorFieldNet field = detail::make_field(cfg, net);
    IvpConfig icfg;
    icfg.t_grid = detail::symmetric_grid(cfg.t_max, cfg.t_count);
    icfg.abs_tol = icfg.rel_tol = cfg.ivp_tol;
    const FlowTable table = flow_table(field, icfg, detail::make_p_grid(cfg, field.space()));
    AssocConfig acfg;
    acfg.tol = cfg.assoc_tol;
    acfg.tol_zero = cfg.assoc_tol_zero;
    acfg.flow_defect_tol = cfg.flow_defect_tol;
    const LimitingFlowReport rep =
        limiting_flow_report(table, field, detail::make_limit_map(cfg), acfg);
    const AssociationVerdict* picked = nullptr;
    if (notion == "zero") picked = &rep.assoc_zero;
    else if (notion == "pw") picked = &rep.assoc_pw;
    else if (notion == "fast") picked = &rep.assoc_fast;
    else if (notion == "fast-off-layer") picked = &rep.assoc_fast_off_layer;
    else
        throw ConfigError("associate: notion '" + notion +
                          "' is not defined for flow scenarios (known: zero, pw, fast, "
                          "fast-off-layer)");
    report["verdict"] = to_json(*picked);
    report["ok"] = true;
    art.report = std::move(report);
    art.files.emplace_back("report.json", art.report.dump(2) + "\n");
    art.files.emplace_back("evidence.dat", detail::evidence_dat(*picked));
    return art;
}

/// Single writer for a finished run; creates the directory if needed.
inline void write_artifacts(const RunArtifacts& art, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
    for (const auto& [name, content] : art.files) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
        os << content;
        if (!os) throw ConfigError("write failed for '" + path.string() + "'");
    }
}

}  // namespace epsflow
