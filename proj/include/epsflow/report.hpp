#pragma once
// Serialization of verdicts, tables, and reports: JSON values for the
// structured report, CSV for trajectories and flow tables, gnuplot-style
// .dat blocks for plot data. Everything here is pure formatting onto json
// values and output streams; file placement belongs to the callers.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "association.hpp"
#include "epsilon.hpp"
#include "fields.hpp"
#include "flow.hpp"
#include "manifold.hpp"
#include "ode.hpp"

namespace epsflow {

using json = nlohmann::json;

/// Bumped whenever a consumer-visible key changes meaning or disappears.
inline constexpr int report_schema_version = 1;

/// 17 significant digits round-trip a double exactly; the fixed format keeps
/// repeated runs byte-identical, which the CSV outputs promise.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Column labels in cover coordinates, matching the space's chart.
inline std::vector<std::string> coordinate_names(const Space& space) {
    switch (space.kind()) {
        case Space::Kind::Circle: return {"alpha"};
        case Space::Kind::Torus2: return {"alpha", "beta"};
        default: {
            std::vector<std::string> names;
            if (space.dimension() == 1) return {"x"};
            for (std::size_t d = 0; d < space.dimension(); ++d)
                names.push_back("x" + std::to_string(d));
            return names;
        }
    }
}

inline json to_json(const Space& space) {
    return json{{"name", space.name()}, {"dimension", space.dimension()}};
}

inline json to_json(const Point& p) {
    return json(p.coords());
}

inline json to_json(const EpsilonNet& net) {
    json eps = json::array();
    json sig = json::array();
    for (std::size_t i = 0; i < net.size(); ++i) {
        eps.push_back(net.values()[i]);
        sig.push_back(net.sigma_at(i));
    }
    return json{{"eps", std::move(eps)},
                {"sigma", std::move(sig)},
                {"scaling", net.scaling().name()}};
}

inline json to_json(const GrowthClass& g) {
    json j{{"class", GrowthClass::name(g.cls)},
           {"constant", g.constant},
           {"intercept", g.intercept},
           {"residual", g.residual},
           {"ambiguous", g.ambiguous},
           {"rule_trace", g.rule_trace}};
    if (g.runner_up)
        j["runner_up"] = json{{"class", GrowthClass::name(g.runner_up->first)},
                              {"residual", g.runner_up->second}};
    else
        j["runner_up"] = nullptr;
    json ev = json::array();
    for (const auto& [eps, value] : g.evidence) ev.push_back(json::array({eps, value}));
    j["evidence"] = std::move(ev);
    return j;
}

inline json to_json(const StepperStats& s) {
    return json{{"accepted", s.accepted},
                {"rejected", s.rejected},
                {"rhs_evals", s.rhs_evals},
                {"min_step", s.min_step},
                {"max_step", s.max_step}};
}

inline json to_json(const ConditionReport& r) {
    return json{{"condition", ConditionReport::condition_name(r.condition)},
                {"verdict", ConditionReport::verdict_name(r.verdict)},
                {"growth", to_json(r.growth)},
                {"worst", json{{"eps", r.worst.eps},
                               {"point", to_json(r.worst.point)},
                               {"value", r.worst.value}}},
                {"grid_spacing", r.grid_spacing},
                {"grid_size", r.grid_size},
                {"rule_trace", r.rule_trace}};
}

inline json to_json(const EvidenceSeries& s) {
    return json{{"witness", s.witness}, {"eps", s.eps}, {"values", s.values}};
}

inline json to_json(const AssociationVerdict& v) {
    json ev = json::array();
    for (const auto& s : v.evidence) ev.push_back(to_json(s));
    json j{{"notion", name(v.notion)},
           {"verdict", name(v.verdict)},
           {"witnesses", v.witnesses},
           {"evidence", std::move(ev)},
           {"rate", to_json(v.rate)},
           {"rule_trace", v.rule_trace}};
    if (v.notion == Notion::PointwiseAe) j["exceptional_fraction"] = v.exceptional_fraction;
    return j;
}

inline json to_json(const NotionSet& s) {
    return json{{"zero", to_json(s.zero)},     {"pw", to_json(s.pw)},
                {"pwae", to_json(s.pwae)},     {"model", to_json(s.model)},
                {"assoc-Rn", to_json(s.weak)}, {"fast", to_json(s.fast)}};
}

inline json to_json(const HierarchyReport& r) {
    return json{{"sine", to_json(r.sine)},
                {"comb", to_json(r.comb)},
                {"comb_l1", r.comb_l1},
                {"comb_bound_ok", r.comb_bound_ok},
                {"comb_bound_margin", r.comb_bound_margin},
                {"sine_model_final", r.sine_model_final},
                {"sine_model_limit", r.sine_model_limit},
                {"sine_pattern_ok", r.sine_pattern_ok},
                {"comb_pattern_ok", r.comb_pattern_ok},
                {"chain_ok", r.chain_ok},
                {"passed", r.passed},
                {"lines", r.lines}};
}

inline json to_json(const UniformLimitSummary& s) {
    return json{{"field", s.field_label},
                {"grid_points", s.grid_points},
                {"converged_points", s.converged_points},
                {"pointwise_limit_exists", s.pointwise_limit_exists},
                {"max_last_diff", s.max_last_diff},
                {"flow_derivative_growth", to_json(s.flow_derivative_growth)},
                {"global_bound", to_json(s.global_bound)},
                {"derivative_logtype", to_json(s.derivative_logtype)},
                {"uniform_conditions_met", s.uniform_conditions_met},
                {"conclusion", s.conclusion}};
}

inline json to_json(const CompositionProbe& p) {
    return json{{"p0", to_json(p.p0)},
                {"s", p.s},
                {"t", p.t},
                {"inner", to_json(p.inner)},
                {"composed", to_json(p.composed)},
                {"direct", to_json(p.direct)},
                {"defect", p.defect},
                {"inner_converged", p.inner_converged},
                {"outer_converged", p.outer_converged},
                {"fallback_used", p.fallback_used}};
}

inline json to_json(const LimitingFlowReport& r) {
    return json{{"summary", to_json(r.summary)},
                {"t_sample", r.t_sample},
                {"assoc_fast", to_json(r.assoc_fast)},
                {"assoc_fast_off_layer", to_json(r.assoc_fast_off_layer)},
                {"assoc_zero", to_json(r.assoc_zero)},
                {"assoc_pw", to_json(r.assoc_pw)},
                {"off_layer_points", r.off_layer_points},
                {"layer_points", r.layer_points},
                {"flow_property",
                 json{{"defect", r.flow_defect},
                      {"defect_tol", r.flow_defect_tol},
                      {"worst_probe", to_json(r.worst_probe)},
                      {"measured", r.flow_property_measured},
                      {"predicted", r.flow_property_predicted},
                      {"prediction_basis", r.prediction_basis},
                      {"prediction_agrees", r.prediction_agrees}}},
                {"headline", r.headline},
                {"lines", r.lines}};
}

/// Flow-table digest for the JSON report: grids and convergence diagnostics.
/// The full value array goes to flowtable.csv, not here.
inline json to_json(const FlowTable& t) {
    json p_grid = json::array();
    for (const auto& p : t.p_grid) p_grid.push_back(to_json(p));
    std::size_t converged = 0;
    for (auto c : t.converged) converged += c ? 1 : 0;
    return json{{"field", t.field_label},
                {"space", to_json(t.space)},
                {"eps", t.eps},
                {"sigma", t.sigma},
                {"t_grid", t.t_grid},
                {"p_grid", std::move(p_grid)},
                {"noise_floor", t.noise_floor},
                {"entries", t.n_p() * t.n_t()},
                {"converged_entries", converged},
                {"stats", to_json(t.stats)}};
}

namespace detail {

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

}  // namespace detail

/// One row per (member, time): epsilon, t, then cover coordinates.
inline void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajs) {
    if (trajs.empty()) throw ConfigError("write_trajectories_csv: no trajectories");
    std::vector<std::string> header{"epsilon", "t"};
    for (const auto& n : coordinate_names(trajs.front().space)) header.push_back(n);
    detail::write_csv_row(os, header);
    for (const auto& traj : trajs) {
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            std::vector<std::string> row{format_double(traj.eps), format_double(traj.times[i])};
            const double* c = traj.cover(i);
            for (std::size_t d = 0; d < traj.dim(); ++d) row.push_back(format_double(c[d]));
            detail::write_csv_row(os, row);
        }
    }
}

/// One row per (member, start point, time): epsilon, t, start coordinates,
/// flow value coordinates. The extracted limit appears as epsilon = 0 rows.
inline void write_flowtable_csv(std::ostream& os, const FlowTable& t) {
    if (t.values.empty()) throw ConfigError("write_flowtable_csv: empty table");
    std::vector<std::string> header{"epsilon", "t"};
    const auto names = coordinate_names(t.space);
    for (const auto& n : names) header.push_back("p_" + n);
    for (const auto& n : names) header.push_back("phi_" + n);
    detail::write_csv_row(os, header);
    auto emit = [&](double eps, std::size_t ip, std::size_t it, const double* value) {
        std::vector<std::string> row{format_double(eps), format_double(t.t_grid[it])};
        for (double c : t.p_grid[ip].coords()) row.push_back(format_double(c));
        for (std::size_t d = 0; d < t.dim(); ++d) row.push_back(format_double(value[d]));
        detail::write_csv_row(os, row);
    };
    for (std::size_t ie = 0; ie < t.n_eps(); ++ie)
        for (std::size_t ip = 0; ip < t.n_p(); ++ip)
            for (std::size_t it = 0; it < t.n_t(); ++it) emit(t.eps[ie], ip, it, t.value_at(ie, ip, it));
    if (!t.limit.empty())
        for (std::size_t ip = 0; ip < t.n_p(); ++ip)
            for (std::size_t it = 0; it < t.n_t(); ++it) emit(0.0, ip, it, t.limit_at(ip, it));
}

/// Gnuplot-ready two-column block: comment header, then x y rows.
inline void write_series_dat(std::ostream& os, const std::string& title,
                             const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("write_series_dat: length mismatch");
    os << "# " << title << '\n';
    for (std::size_t i = 0; i < x.size(); ++i)
        os << format_double(x[i]) << ' ' << format_double(y[i]) << '\n';
}

/// One indexed gnuplot block per evidence series (blocks separated by two
/// blank lines, addressable via `index`).
inline void write_evidence_dat(std::ostream& os, const AssociationVerdict& v) {
    os << "# notion: " << name(v.notion) << ", verdict: " << name(v.verdict) << '\n';
    for (std::size_t i = 0; i < v.evidence.size(); ++i) {
        if (i) os << "\n\n";
        write_series_dat(os, v.evidence[i].witness, v.evidence[i].eps, v.evidence[i].values);
    }
}

}  // namespace epsflow
