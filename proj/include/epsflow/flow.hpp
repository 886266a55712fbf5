#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "epsflow/epsilon.hpp"
#include "epsflow/errors.hpp"
#include "epsflow/fields.hpp"
#include "epsflow/manifold.hpp"
#include "epsflow/mollifier.hpp"
#include "epsflow/ode.hpp"

namespace epsflow {

/// Shared solver setup. t_grid is the sampling grid: strictly increasing and
/// containing t0, so every trajectory reports its exact initial point.
struct IvpConfig {
    double t0 = 0.0;
    std::vector<double> t_grid{0.0};
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Step cap inside layer windows, relative to sigma(eps).
    double max_step_factor = 0.25;
    std::size_t max_steps = 2'000'000;

    std::size_t t0_index() const {
        const double tol = 1e-12 * std::max(1.0, std::abs(t0));
        for (std::size_t k = 0; k < t_grid.size(); ++k)
            if (std::abs(t_grid[k] - t0) <= tol) return k;
        throw ConfigError("IvpConfig: t_grid must contain t0");
    }

    void validate() const {
        if (t_grid.empty()) throw ConfigError("IvpConfig: t_grid must be non-empty");
        for (std::size_t k = 1; k < t_grid.size(); ++k)
            if (!(t_grid[k] > t_grid[k - 1]))
                throw ConfigError("IvpConfig: t_grid must be strictly increasing");
        (void)t0_index();
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw ConfigError("IvpConfig: tolerances must be positive");
        if (!(max_step_factor > 0.0) || max_step_factor > 1.0)
            throw ConfigError("IvpConfig: max_step_factor must lie in (0, 1]");
        if (max_steps == 0) throw ConfigError("IvpConfig: max_steps must be positive");
    }
};

/// One eps-member solution sampled on t_grid, in cover coordinates.
struct Trajectory {
    double eps = 0.0;
    Point initial;
    Space space = Space::euclidean(1);
    std::vector<double> times;
    std::vector<double> values; // times.size() * dim
    StepperStats stats;

    std::size_t dim() const { return space.dimension(); }
    const double* cover(std::size_t i) const { return values.data() + i * dim(); }
    Point point_at(std::size_t i) const {
        return Point::on(space, {cover(i), cover(i) + dim()});
    }
};

namespace detail {

// Geometric step bound: end steps before entering a layer window, cap them
// at max_step_factor*sigma inside, and keep h*||Df|| moderate everywhere.
// Reads only the leading point coordinates, so augmented states can share it.
inline auto make_step_cap(const VectorFieldNet& f, double eps, double sigma, double factor) {
    const std::size_t n = f.space().dimension();
    auto jac_buf = std::make_shared<std::vector<double>>(n * n);
    return [&f, eps, sigma, factor, jac_buf, n](double, const double* y, const double* k1) {
        double cap = std::numeric_limits<double>::infinity();
        const double clearance = f.layer_clearance(eps, y);
        if (std::isfinite(clearance)) {
            const double layer_cap = factor * sigma;
            if (clearance <= 0.0) cap = layer_cap;
            else {
                const double v = std::max(std::abs(k1[0]), 1e-10);
                cap = std::max(0.5 * clearance / v, layer_cap);
            }
        }
        f.jacobian_cover(eps, y, jac_buf->data());
        const double dn = frobenius(*jac_buf);
        if (dn > 0.0) cap = std::min(cap, 2.0 / dn);
        return cap;
    };
}

// March the cover state from t_from to t_to; y is updated in place.
inline void advance_cover(const VectorFieldNet& f, double eps, std::vector<double>& y,
                          double t_from, double t_to, const IvpConfig& cfg,
                          StepperStats& stats) {
    if (t_to == t_from) return;
    auto rhs = [&f, eps](double, const double* yy, double* dy) { f.eval_cover(eps, yy, dy); };
    auto cap = make_step_cap(f, eps, f.sigma(eps), cfg.max_step_factor);
    const std::vector<double> nodes{t_to};
    std::vector<double> out(y.size());
    Dopri5Options opt{cfg.abs_tol, cfg.rel_tol, cfg.max_steps};
    dopri5_sweep(rhs, cap, y, t_from, t_to, nodes, out.data(), opt, stats, eps);
}

// Convergence of a Cauchy-difference series: the tail must have decayed to
// half of the early differences, or down to the solver noise floor.
inline bool cauchy_converged(const std::vector<double>& diffs, double floor) {
    if (diffs.empty()) return true;
    const std::size_t half = (diffs.size() + 1) / 2;
    double early = 0.0;
    for (std::size_t j = 0; j < half; ++j) early = std::max(early, diffs[j]);
    return diffs.back() <= std::max(0.5 * early, floor);
}

} // namespace detail

inline Trajectory solve_ivp(const VectorFieldNet& f, double eps, const Point& p0,
                            const IvpConfig& cfg) {
    cfg.validate();
    if (p0.space() != f.space()) throw ConfigError("solve_ivp: point is not in the field's space");
    if (!f.contains_eps(eps)) throw ConfigError("solve_ivp: eps is not a net element");

    const std::size_t n = f.space().dimension();
    const std::size_t i0 = cfg.t0_index();
    Trajectory traj;
    traj.eps = eps;
    traj.initial = p0;
    traj.space = f.space();
    traj.times = cfg.t_grid;
    traj.values.assign(cfg.t_grid.size() * n, 0.0);
    std::copy(p0.coords().begin(), p0.coords().end(), traj.values.begin() + i0 * n);

    auto rhs = [&f, eps](double, const double* yy, double* dy) { f.eval_cover(eps, yy, dy); };
    auto cap = detail::make_step_cap(f, eps, f.sigma(eps), cfg.max_step_factor);
    Dopri5Options opt{cfg.abs_tol, cfg.rel_tol, cfg.max_steps};

    if (i0 > 0) { // backward sweep over the nodes below t0, nearest first
        std::vector<double> nodes(cfg.t_grid.begin(), cfg.t_grid.begin() + i0);
        std::reverse(nodes.begin(), nodes.end());
        std::vector<double> y = p0.coords();
        std::vector<double> out(nodes.size() * n);
        dopri5_sweep(rhs, cap, y, cfg.t0, nodes.back(), nodes, out.data(), opt, traj.stats, eps);
        for (std::size_t m = 0; m < nodes.size(); ++m)
            std::copy(out.begin() + m * n, out.begin() + (m + 1) * n,
                      traj.values.begin() + (i0 - 1 - m) * n);
    }
    if (i0 + 1 < cfg.t_grid.size()) { // forward sweep
        std::vector<double> nodes(cfg.t_grid.begin() + i0 + 1, cfg.t_grid.end());
        std::vector<double> y = p0.coords();
        std::vector<double> out(nodes.size() * n);
        dopri5_sweep(rhs, cap, y, cfg.t0, nodes.back(), nodes, out.data(), opt, traj.stats, eps);
        std::copy(out.begin(), out.end(), traj.values.begin() + (i0 + 1) * n);
    }
    return traj;
}

/// Whole eps-family of trajectories over a (t, p) grid, with the limit
/// candidate and its Cauchy diagnostics per grid entry.
struct FlowTable {
    std::string field_label;
    Space space = Space::euclidean(1);
    std::vector<double> eps;   // net order, decreasing
    std::vector<double> sigma; // sigma(eps), same order
    std::vector<double> t_grid;
    std::vector<Point> p_grid;
    std::vector<double> values; // [i_eps][i_p][i_t][d], cover coordinates
    /// Cover coordinates of the smallest-eps member: the limit candidate.
    std::vector<double> limit;                // [i_p][i_t][d]
    std::vector<double> diffs;                // [i_p][i_t][j], j < n_eps()-1
    std::vector<GrowthClass> diff_growth;     // [i_p][i_t]
    std::vector<std::uint8_t> converged;      // [i_p][i_t]
    double noise_floor = 0.0;
    StepperStats stats;

    std::size_t n_eps() const { return eps.size(); }
    std::size_t n_p() const { return p_grid.size(); }
    std::size_t n_t() const { return t_grid.size(); }
    std::size_t dim() const { return space.dimension(); }

    const double* value_at(std::size_t ie, std::size_t ip, std::size_t it) const {
        return values.data() + ((ie * n_p() + ip) * n_t() + it) * dim();
    }
    const double* limit_at(std::size_t ip, std::size_t it) const {
        return limit.data() + (ip * n_t() + it) * dim();
    }
    Point limit_point(std::size_t ip, std::size_t it) const {
        const double* c = limit_at(ip, it);
        return Point::on(space, {c, c + dim()});
    }
    Point value_point(std::size_t ie, std::size_t ip, std::size_t it) const {
        const double* c = value_at(ie, ip, it);
        return Point::on(space, {c, c + dim()});
    }
    double diff_at(std::size_t ip, std::size_t it, std::size_t j) const {
        return diffs[(ip * n_t() + it) * (n_eps() - 1) + j];
    }
    bool converged_at(std::size_t ip, std::size_t it) const {
        return converged[ip * n_t() + it] != 0;
    }
};

/// Fill the limit candidate, Cauchy differences, their growth classification,
/// and the per-entry convergence flags from the stored values.
inline void extract_limit(FlowTable& table) {
    const std::size_t ne = table.n_eps(), np = table.n_p(), nt = table.n_t(), d = table.dim();
    if (ne < 2) throw ConfigError("extract_limit: need at least two eps members");
    table.limit.assign(np * nt * d, 0.0);
    table.diffs.assign(np * nt * (ne - 1), 0.0);
    table.diff_growth.assign(np * nt, GrowthClass{});
    table.converged.assign(np * nt, 0);
    std::vector<double> dseries(ne - 1);
    for (std::size_t ip = 0; ip < np; ++ip) {
        for (std::size_t it = 0; it < nt; ++it) {
            const double* best = table.value_at(ne - 1, ip, it);
            std::copy(best, best + d, table.limit.begin() + (ip * nt + it) * d);
            for (std::size_t j = 0; j + 1 < ne; ++j) {
                const double dj =
                    distance(table.value_point(j, ip, it), table.value_point(j + 1, ip, it));
                table.diffs[(ip * nt + it) * (ne - 1) + j] = dj;
                dseries[j] = dj;
            }
            std::vector<std::pair<double, double>> series;
            series.reserve(ne - 1);
            for (std::size_t j = 0; j + 1 < ne; ++j) series.emplace_back(table.eps[j], dseries[j]);
            table.diff_growth[ip * nt + it] = classify_growth(series);
            table.converged[ip * nt + it] =
                detail::cauchy_converged(dseries, table.noise_floor) ? 1 : 0;
        }
    }
}

inline FlowTable flow_table(const VectorFieldNet& f, const IvpConfig& cfg,
                            const std::vector<Point>& p_grid) {
    cfg.validate();
    if (p_grid.empty()) throw ConfigError("flow_table: p_grid must be non-empty");
    for (const auto& p : p_grid)
        if (p.space() != f.space())
            throw ConfigError("flow_table: p_grid point is not in the field's space");

    FlowTable table;
    table.field_label = f.label();
    table.space = f.space();
    table.eps = f.net().values();
    for (double e : table.eps) table.sigma.push_back(f.sigma(e));
    table.t_grid = cfg.t_grid;
    table.p_grid = p_grid;
    table.noise_floor = 20.0 * (cfg.abs_tol + cfg.rel_tol);
    const std::size_t d = f.space().dimension();
    table.values.assign(table.n_eps() * table.n_p() * table.n_t() * d, 0.0);

    for (std::size_t ie = 0; ie < table.n_eps(); ++ie) {
        for (std::size_t ip = 0; ip < table.n_p(); ++ip) {
            Trajectory traj = solve_ivp(f, table.eps[ie], p_grid[ip], cfg);
            std::copy(traj.values.begin(), traj.values.end(),
                      table.values.begin() + ((ie * table.n_p() + ip) * table.n_t()) * d);
            table.stats.absorb(traj.stats);
        }
    }
    extract_limit(table);
    return table;
}

/// Distance between Phi(t, Phi(s, p)) and Phi(s+t, p), each side freshly
/// integrated at the same eps.
inline double flow_identity_residual(const VectorFieldNet& f, double eps, double s, double t,
                                     const Point& p, const IvpConfig& cfg) {
    if (p.space() != f.space())
        throw ConfigError("flow_identity_residual: point is not in the field's space");
    if (!f.contains_eps(eps)) throw ConfigError("flow_identity_residual: eps not in net");
    StepperStats st;
    std::vector<double> via = p.coords();
    detail::advance_cover(f, eps, via, 0.0, s, cfg, st);
    detail::advance_cover(f, eps, via, s, s + t, cfg, st);
    std::vector<double> direct = p.coords();
    detail::advance_cover(f, eps, direct, 0.0, s + t, cfg, st);
    return distance(Point::on(f.space(), via), Point::on(f.space(), direct));
}

/// d Phi^eps_t / dp as the solution of the joint variational system, started
/// from the identity.
struct VariationalResult {
    double eps = 0.0;
    double t = 0.0;
    Point p;
    std::vector<double> matrix; // row-major dim x dim
    double op_norm = 0.0;
    StepperStats stats;
};

namespace detail {

inline double spectral_norm(const std::vector<double>& m, std::size_t n) {
    if (n == 1) return std::abs(m[0]);
    if (n == 2) {
        const double a = m[0] * m[0] + m[2] * m[2];
        const double b = m[0] * m[1] + m[2] * m[3];
        const double c = m[1] * m[1] + m[3] * m[3];
        const double mid = 0.5 * (a + c);
        const double rad = std::sqrt(std::max(0.25 * (a - c) * (a - c) + b * b, 0.0));
        return std::sqrt(std::max(mid + rad, 0.0));
    }
    std::vector<double> v(n, 1.0 / std::sqrt(double(n))), w(n);
    double lam = 0.0;
    for (int it = 0; it < 64; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) w[i] += m[i * n + j] * v[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += m[i * n + j] * w[i];
            v[j] = s;
        }
        double nv = 0.0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        if (nv == 0.0) return 0.0;
        for (double& x : v) x /= nv;
        lam = nv;
    }
    return std::sqrt(lam);
}

} // namespace detail

inline VariationalResult variational_derivative(const VectorFieldNet& f, double eps, double t,
                                                const Point& p, const IvpConfig& cfg) {
    if (p.space() != f.space())
        throw ConfigError("variational_derivative: point is not in the field's space");
    if (!f.contains_eps(eps)) throw ConfigError("variational_derivative: eps not in net");
    const std::size_t n = f.space().dimension();

    VariationalResult res;
    res.eps = eps;
    res.t = t;
    res.p = p;
    res.matrix.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) res.matrix[i * n + i] = 1.0;
    if (t == 0.0) {
        res.op_norm = 1.0;
        return res;
    }

    std::vector<double> y(n + n * n, 0.0);
    std::copy(p.coords().begin(), p.coords().end(), y.begin());
    std::copy(res.matrix.begin(), res.matrix.end(), y.begin() + n);

    auto jac_buf = std::make_shared<std::vector<double>>(n * n);
    auto rhs = [&f, eps, n, jac_buf](double, const double* yy, double* dy) {
        f.eval_cover(eps, yy, dy);
        f.jacobian_cover(eps, yy, jac_buf->data());
        const double* M = yy + n;
        double* dM = dy + n;
        const double* J = jac_buf->data();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += J[i * n + k] * M[k * n + j];
                dM[i * n + j] = s;
            }
    };
    auto cap = detail::make_step_cap(f, eps, f.sigma(eps), cfg.max_step_factor);
    const std::vector<double> nodes{t};
    std::vector<double> out(y.size());
    Dopri5Options opt{cfg.abs_tol, cfg.rel_tol, cfg.max_steps};
    dopri5_sweep(rhs, cap, y, 0.0, t, nodes, out.data(), opt, res.stats, eps);
    std::copy(y.begin() + n, y.end(), res.matrix.begin());
    res.op_norm = detail::spectral_norm(res.matrix, n);
    return res;
}

/// The e->0 limit of the regularized jump flow on the circle: points of the
/// open right half move by clamped translation onto [-pi/2, pi/2]; the rest
/// are frozen. Which endpoint moves depends on the smoothing case.
inline Point closed_form_marsden_limit(StepCase cs, double alpha0, double t) {
    const double a0 = wrap(alpha0);
    bool moving = false;
    switch (cs) {
        case StepCase::SymmetricA: moving = a0 >= -pi / 2 && a0 <= pi / 2; break;
        case StepCase::RightB: moving = a0 > -pi / 2 && a0 <= pi / 2; break;
        case StepCase::LeftC: moving = a0 >= -pi / 2 && a0 < pi / 2; break;
    }
    if (!moving) return Point::circle(a0);
    return Point::circle(std::clamp(a0 + t, -pi / 2, pi / 2));
}

/// Exact flow of the torus field and its e->0 limit, on the cover chart
/// |alpha| <= pi, |t| <= 1 (where no periodic copy of the trench is crossed).
struct TorusFlowValue {
    std::array<double, 2> exact_cover{};
    std::array<double, 2> limit_cover{};
    Point exact;
    Point limit;
};

inline TorusFlowValue closed_form_torus(const SmoothedStep& step, double t, double alpha,
                                        double beta) {
    if (std::abs(alpha) > pi + 1e-12 || std::abs(t) > 1.0 + 1e-12)
        throw ConfigError("closed_form_torus: valid chart is |alpha| <= pi, |t| <= 1");
    TorusFlowValue v;
    v.exact_cover = {alpha + t, beta + t - (step.value(alpha + t) - step.value(alpha))};
    const double h0 = [&] {
        switch (step.step_case()) {
            case StepCase::SymmetricA: return 0.5;
            case StepCase::RightB: return 0.0;
            default: return 1.0;
        }
    }();
    auto hstep = [h0](double x) { return x < 0.0 ? 0.0 : (x > 0.0 ? 1.0 : h0); };
    v.limit_cover = {alpha + t, beta + t - (hstep(alpha + t) - hstep(alpha))};
    v.exact = Point::torus(v.exact_cover[0], v.exact_cover[1]);
    v.limit = Point::torus(v.limit_cover[0], v.limit_cover[1]);
    return v;
}

inline TorusFlowValue closed_form_torus(const Bump& bump, const ScalingLaw& law, double eps,
                                        double t, double alpha, double beta) {
    const double s = law(eps);
    if (!(s < pi)) throw ConfigError("closed_form_torus: sigma(eps) must be < pi");
    return closed_form_torus(SmoothedStep(bump, s), t, alpha, beta);
}

/// Probe of the limit-flow group law: extract Psi(s, p), restart from it,
/// and compare Psi(t, Psi(s, p)) with Psi(s+t, p). When the restarted family
/// fails its Cauchy check the start point is snapped to the nearest grid
/// node and the extraction repeated.
struct CompositionProbe {
    Point p0;
    double s = 0.0, t = 0.0;
    Point inner;
    Point composed;
    Point direct;
    double defect = 0.0;
    bool inner_converged = false;
    bool outer_converged = false;
    bool fallback_used = false;
};

namespace detail {

struct ExtractedPoint {
    std::vector<double> cover;
    bool converged = false;
};

inline ExtractedPoint extract_flow_value(const VectorFieldNet& f, double duration,
                                         const std::vector<double>& start_cover,
                                         const IvpConfig& cfg, StepperStats& stats) {
    std::vector<std::vector<double>> finals;
    for (double eps : f.net().values()) {
        std::vector<double> y = start_cover;
        advance_cover(f, eps, y, 0.0, duration, cfg, stats);
        finals.push_back(std::move(y));
    }
    std::vector<double> diffs;
    for (std::size_t j = 0; j + 1 < finals.size(); ++j)
        diffs.push_back(distance(Point::on(f.space(), finals[j]),
                                 Point::on(f.space(), finals[j + 1])));
    ExtractedPoint out;
    out.cover.assign(finals.back().begin(), finals.back().end());
    out.converged = cauchy_converged(diffs, 20.0 * (cfg.abs_tol + cfg.rel_tol));
    return out;
}

} // namespace detail

inline CompositionProbe compose_limit_flows(const VectorFieldNet& f, double s, double t,
                                            const Point& p0, const IvpConfig& cfg,
                                            const std::vector<Point>& snap_grid = {}) {
    if (p0.space() != f.space())
        throw ConfigError("compose_limit_flows: point is not in the field's space");
    CompositionProbe probe;
    probe.p0 = p0;
    probe.s = s;
    probe.t = t;
    StepperStats stats;

    auto inner = detail::extract_flow_value(f, s, p0.coords(), cfg, stats);
    probe.inner = Point::on(f.space(), inner.cover);
    probe.inner_converged = inner.converged;

    auto outer = detail::extract_flow_value(f, t, inner.cover, cfg, stats);
    probe.outer_converged = outer.converged;
    if (!outer.converged && !snap_grid.empty()) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < snap_grid.size(); ++k) {
            const double dk = distance(probe.inner, snap_grid[k]);
            if (dk < best_d) {
                best_d = dk;
                best = k;
            }
        }
        probe.fallback_used = true;
        outer = detail::extract_flow_value(f, t, snap_grid[best].coords(), cfg, stats);
        probe.outer_converged = outer.converged;
    }
    probe.composed = Point::on(f.space(), outer.cover);

    auto direct = detail::extract_flow_value(f, s + t, p0.coords(), cfg, stats);
    probe.direct = Point::on(f.space(), direct.cover);
    probe.defect = distance(probe.composed, probe.direct);
    return probe;
}

/// Summary of what the flow table shows against the uniform-hypothesis
/// checklist: do the eps-limits exist pointwise, and do the bounds that
/// certify a unique generalized flow actually hold for this field?
struct UniformLimitSummary {
    std::string field_label;
    std::size_t grid_points = 0;
    std::size_t converged_points = 0;
    bool pointwise_limit_exists = false;
    double max_last_diff = 0.0;
    GrowthClass flow_derivative_growth;
    ConditionReport global_bound;
    ConditionReport derivative_logtype;
    bool uniform_conditions_met = false;
    std::string conclusion;
};

inline UniformLimitSummary uniform_limit_summary(const FlowTable& table, const VectorFieldNet& f) {
    UniformLimitSummary rep;
    rep.field_label = table.field_label;
    rep.grid_points = table.n_p() * table.n_t();
    const std::size_t ne = table.n_eps();
    for (std::size_t ip = 0; ip < table.n_p(); ++ip)
        for (std::size_t it = 0; it < table.n_t(); ++it) {
            if (table.converged_at(ip, it)) ++rep.converged_points;
            rep.max_last_diff = std::max(rep.max_last_diff, table.diff_at(ip, it, ne - 2));
        }
    rep.pointwise_limit_exists = rep.converged_points == rep.grid_points;

    // sup ||D Phi^eps|| over a coarse (t, p) subsample, classified in eps.
    IvpConfig vcfg;
    vcfg.abs_tol = 1e-8;
    vcfg.rel_tol = 1e-8;
    const std::size_t pstride = std::max<std::size_t>(1, table.n_p() / 5);
    const std::size_t tstride = std::max<std::size_t>(1, table.n_t() / 5);
    std::vector<std::pair<double, double>> dseries;
    for (std::size_t ie = 0; ie < ne; ++ie) {
        double sup = 0.0;
        for (std::size_t ip = 0; ip < table.n_p(); ip += pstride)
            for (std::size_t it = 0; it < table.n_t(); it += tstride) {
                const double tt = table.t_grid[it];
                const auto vr =
                    variational_derivative(f, table.eps[ie], tt, table.p_grid[ip], vcfg);
                sup = std::max(sup, vr.op_norm);
            }
        dseries.emplace_back(table.eps[ie], sup);
    }
    rep.flow_derivative_growth = classify_growth(dseries);

    // Field-level uniform conditions on an adequate grid.
    const double need = f.net().sigma_max() / 4.0;
    SampleGrid grid;
    switch (f.space().kind()) {
        case Space::Kind::Circle: {
            std::size_t m = std::size_t(std::ceil(two_pi / need)) + 1;
            m += m % 2;
            grid = circle_grid(std::max<std::size_t>(m, 64));
            break;
        }
        case Space::Kind::Torus2: {
            std::size_t m = std::size_t(std::ceil(two_pi / need)) + 1;
            m += m % 2;
            grid = torus_grid(std::max<std::size_t>(m, 64), 8);
            break;
        }
        default: {
            double lo = 0.0, hi = 0.0;
            for (const auto& p : table.p_grid)
                for (double c : p.coords()) {
                    lo = std::min(lo, c);
                    hi = std::max(hi, c);
                }
            grid = euclidean_grid(lo - 1.0, hi + 1.0, 512);
        }
    }
    rep.global_bound = check_global_bound(f, grid);
    rep.derivative_logtype = check_logtype_derivative(f, grid);
    rep.uniform_conditions_met =
        rep.global_bound.verdict == ConditionReport::Verdict::Holds &&
        rep.derivative_logtype.verdict == ConditionReport::Verdict::Holds;

    // The uniform hypotheses certify a unique generalized flow at the net
    // level; they promise nothing about the eps->0 limit map, which can stay
    // discontinuous (and can lose the group law) while both checks hold.
    if (rep.uniform_conditions_met)
        rep.conclusion = rep.pointwise_limit_exists
                             ? "uniform bound and log-type derivative hold and the grid "
                               "limits converged; a unique generalized flow is certified, "
                               "with no continuity promise for the limit map"
                             : "uniform bound and log-type derivative hold but grid limits "
                               "did not converge; refine the net";
    else
        rep.conclusion = rep.pointwise_limit_exists
                             ? "pointwise limits exist but the uniform hypotheses fail; "
                               "no generalized-flow guarantee applies"
                             : "uniform hypotheses fail and grid limits did not converge";
    return rep;
}

} // namespace epsflow
