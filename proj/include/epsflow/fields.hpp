#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "epsflow/epsilon.hpp"
#include "epsflow/errors.hpp"
#include "epsflow/manifold.hpp"
#include "epsflow/mollifier.hpp"

namespace epsflow {

/// eps-indexed family of smooth vector fields on one space. Evaluation takes
/// raw cover coordinates (the integrator never wraps); angular fields wrap
/// internally, which keeps them 2pi-periodic by construction.
class VectorFieldNet {
  public:
    using EvalFn = std::function<void(double eps, const double* y, double* dy)>;
    using JacFn = std::function<void(double eps, const double* y, double* jac)>;

    VectorFieldNet(Space space, EpsilonNet net, std::string label, EvalFn eval, JacFn jac,
                   std::vector<double> layer_centers = {})
        : space_(space),
          net_(std::move(net)),
          label_(std::move(label)),
          eval_(std::move(eval)),
          jac_(std::move(jac)),
          layer_centers_(std::move(layer_centers)) {
        if (!eval_ || !jac_) throw ConfigError("VectorFieldNet: missing evaluation maps");
        for (double e : net_.values()) sigmas_.emplace_back(e, net_.scaling()(e));
    }

    const Space& space() const { return space_; }
    const EpsilonNet& net() const { return net_; }
    const std::string& label() const { return label_; }

    /// Transition-layer centers in the first angle coordinate; empty for
    /// fields without layers. The integrator caps steps near them.
    const std::vector<double>& layer_centers() const { return layer_centers_; }

    double sigma(double eps) const {
        for (const auto& [e, s] : sigmas_)
            if (matches(e, eps)) return s;
        throw ConfigError("VectorFieldNet: eps is not a net element");
    }

    bool contains_eps(double eps) const {
        for (const auto& [e, s] : sigmas_)
            if (matches(e, eps)) return true;
        return false;
    }

    void eval_cover(double eps, const double* y, double* dy) const { eval_(eps, y, dy); }
    void jacobian_cover(double eps, const double* y, double* jac) const { jac_(eps, y, jac); }

    Tangent at(double eps, const Point& p) const {
        if (p.space() != space_) throw ConfigError("VectorFieldNet::at: wrong space");
        if (!contains_eps(eps)) throw ConfigError("VectorFieldNet::at: eps is not a net element");
        std::vector<double> dy(space_.dimension());
        eval_(eps, p.coords().data(), dy.data());
        return Tangent(p, std::move(dy));
    }

    std::vector<double> jacobian(double eps, const Point& p) const {
        if (p.space() != space_) throw ConfigError("VectorFieldNet::jacobian: wrong space");
        if (!contains_eps(eps)) throw ConfigError("VectorFieldNet::jacobian: eps not in net");
        std::vector<double> J(space_.dimension() * space_.dimension());
        jac_(eps, p.coords().data(), J.data());
        return J;
    }

    /// Distance (in the first angle coordinate) from y to the nearest layer
    /// window boundary |angle - center| = mult*sigma; +inf without layers.
    /// Inside a window the clearance is 0.
    double layer_clearance(double eps, const double* y, double mult = 2.0) const {
        if (layer_centers_.empty()) return std::numeric_limits<double>::infinity();
        const double s = sigma(eps);
        double best = std::numeric_limits<double>::infinity();
        for (double c : layer_centers_) {
            const double d = circle_distance(y[0], c) - mult * s;
            best = std::min(best, std::max(d, 0.0));
        }
        return best;
    }

  private:
    static bool matches(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

    Space space_;
    EpsilonNet net_;
    std::string label_;
    EvalFn eval_;
    JacFn jac_;
    std::vector<double> layer_centers_;
    std::vector<std::pair<double, double>> sigmas_;
};

/// Arc (lower, upper) outside of which the regularized jump field vanishes
/// identically at window width sigma; depends on where the case puts its
/// smoothing window relative to the jump.
inline std::pair<double, double> marsden_moving_interval(StepCase cs, double sigma) {
    switch (cs) {
        case StepCase::SymmetricA: return {-pi / 2 - sigma, pi / 2 + sigma};
        case StepCase::RightB: return {-pi / 2, pi / 2 + sigma};
        default: return {-pi / 2 - sigma, pi / 2};
    }
}

/// Circle field with tangent component H_sigma(alpha + pi/2) - H_sigma(alpha - pi/2):
/// the regularization of the indicator of the right half-circle.
inline VectorFieldNet marsden_field(StepCase cs, const EpsilonNet& net) {
    if (!(net.sigma_max() < pi / 2))
        throw ConfigError("marsden_field: sigma(eps_max) must be < pi/2 so the two smoothed "
                          "steps cannot overlap");
    auto step = std::make_shared<SmoothedStep>(build_bump(cs, false), 1.0);
    auto law = net.scaling();
    auto sig = [law](double eps) { return law(eps); };
    VectorFieldNet::EvalFn eval = [step, sig](double eps, const double* y, double* dy) {
        const double s = sig(eps);
        const double a = wrap(y[0]);
        dy[0] = step->value((a + pi / 2) / s) - step->value((a - pi / 2) / s);
    };
    VectorFieldNet::JacFn jac = [step, sig](double eps, const double* y, double* J) {
        const double s = sig(eps);
        const double a = wrap(y[0]);
        J[0] = (step->bump().value((a + pi / 2) / s) - step->bump().value((a - pi / 2) / s)) / s;
    };
    return VectorFieldNet(Space::circle(), net,
                          std::string("marsden-circle-case-") + step_case_name(cs),
                          std::move(eval), std::move(jac), {-pi / 2, pi / 2});
}

/// Torus field (1, 1 - rho_sigma(alpha)): unit drift plus a narrowing trench
/// along the line alpha = 0.
inline VectorFieldNet torus_field(const Bump& bump, const EpsilonNet& net) {
    if (!(net.sigma_max() < pi))
        throw ConfigError("torus_field: sigma(eps_max) must be < pi so the bump fits one chart");
    auto rho = std::make_shared<Bump>(bump);
    auto law = net.scaling();
    auto sig = [law](double eps) { return law(eps); };
    VectorFieldNet::EvalFn eval = [rho, sig](double eps, const double* y, double* dy) {
        const double s = sig(eps);
        dy[0] = 1.0;
        dy[1] = 1.0 - rho->scaled(s, wrap(y[0]));
    };
    VectorFieldNet::JacFn jac = [rho, sig](double eps, const double* y, double* J) {
        const double s = sig(eps);
        J[0] = 0.0;
        J[1] = 0.0;
        J[2] = -rho->scaled_derivative(s, wrap(y[0]));
        J[3] = 0.0;
    };
    return VectorFieldNet(Space::torus2(), net, "torus-drift-trench", std::move(eval),
                          std::move(jac), {0.0});
}

inline VectorFieldNet zero_field(const Space& space, const EpsilonNet& net) {
    const std::size_t n = space.dimension();
    VectorFieldNet::EvalFn eval = [n](double, const double*, double* dy) {
        std::fill(dy, dy + n, 0.0);
    };
    VectorFieldNet::JacFn jac = [n](double, const double*, double* J) {
        std::fill(J, J + n * n, 0.0);
    };
    return VectorFieldNet(space, net, "zero", std::move(eval), std::move(jac));
}

/// Evaluation grid with its density recorded (condition reports quote it).
struct SampleGrid {
    std::vector<Point> points;
    double spacing = 0.0;
};

/// Uniform circle grid; even n keeps 0 and pi on the grid.
inline SampleGrid circle_grid(std::size_t n) {
    if (n < 4) throw ConfigError("circle_grid: need at least 4 nodes");
    SampleGrid g;
    g.spacing = two_pi / double(n);
    for (std::size_t k = 1; k <= n; ++k) g.points.push_back(Point::circle(-pi + g.spacing * double(k)));
    return g;
}

inline SampleGrid torus_grid(std::size_t n_alpha, std::size_t n_beta) {
    if (n_alpha < 4 || n_beta < 4) throw ConfigError("torus_grid: need at least 4x4 nodes");
    SampleGrid g;
    const double ha = two_pi / double(n_alpha), hb = two_pi / double(n_beta);
    // Layer structure lives in the first angle; that spacing is the one the
    // density requirement constrains.
    g.spacing = ha;
    for (std::size_t i = 1; i <= n_alpha; ++i)
        for (std::size_t j = 1; j <= n_beta; ++j)
            g.points.push_back(Point::torus(-pi + ha * double(i), -pi + hb * double(j)));
    return g;
}

inline SampleGrid euclidean_grid(double lo, double hi, std::size_t n) {
    if (n < 4 || !(hi > lo)) throw ConfigError("euclidean_grid: need hi > lo and n >= 4");
    SampleGrid g;
    g.spacing = (hi - lo) / double(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        g.points.push_back(Point::euclidean({lo + g.spacing * double(k)}));
    return g;
}

/// Outcome of testing one growth hypothesis on a field.
struct ConditionReport {
    enum class Condition { LinearGrowth, GlobalBound, LogtypeDerivative, BoundedDerivative };
    enum class Verdict { Holds, Fails, Ambiguous };

    Condition condition;
    Verdict verdict = Verdict::Ambiguous;
    GrowthClass growth;
    struct Witness {
        double eps = 0.0;
        Point point;
        double value = 0.0;
    } worst;
    double grid_spacing = 0.0;
    std::size_t grid_size = 0;
    std::string rule_trace;

    static const char* condition_name(Condition c) {
        switch (c) {
            case Condition::LinearGrowth: return "linear-growth";
            case Condition::GlobalBound: return "global-bound-h";
            case Condition::LogtypeDerivative: return "logtype-derivative";
            default: return "bounded-derivative";
        }
    }
    static const char* verdict_name(Verdict v) {
        switch (v) {
            case Verdict::Holds: return "holds";
            case Verdict::Fails: return "fails";
            default: return "ambiguous";
        }
    }
};

namespace detail {

// Fit residuals above this are treated as "no model fits": verdict ambiguous.
inline constexpr double condition_fit_residual_max = 0.025;

inline double frobenius(const std::vector<double>& m) {
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
}

// Decide a condition from a classified series and the admissible classes.
inline void condition_verdict(ConditionReport& rep,
                              const std::vector<GrowthClass::Class>& admissible) {
    const auto& g = rep.growth;
    auto ok = [&](GrowthClass::Class c) {
        return std::find(admissible.begin(), admissible.end(), c) != admissible.end();
    };
    if (g.residual > condition_fit_residual_max) {
        rep.verdict = ConditionReport::Verdict::Ambiguous;
        rep.rule_trace += "; no model fits within residual " +
                          std::to_string(condition_fit_residual_max);
        return;
    }
    if (g.ambiguous && g.runner_up && ok(g.cls) != ok(g.runner_up->first)) {
        rep.verdict = ConditionReport::Verdict::Ambiguous;
        rep.rule_trace += "; near-tie straddles the admissible boundary";
        return;
    }
    rep.verdict = ok(g.cls) ? ConditionReport::Verdict::Holds : ConditionReport::Verdict::Fails;
    rep.rule_trace += std::string("; class ") + GrowthClass::name(g.cls) +
                      (ok(g.cls) ? " is admissible" : " is not admissible");
}

// Per-eps evaluation points: the caller's grid plus refinement windows of
// spacing sigma/4 around each layer center (so the sup cannot miss a peak
// narrower than the base grid).
inline std::vector<Point> refined_points(const VectorFieldNet& f, const SampleGrid& grid,
                                         double eps) {
    std::vector<Point> pts = grid.points;
    if (f.layer_centers().empty() || !f.space().angular()) return pts;
    const double s = f.sigma(eps);
    for (double c : f.layer_centers()) {
        for (int k = -12; k <= 12; ++k) {
            const double a = c + double(k) * s / 4.0;
            if (f.space().kind() == Space::Kind::Circle) pts.push_back(Point::circle(a));
            else pts.push_back(Point::torus(a, 0.0));
        }
    }
    return pts;
}

inline void require_grid_density(const VectorFieldNet& f, const SampleGrid& grid) {
    // Layer refinement is added per eps; the base grid only has to resolve
    // the widest window.
    const double need = f.net().sigma_max() / 4.0;
    if (f.space().angular() && !f.layer_centers().empty() && grid.spacing > need + 1e-12)
        throw ConfigError("condition check: grid spacing " + std::to_string(grid.spacing) +
                          " exceeds sigma(eps_max)/4 = " + std::to_string(need));
}

template <class ValueAt>
ConditionReport condition_from_sup(const VectorFieldNet& f, const SampleGrid& grid,
                                   ConditionReport::Condition cond,
                                   const std::vector<GrowthClass::Class>& admissible,
                                   ValueAt&& value_at) {
    ConditionReport rep;
    rep.condition = cond;
    rep.grid_spacing = grid.spacing;
    rep.grid_size = grid.points.size();
    std::vector<std::pair<double, double>> series;
    double worst = -1.0;
    for (double eps : f.net().values()) {
        double sup = 0.0;
        Point arg;
        const auto pts = refined_points(f, grid, eps);
        for (const auto& p : pts) {
            const double v = value_at(eps, p);
            if (v > sup) {
                sup = v;
                arg = p;
            }
        }
        series.emplace_back(eps, sup);
        if (sup > worst) {
            worst = sup;
            rep.worst = {eps, arg, sup};
        }
    }
    rep.growth = classify_growth(series);
    rep.rule_trace = rep.growth.rule_trace;
    condition_verdict(rep, admissible);
    return rep;
}

} // namespace detail

/// |F_eps(x)| <= C (1 + |x|): euclidean spaces only. The ratio sup must both
/// classify as bounded in eps and stop growing along nested radii in x.
inline ConditionReport check_linear_growth(const VectorFieldNet& f, const SampleGrid& grid) {
    if (f.space().kind() != Space::Kind::Euclidean)
        throw ConfigError("check_linear_growth: euclidean spaces only");
    auto ratio = [&](double eps, const Point& p) {
        std::vector<double> dy(f.space().dimension());
        f.eval_cover(eps, p.coords().data(), dy.data());
        double fn = 0.0, xn = 0.0;
        for (double v : dy) fn += v * v;
        for (double v : p.coords()) xn += v * v;
        return std::sqrt(fn) / (1.0 + std::sqrt(xn));
    };
    ConditionReport rep = detail::condition_from_sup(
        f, grid, ConditionReport::Condition::LinearGrowth, {GrowthClass::Class::Bounded}, ratio);

    // Nested-radius probe: the fitted C must be stable as the grid radius
    // grows, otherwise no single C works for all x.
    double rmax = 0.0;
    for (const auto& p : grid.points)
        for (double c : p.coords()) rmax = std::max(rmax, std::abs(c));
    double shell_sup[4] = {0.0, 0.0, 0.0, 0.0};
    for (const auto& p : grid.points) {
        double xn = 0.0;
        for (double c : p.coords()) xn = std::max(xn, std::abs(c));
        for (int k = 0; k < 4; ++k)
            if (xn <= rmax * double(k + 1) / 4.0 + 1e-12)
                for (double eps : f.net().values())
                    shell_sup[k] = std::max(shell_sup[k], ratio(eps, p));
    }
    if (shell_sup[3] > 1.05 * shell_sup[2] && shell_sup[3] > 0.0) {
        rep.verdict = ConditionReport::Verdict::Fails;
        rep.rule_trace += "; ratio still growing at the outermost radius (" +
                          std::to_string(shell_sup[2]) + " -> " + std::to_string(shell_sup[3]) +
                          ")";
    }
    return rep;
}

/// sup_p ||F_eps(p)||_h bounded uniformly in eps.
inline ConditionReport check_global_bound(const VectorFieldNet& f, const SampleGrid& grid) {
    detail::require_grid_density(f, grid);
    auto norm_at = [&](double eps, const Point& p) {
        std::vector<double> dy(f.space().dimension());
        f.eval_cover(eps, p.coords().data(), dy.data());
        double s = 0.0;
        for (double v : dy) s += v * v;
        return std::sqrt(s);
    };
    return detail::condition_from_sup(f, grid, ConditionReport::Condition::GlobalBound,
                                      {GrowthClass::Class::Bounded}, norm_at);
}

namespace detail {

inline ConditionReport derivative_condition(const VectorFieldNet& f, const SampleGrid& grid,
                                            ConditionReport::Condition cond,
                                            const std::vector<GrowthClass::Class>& admissible) {
    require_grid_density(f, grid);
    const std::size_t n = f.space().dimension();
    auto norm_at = [&, n](double eps, const Point& p) {
        std::vector<double> J(n * n);
        f.jacobian_cover(eps, p.coords().data(), J.data());
        return frobenius(J);
    };
    return condition_from_sup(f, grid, cond, admissible, norm_at);
}

} // namespace detail

/// sup_p ||DF_eps(p)|| grows at most like a + b|ln eps|.
inline ConditionReport check_logtype_derivative(const VectorFieldNet& f, const SampleGrid& grid) {
    return detail::derivative_condition(f, grid, ConditionReport::Condition::LogtypeDerivative,
                                        {GrowthClass::Class::Bounded, GrowthClass::Class::LogType});
}

/// sup_p ||DF_eps(p)|| bounded uniformly in eps.
inline ConditionReport check_bounded_derivative(const VectorFieldNet& f, const SampleGrid& grid) {
    return detail::derivative_condition(f, grid, ConditionReport::Condition::BoundedDerivative,
                                        {GrowthClass::Class::Bounded});
}

/// Compare the analytic derivative map against fourth-order central
/// differences of the field at step sigma(eps)/100; returns the worst
/// norm-relative deviation over the samples.
inline double derivative_consistency(const VectorFieldNet& f,
                                     const std::vector<std::pair<double, Point>>& samples) {
    const std::size_t n = f.space().dimension();
    double worst = 0.0;
    std::vector<double> J(n * n), Jfd(n * n), yp(n), ym(n), fp(n), fm(n), fp2(n), fm2(n);
    for (const auto& [eps, p] : samples) {
        const double h = f.sigma(eps) / 100.0;
        f.jacobian_cover(eps, p.coords().data(), J.data());
        for (std::size_t j = 0; j < n; ++j) {
            auto shifted = [&](double off, std::vector<double>& out) {
                std::vector<double> y = p.coords();
                y[j] += off;
                f.eval_cover(eps, y.data(), out.data());
            };
            shifted(h, fp);
            shifted(-h, fm);
            shifted(2.0 * h, fp2);
            shifted(-2.0 * h, fm2);
            for (std::size_t i = 0; i < n; ++i)
                Jfd[i * n + j] = (-fp2[i] + 8.0 * fp[i] - 8.0 * fm[i] + fm2[i]) / (12.0 * h);
        }
        double diff = 0.0;
        for (std::size_t k = 0; k < n * n; ++k) diff += (Jfd[k] - J[k]) * (Jfd[k] - J[k]);
        diff = std::sqrt(diff);
        // Relative to the derivative's own size or the field's characteristic
        // derivative scale ||f||/sigma, so a sample on a zero crossing of the
        // derivative does not turn roundoff into a fake violation.
        f.eval_cover(eps, p.coords().data(), fp.data());
        double fnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) fnorm += fp[i] * fp[i];
        const double scale = detail::frobenius(J) + std::sqrt(fnorm) / f.sigma(eps);
        if (scale > 0.0) worst = std::max(worst, diff / scale);
        else worst = std::max(worst, diff);
    }
    return worst;
}

} // namespace epsflow
