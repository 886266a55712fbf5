#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epsflow/errors.hpp"

namespace epsflow {

/// Width of the smoothing window as a function of the net parameter.
/// InverseLog is the canonical choice: sigma(eps) = 1/|ln eps|.
class ScalingLaw {
  public:
    enum class Kind { InverseLog, Power, Tabulated };

    static ScalingLaw inverse_log() { return ScalingLaw(Kind::InverseLog, 0.0, {}); }

    static ScalingLaw power(double q) {
        if (!(q > 0.0)) throw ConfigError("ScalingLaw::power: exponent must be > 0");
        return ScalingLaw(Kind::Power, q, {});
    }

    /// Explicit (eps, sigma) pairs; evaluation is exact-lookup only.
    static ScalingLaw tabulated(std::vector<std::pair<double, double>> table) {
        if (table.size() < 2) throw ConfigError("ScalingLaw::tabulated: need >= 2 entries");
        for (const auto& [e, s] : table)
            if (!(e > 0.0 && e < 1.0 && s > 0.0))
                throw ConfigError("ScalingLaw::tabulated: entries must have eps in (0,1), sigma > 0");
        return ScalingLaw(Kind::Tabulated, 0.0, std::move(table));
    }

    Kind kind() const { return kind_; }
    double exponent() const { return q_; }

    double operator()(double eps) const {
        switch (kind_) {
            case Kind::InverseLog:
                if (!(eps > 0.0 && eps < 1.0))
                    throw ConfigError("sigma: inverse-log law needs eps in (0,1)");
                return 1.0 / std::abs(std::log(eps));
            case Kind::Power:
                if (!(eps > 0.0 && eps <= 1.0))
                    throw ConfigError("sigma: power law needs eps in (0,1]");
                return std::pow(eps, q_);
            default:
                for (const auto& [e, s] : table_)
                    if (std::abs(e - eps) <= 1e-12 * e) return s;
                throw ConfigError("sigma: tabulated law has no entry for eps=" + std::to_string(eps));
        }
    }

    std::string name() const {
        switch (kind_) {
            case Kind::InverseLog: return "inverse-log";
            case Kind::Power: return "power(" + std::to_string(q_) + ")";
            default: return "tabulated";
        }
    }

  private:
    ScalingLaw(Kind k, double q, std::vector<std::pair<double, double>> t)
        : kind_(k), q_(q), table_(std::move(t)) {}
    Kind kind_;
    double q_;
    std::vector<std::pair<double, double>> table_;
};

inline double sigma(const ScalingLaw& law, double eps) { return law(eps); }

/// Strictly decreasing sequence of net parameters plus the scaling law that
/// accompanies every regularized object built on it.
class EpsilonNet {
  public:
    EpsilonNet(std::vector<double> values, ScalingLaw law)
        : values_(std::move(values)), law_(std::move(law)) {
        if (values_.size() < 4) throw ConfigError("EpsilonNet: need at least 4 entries");
        double prev_sigma = -1.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double e = values_[i];
            if (!(e > 0.0 && e <= 1.0)) throw ConfigError("EpsilonNet: entries must lie in (0,1]");
            if (i > 0 && !(e < values_[i - 1]))
                throw ConfigError("EpsilonNet: entries must be strictly decreasing");
            const double s = law_(e);
            if (!(s > 0.0)) throw ConfigError("EpsilonNet: sigma must be positive on the net");
            if (i > 0 && s > prev_sigma)
                throw ConfigError("EpsilonNet: sigma must be nonincreasing along the net");
            prev_sigma = s;
        }
    }

    const std::vector<double>& values() const { return values_; }
    const ScalingLaw& scaling() const { return law_; }
    std::size_t size() const { return values_.size(); }
    double eps_max() const { return values_.front(); }
    double eps_min() const { return values_.back(); }
    double sigma_at(std::size_t i) const { return law_(values_[i]); }
    double sigma_min() const { return law_(values_.back()); }
    double sigma_max() const { return law_(values_.front()); }

  private:
    std::vector<double> values_;
    ScalingLaw law_;
};

/// Geometric net from eps_max down to eps_min with `count` points.
inline EpsilonNet make_epsilon_net(double eps_max, double eps_min, std::size_t count,
                                   ScalingLaw law = ScalingLaw::inverse_log()) {
    if (!(count >= 4)) throw ConfigError("make_epsilon_net: count must be >= 4");
    if (!(eps_min > 0.0 && eps_min < eps_max && eps_max <= 1.0))
        throw ConfigError("make_epsilon_net: need 0 < eps_min < eps_max <= 1");
    std::vector<double> v(count);
    const double r = std::pow(eps_min / eps_max, 1.0 / double(count - 1));
    v[0] = eps_max;
    for (std::size_t k = 1; k + 1 < count; ++k) v[k] = eps_max * std::pow(r, double(k));
    v[count - 1] = eps_min;
    return EpsilonNet(std::move(v), std::move(law));
}

/// Outcome of fitting an eps-indexed nonnegative series against the model
/// family {C, b + c|ln eps|, C eps^-N, C eps^m}.
struct GrowthClass {
    enum class Class { Bounded, LogType, Power, NegligibleLike };

    Class cls = Class::Bounded;
    double constant = 0.0;   ///< C, the log slope c, the exponent N, or m.
    double intercept = 0.0;  ///< affine part of the log-type fit (diagnostic).
    double residual = 0.0;   ///< relative residual of the winning fit.
    bool ambiguous = false;  ///< no model dominated by the 5% margin.
    std::optional<std::pair<Class, double>> runner_up;  ///< next-best (class, residual).
    std::vector<std::pair<double, double>> evidence;    ///< the (eps, value) series.
    std::string rule_trace;  ///< human-readable decision trail.

    static const char* name(Class c) {
        switch (c) {
            case Class::Bounded: return "bounded";
            case Class::LogType: return "log-type";
            case Class::Power: return "power";
            default: return "negligible-like";
        }
    }
};

namespace detail {

struct Fit {
    bool valid = false;
    double residual = 1e300;
    double constant = 0.0;
    double intercept = 0.0;
};

inline double rms(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return std::sqrt(s / double(r.size()));
}

// Ordinary least squares y ~ b0 + b1 x.
inline void ols(const std::vector<double>& x, const std::vector<double>& y, double& b0,
                double& b1) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    b1 = sxy / sxx;
    b0 = my - b1 * mx;
}

} // namespace detail

/// Classify the growth of a nonnegative series sampled on an epsilon net.
///
/// Decision rule (pinned; the 5% margin is a finite-sample convention):
///  - bounded:        y = C           fitted by the mean; relative residual in y.
///  - log-type:       y = b + c L,    L = |ln eps|, c > 0 required; residual in y.
///  - power:          ln y = a + N L, N > 0 required; residual in ln y.
///  - negligible:     ln y = a - m L, m > 0 required; residual in ln y.
/// Winner = smallest relative residual. If the runner-up is within 5% of the
/// winner, the tie goes to the weaker growth claim (bounded < log-type <
/// power/negligible) and the result is flagged ambiguous.
inline GrowthClass classify_growth(const std::vector<std::pair<double, double>>& series) {
    using Class = GrowthClass::Class;
    if (series.size() < 4) throw ConfigError("classify_growth: need at least 4 samples");
    std::vector<double> eps, y;
    for (const auto& [e, v] : series) {
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("classify_growth: eps must lie in (0,1)");
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError("classify_growth: values must be finite and >= 0");
        eps.push_back(e);
        y.push_back(v);
    }
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1]))
            throw ConfigError("classify_growth: eps samples must be strictly decreasing");

    GrowthClass out;
    out.evidence = series;

    const double ymax = *std::max_element(y.begin(), y.end());
    if (ymax == 0.0) {
        out.cls = Class::Bounded;
        out.rule_trace = "all values exactly zero -> bounded(0)";
        return out;
    }

    std::vector<double> L(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) L[i] = std::abs(std::log(eps[i]));

    const double yrms = detail::rms(y);

    detail::Fit fit[4]; // indexed by Class
    // bounded
    {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= double(y.size());
        std::vector<double> r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - mean;
        fit[0] = {true, detail::rms(r) / yrms, ymax, mean};
    }
    // Sloped fits must explain more than they leave behind, or the extra
    // parameter just absorbs noise and a constant series masquerades as
    // growth: require |b1|*sd(x) >= 2*rms(residual).
    auto slope_dominates = [](const std::vector<double>& x, double b1, double resid_rms) {
        double mx = 0.0;
        for (double v : x) mx += v;
        mx /= double(x.size());
        double sxx = 0.0;
        for (double v : x) sxx += (v - mx) * (v - mx);
        const double sd = std::sqrt(sxx / double(x.size()));
        return std::abs(b1) * sd >= 2.0 * resid_rms;
    };
    // log-type (affine in L; dominant term must grow)
    {
        double b0, b1;
        detail::ols(L, y, b0, b1);
        if (b1 > 0.0) {
            std::vector<double> r(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - (b0 + b1 * L[i]);
            const double res = detail::rms(r);
            if (slope_dominates(L, b1, res)) fit[1] = {true, res / yrms, b1, b0};
        }
    }
    // power / negligible share one regression in (L, ln y); slope sign decides.
    {
        std::vector<double> Lnz, lny;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] > 0.0) {
                Lnz.push_back(L[i]);
                lny.push_back(std::log(y[i]));
            }
        if (Lnz.size() >= 4) {
            double b0, b1;
            detail::ols(Lnz, lny, b0, b1);
            std::vector<double> r(lny.size());
            for (std::size_t i = 0; i < lny.size(); ++i) r[i] = lny[i] - (b0 + b1 * Lnz[i]);
            const double res = detail::rms(r);
            if (slope_dominates(Lnz, b1, res)) {
                if (b1 > 0.0)
                    fit[2] = {true, res, b1, b0};
                else if (b1 < 0.0)
                    fit[3] = {true, res, -b1, b0};
            }
        }
    }

    // Rank by residual; prefer weaker growth on close calls.
    const int weakness[4] = {0, 1, 2, 2}; // bounded < log < power ~ negligible
    int best = -1, second = -1;
    for (int c = 0; c < 4; ++c) {
        if (!fit[c].valid) continue;
        if (best < 0 || fit[c].residual < fit[best].residual) {
            second = best;
            best = c;
        } else if (second < 0 || fit[c].residual < fit[second].residual) {
            second = c;
        }
    }
    bool ambiguous = false;
    if (second >= 0) {
        const double rb = fit[best].residual, rs = fit[second].residual;
        if (rs - rb <= 0.05 * std::max(rs, 1e-300)) {
            ambiguous = true;
            if (weakness[second] < weakness[best]) std::swap(best, second);
        }
    }

    out.cls = static_cast<Class>(best);
    out.constant = fit[best].constant;
    out.intercept = fit[best].intercept;
    out.residual = fit[best].residual;
    out.ambiguous = ambiguous;
    if (second >= 0 && fit[second].valid)
        out.runner_up = {static_cast<Class>(second), fit[second].residual};
    out.rule_trace = std::string("winner=") + GrowthClass::name(out.cls) +
                     " residual=" + std::to_string(out.residual) +
                     (ambiguous ? " (ambiguous: runner-up within 5% margin)" : "");
    return out;
}

} // namespace epsflow
