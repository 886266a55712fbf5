#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "epsflow/errors.hpp"
#include "epsflow/quadrature.hpp"

namespace epsflow {

/// Placement of the smoothing window relative to the jump.
enum class StepCase { SymmetricA, RightB, LeftC };

inline const char* step_case_name(StepCase c) {
    switch (c) {
        case StepCase::SymmetricA: return "symmetric-a";
        case StepCase::RightB: return "right-b";
        default: return "left-c";
    }
}

namespace detail {

// exp(-1/(1-x^2)) underflows long before |x| -> 1; cutting off at
// 1 - x^2 <= 1/700 avoids inf*0 in the derivative without changing any
// representable value (exp(-700) ~ 1e-304).
inline constexpr double bump_cutoff = 1.0 / 700.0;

inline double bump_core(double x) {
    const double t = 1.0 - x * x;
    if (t <= bump_cutoff) return 0.0;
    return std::exp(-1.0 / t);
}

inline double bump_core_derivative(double x) {
    const double t = 1.0 - x * x;
    if (t <= bump_cutoff) return 0.0;
    return std::exp(-1.0 / t) * (-2.0 * x / (t * t));
}

// 1 / int_{-1}^{1} exp(-1/(1-x^2)) dx, computed once to 1e-14.
inline double bump_norm_constant() {
    static const double c = [] {
        const double integral =
            integrate_adaptive([](double x) { return bump_core(x); }, -1.0, 1.0, 1e-14);
        return 1.0 / integral;
    }();
    return c;
}

// Cumulative antiderivative of a density on [lo, hi]: node values by stacked
// GL8 panels, in-segment evaluation by quintic Hermite (the density and its
// derivative at the nodes pin H' and H''). Normalized so H(hi) = 1 exactly;
// clamped per segment so monotonicity survives rounding.
class StepTable {
  public:
    template <class Rho>
    StepTable(double lo, double hi, Rho&& rho) : lo_(lo), hi_(hi) {
        H_.resize(segments_ + 1);
        d_.resize(segments_ + 1);
        H_[0] = 0.0;
        for (std::size_t k = 0; k <= segments_; ++k) {
            const double x = node(k);
            d_[k] = rho(x);
            if (k > 0) H_[k] = H_[k - 1] + integrate_gl8(rho, node(k - 1), x);
        }
        const double total = H_[segments_];
        if (!(total > 0.0)) throw ConfigError("StepTable: density has nonpositive mass");
        for (auto& v : H_) v /= total;
        for (auto& v : d_) v /= total;
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // Monotone cubic Hermite: exact slopes where the mesh resolves the decay,
    // Fritsch-Carlson-capped in the superexponential foot so the eval can
    // never dip between knots.
    double eval(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        const double h = (hi_ - lo_) / double(segments_);
        std::size_t k = std::size_t((x - lo_) / h);
        if (k >= segments_) k = segments_ - 1;
        const double H0 = H_[k], H1 = H_[k + 1];
        const double dy = H1 - H0;
        if (dy <= 0.0) return H0;
        const double u = (x - node(k)) / h;
        const double cap = 3.0 * dy;
        const double d0 = std::min(d_[k] * h, cap), d1 = std::min(d_[k + 1] * h, cap);
        const double u2 = u * u, u3 = u2 * u;
        double v = H0 * (2.0 * u3 - 3.0 * u2 + 1.0) + H1 * (3.0 * u2 - 2.0 * u3) +
                   d0 * (u3 - 2.0 * u2 + u) + d1 * (u3 - u2);
        if (v < H0) v = H0;
        if (v > H1) v = H1;
        return v;
    }

  private:
    double node(std::size_t k) const { return lo_ + (hi_ - lo_) * double(k) / double(segments_); }

    static constexpr std::size_t segments_ = 2048;
    double lo_, hi_;
    std::vector<double> H_, d_;
};

// Shared unit-width symmetric antiderivative; the plateau ramp reuses it so
// its range is exactly [0,1].
inline const StepTable& unit_step_table() {
    static const StepTable t(-1.0, 1.0,
                             [](double x) { return bump_norm_constant() * bump_core(x); });
    return t;
}

} // namespace detail

/// Smooth nonnegative kernel with unit mass and compact support inside [-1,1].
/// Standard shape: the compactly supported exponential profile, shifted and
/// compressed per case. Plateau shape (symmetric only): flat top of bisected
/// half-width with smooth shoulders, values in [0,1], peak exactly 1.
class Bump {
  public:
    static Bump build(StepCase cs, bool plateau) {
        if (plateau && cs != StepCase::SymmetricA)
            throw ConfigError("Bump: the plateau variant is symmetric; use case a");
        return Bump(cs, plateau);
    }

    StepCase step_case() const { return case_; }
    bool is_plateau() const { return plateau_; }
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    /// Measured integral (reported; unit mass up to quadrature tolerance).
    double mass() const { return mass_; }
    double peak() const { return peak_; }
    /// Flat-top half-width of the plateau variant (0 otherwise).
    double plateau_half_width() const { return plateau_ ? flat_ : 0.0; }

    double value(double x) const {
        if (plateau_) return plateau_value(x);
        const double c = detail::bump_norm_constant();
        switch (case_) {
            case StepCase::SymmetricA: return c * detail::bump_core(x);
            case StepCase::RightB: return 2.0 * c * detail::bump_core(2.0 * x - 1.0);
            default: return 2.0 * c * detail::bump_core(2.0 * x + 1.0);
        }
    }

    double derivative(double x) const {
        if (plateau_) return plateau_derivative(x);
        const double c = detail::bump_norm_constant();
        switch (case_) {
            case StepCase::SymmetricA: return c * detail::bump_core_derivative(x);
            case StepCase::RightB: return 4.0 * c * detail::bump_core_derivative(2.0 * x - 1.0);
            default: return 4.0 * c * detail::bump_core_derivative(2.0 * x + 1.0);
        }
    }

    double operator()(double x) const { return value(x); }

    /// rho_s(x) = rho(x/s)/s.
    double scaled(double s, double x) const {
        if (!(s > 0.0)) throw ConfigError("Bump::scaled: scale must be positive");
        return value(x / s) / s;
    }

    double scaled_derivative(double s, double x) const {
        if (!(s > 0.0)) throw ConfigError("Bump::scaled_derivative: scale must be positive");
        return derivative(x / s) / (s * s);
    }

  private:
    // Shoulder width is fixed; the flat-top half-width is the free parameter
    // the unit-mass bisection solves for.
    static constexpr double ramp_width_ = 0.5;

    Bump(StepCase cs, bool plateau) : case_(cs), plateau_(plateau) {
        if (plateau_) {
            flat_ = solve_plateau_half_width();
            lo_ = -(flat_ + ramp_width_);
            hi_ = flat_ + ramp_width_;
            peak_ = 1.0;
            mass_ = plateau_mass(flat_);
        } else {
            switch (case_) {
                case StepCase::SymmetricA: lo_ = -1.0; hi_ = 1.0; break;
                case StepCase::RightB: lo_ = 0.0; hi_ = 1.0; break;
                case StepCase::LeftC: lo_ = -1.0; hi_ = 0.0; break;
            }
            peak_ = value(0.5 * (lo_ + hi_));
            mass_ = integrate_adaptive([this](double x) { return value(x); }, lo_, hi_, 1e-12);
        }
    }

    static double plateau_profile(double x, double flat) {
        const double ax = std::abs(x);
        if (ax <= flat) return 1.0;
        if (ax >= flat + ramp_width_) return 0.0;
        // Descend along the shared smooth step; range stays exactly [0,1].
        const double z = 2.0 * (ax - flat) / ramp_width_ - 1.0;
        return 1.0 - detail::unit_step_table().eval(z);
    }

    static double plateau_mass(double flat) {
        return integrate_adaptive([flat](double x) { return plateau_profile(x, flat); },
                                  -(flat + ramp_width_), flat + ramp_width_, 1e-12);
    }

    static double solve_plateau_half_width() {
        static const double solved = [] {
            double a_lo = 0.0, a_hi = 1.0 - ramp_width_;
            double m_lo = plateau_mass(a_lo) - 1.0;
            double m_hi = plateau_mass(a_hi) - 1.0;
            if (m_lo * m_hi > 0.0)
                throw ConfigError(
                    "Bump: plateau normalization failed to bracket a root; integral is " +
                    std::to_string(m_lo + 1.0) + " at minimal width and " +
                    std::to_string(m_hi + 1.0) + " at maximal width");
            for (int i = 0; i < 60 && a_hi - a_lo > 1e-13; ++i) {
                const double mid = 0.5 * (a_lo + a_hi);
                const double m = plateau_mass(mid) - 1.0;
                if (m == 0.0) return mid;
                if (m * m_lo < 0.0) a_hi = mid;
                else { a_lo = mid; m_lo = m; }
            }
            return 0.5 * (a_lo + a_hi);
        }();
        return solved;
    }

    double plateau_value(double x) const { return plateau_profile(x, flat_); }

    double plateau_derivative(double x) const {
        const double ax = std::abs(x);
        if (ax <= flat_ || ax >= hi_) return 0.0;
        const double z = 2.0 * (ax - flat_) / ramp_width_ - 1.0;
        const double dz =
            detail::bump_norm_constant() * detail::bump_core(z) * 2.0 / ramp_width_;
        return x > 0.0 ? -dz : dz;
    }

    StepCase case_;
    bool plateau_;
    double lo_ = -1.0, hi_ = 1.0;
    double peak_ = 0.0;
    double mass_ = 1.0;
    double flat_ = 0.0;
};

inline Bump build_bump(StepCase cs, bool plateau = false) { return Bump::build(cs, plateau); }

/// H_eps(x) = int_{-inf}^{x} rho_sigma, with rho_sigma(x) = rho(x/sigma)/sigma.
/// Evaluated from a precomputed antiderivative table; exact 0/1 outside the
/// scaled support, nondecreasing inside.
class SmoothedStep {
  public:
    SmoothedStep(Bump bump, double sigma)
        : bump_(std::move(bump)),
          sigma_(validated(sigma)),
          table_(bump_.support_lo(), bump_.support_hi(),
                 [this](double x) { return bump_.value(x); }) {}

    const Bump& bump() const { return bump_; }
    double sigma() const { return sigma_; }
    StepCase step_case() const { return bump_.step_case(); }

    /// Scaled support of the window.
    double support_lo() const { return sigma_ * bump_.support_lo(); }
    double support_hi() const { return sigma_ * bump_.support_hi(); }

    double value(double x) const { return table_.eval(x / sigma_); }
    double operator()(double x) const { return value(x); }

    /// d/dx H_eps = rho_sigma.
    double derivative(double x) const { return bump_.scaled(sigma_, x); }
    double second_derivative(double x) const { return bump_.scaled_derivative(sigma_, x); }

  private:
    static double validated(double sigma) {
        if (!(sigma > 0.0)) throw ConfigError("SmoothedStep: sigma must be positive");
        return sigma;
    }

    Bump bump_;
    double sigma_;
    detail::StepTable table_;
};

inline double smoothed_heaviside(const SmoothedStep& step, double x) { return step.value(x); }

/// Dyadic comb: sum over integers n of rho0(2^{|n|}(x - n)). Tooth supports
/// shrink geometrically, so only the integers flanking x can contribute;
/// summing floor(x) and ceil(x) covers the n in {-1,0,1} overlap region too.
inline double comb(const Bump& rho0, double x) {
    if (!rho0.is_plateau()) throw ConfigError("comb: needs the plateau bump");
    if (!std::isfinite(x)) throw ConfigError("comb: x must be finite");
    const double r = rho0.support_hi();
    double sum = 0.0;
    const double lo = std::floor(x), hi = std::ceil(x);
    for (double n = lo; n <= hi; n += 1.0) {
        const double an = std::abs(n);
        if (an > 55.0) {
            // Doubles this large are integers and 2^{|n|} overflows the
            // window: the tooth is visible only at its center.
            if (x == n) sum += rho0.peak();
            continue;
        }
        const double arg = std::exp2(an) * (x - n);
        if (std::abs(arg) < r) sum += rho0.value(arg);
    }
    return sum;
}

inline double comb_scaled(const Bump& rho0, double eps, double x) {
    if (!(eps > 0.0)) throw ConfigError("comb_scaled: eps must be positive");
    return comb(rho0, x / eps);
}

/// L1 mass of the comb teeth centered in [-R, R], R a positive integer:
/// sum over |n| <= R of 2^{-|n|} * mass(rho0) = (3 - 2^{1-R}) * mass(rho0).
inline double comb_l1_norm(const Bump& rho0, int R) {
    if (!rho0.is_plateau()) throw ConfigError("comb_l1_norm: needs the plateau bump");
    if (R < 1) throw ConfigError("comb_l1_norm: need R >= 1");
    return (3.0 - std::exp2(1.0 - double(R))) * rho0.mass();
}

} // namespace epsflow
