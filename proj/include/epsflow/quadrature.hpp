#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "epsflow/errors.hpp"

namespace epsflow {

/// Gauss-Legendre nodes/weights on [-1, 1].
namespace gl {

// 8-point rule, exact through degree 15.
inline constexpr std::array<double, 8> nodes8 = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> weights8 = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// 16-point rule, exact through degree 31.
inline constexpr std::array<double, 16> nodes16 = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
inline constexpr std::array<double, 16> weights16 = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

} // namespace gl

/// Fixed-order Gauss-Legendre integral of f over [a, b].
template <class F>
double integrate_gl8(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < 8; ++i) s += gl::weights8[i] * f(c + h * gl::nodes8[i]);
    return s * h;
}

template <class F>
double integrate_gl16(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < 16; ++i) s += gl::weights16[i] * f(c + h * gl::nodes16[i]);
    return s * h;
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth, double a0, double b0) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw QuadratureError("adaptive quadrature: depth exhausted", a0, b0);
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, a0, b0) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, a0, b0);
}

} // namespace detail

/// Adaptive Simpson integral of f over [a, b] to absolute tolerance tol.
/// Used as an independent oracle against the cached antiderivative tables.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (!(b >= a)) throw ConfigError("integrate_adaptive: requires a <= b");
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, a, b);
}

/// Integral of f over caller-supplied panels chosen so that f is smooth on
/// each; panels are bisected until halving a piece no longer moves its GL16
/// value, with the budget spread over the pieces by length.
template <class F>
double integrate_panels(F&& f, const std::vector<std::pair<double, double>>& panels,
                        double rel_tol = 1e-10) {
    double total = 0.0;
    for (const auto& [a, b] : panels) {
        if (b <= a) continue;
        const double floor = rel_tol * (1.0 + std::abs(integrate_gl16(f, a, b)));
        struct Rec {
            F& fn;
            double floor, len;
            double run(double lo, double hi, int depth) {
                const double m = 0.5 * (lo + hi);
                const double coarse = integrate_gl16(fn, lo, hi);
                const double fine = integrate_gl16(fn, lo, m) + integrate_gl16(fn, m, hi);
                if (std::abs(fine - coarse) <= floor * (hi - lo) / len) return fine;
                if (depth <= 0)
                    throw QuadratureError("panel quadrature did not converge", lo, hi);
                return run(lo, m, depth - 1) + run(m, hi, depth - 1);
            }
        } rec{f, floor, b - a};
        total += rec.run(a, b, 30);
    }
    return total;
}

/// Integral of p(x)*exp(i w x) over [a, b] where p is the degree-7 polynomial
/// interpolating f at 8 GL nodes. Exact in p via repeated integration by parts
/// (each term carries another 1/(iw), so the reduction is finite and stable for
/// large |w|); falls back to plain GL when the panel holds little oscillation.
/// The caller chooses panels on which f is polynomial-resolvable.
template <class F>
std::complex<double> integrate_oscillatory_exp(F&& f, double w, double a, double b) {
    const double len = b - a;
    if (std::abs(w) * len < 8.0) {
        const auto g = [&](double x) { return f(x) * std::exp(std::complex<double>(0.0, w * x)); };
        const double c = 0.5 * (a + b), h = 0.5 * len;
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < 16; ++i) s += gl::weights16[i] * g(c + h * gl::nodes16[i]);
        return s * h;
    }
    // Newton divided differences at GL8 nodes, then Taylor coefficients at the
    // endpoints via repeated Horner passes.
    std::array<double, 8> xs{}, dd{};
    const double c = 0.5 * (a + b), h = 0.5 * len;
    for (int i = 0; i < 8; ++i) {
        xs[i] = c + h * gl::nodes8[i];
        dd[i] = f(xs[i]);
    }
    for (int j = 1; j < 8; ++j)
        for (int i = 7; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
    auto derivs_at = [&](double x) {
        // returns d with d[k] = p^(k)(x) (Taylor coefficients times k!)
        std::array<double, 8> cp{};
        cp[0] = dd[7];
        int deg = 0;
        for (int i = 6; i >= 0; --i) {
            ++deg;
            for (int k = deg; k >= 1; --k) cp[k] = cp[k - 1] + cp[k] * (x - xs[i]);
            cp[0] = cp[0] * (x - xs[i]) + dd[i];
        }
        double fact = 1.0;
        for (int k = 2; k < 8; ++k) {
            fact *= k;
            cp[k] *= fact;
        }
        return cp;
    };
    const auto ta = derivs_at(a), tb = derivs_at(b);
    // int p e^{iwx} = sum_k (-1)^k [ p^(k)(x) e^{iwx} ] / (iw)^{k+1}
    const std::complex<double> iw(0.0, w);
    const std::complex<double> ea = std::exp(std::complex<double>(0.0, w * a));
    const std::complex<double> eb = std::exp(std::complex<double>(0.0, w * b));
    std::complex<double> s = 0.0, coef = 1.0 / iw;
    for (int k = 0; k < 8; ++k) {
        s += coef * (tb[k] * eb - ta[k] * ea);
        coef *= -1.0 / iw;
    }
    return s;
}

/// Real projections of the oscillatory rule.
template <class F>
double integrate_oscillatory_sin(F&& f, double w, double a, double b) {
    return integrate_oscillatory_exp(std::forward<F>(f), w, a, b).imag();
}

template <class F>
double integrate_oscillatory_cos(F&& f, double w, double a, double b) {
    return integrate_oscillatory_exp(std::forward<F>(f), w, a, b).real();
}

} // namespace epsflow
