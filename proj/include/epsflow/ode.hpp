#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "epsflow/errors.hpp"

namespace epsflow {

/// Counters from one adaptive integration sweep.
struct StepperStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0.0;

    void absorb(const StepperStats& o) {
        accepted += o.accepted;
        rejected += o.rejected;
        rhs_evals += o.rhs_evals;
        min_step = std::min(min_step, o.min_step);
        max_step = std::max(max_step, o.max_step);
    }
};

struct Dopri5Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_steps = 2'000'000;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
inline constexpr double dp_c2 = 1.0 / 5.0, dp_c3 = 3.0 / 10.0, dp_c4 = 4.0 / 5.0,
                        dp_c5 = 8.0 / 9.0;
inline constexpr double dp_a21 = 1.0 / 5.0;
inline constexpr double dp_a31 = 3.0 / 40.0, dp_a32 = 9.0 / 40.0;
inline constexpr double dp_a41 = 44.0 / 45.0, dp_a42 = -56.0 / 15.0, dp_a43 = 32.0 / 9.0;
inline constexpr double dp_a51 = 19372.0 / 6561.0, dp_a52 = -25360.0 / 2187.0,
                        dp_a53 = 64448.0 / 6561.0, dp_a54 = -212.0 / 729.0;
inline constexpr double dp_a61 = 9017.0 / 3168.0, dp_a62 = -355.0 / 33.0,
                        dp_a63 = 46732.0 / 5247.0, dp_a64 = 49.0 / 176.0,
                        dp_a65 = -5103.0 / 18656.0;
inline constexpr double dp_b1 = 35.0 / 384.0, dp_b3 = 500.0 / 1113.0, dp_b4 = 125.0 / 192.0,
                        dp_b5 = -2187.0 / 6784.0, dp_b6 = 11.0 / 84.0;
// y1 - yhat1, including the FSAL stage.
inline constexpr double dp_e1 = 71.0 / 57600.0, dp_e3 = -71.0 / 16695.0, dp_e4 = 71.0 / 1920.0,
                        dp_e5 = -17253.0 / 339200.0, dp_e6 = 22.0 / 525.0, dp_e7 = -1.0 / 40.0;
// Fourth-order continuous extension.
inline constexpr double dp_d1 = -12715105075.0 / 11282082432.0,
                        dp_d3 = 87487479700.0 / 32700410799.0,
                        dp_d4 = -10690763975.0 / 1880347072.0,
                        dp_d5 = 701980252875.0 / 199316789632.0,
                        dp_d6 = -1453857185.0 / 822651844.0, dp_d7 = 69997945.0 / 29380423.0;

// Error per unit step behaves like h^4 for a fifth-order solution.
inline constexpr double dp_epus_order = 4.0;
inline constexpr double dp_safety = 0.9;
inline constexpr double dp_shrink_min = 0.2;
inline constexpr double dp_grow_max = 5.0;
inline constexpr double dp_pi_alpha = 0.7 / dp_epus_order;
inline constexpr double dp_pi_beta = 0.3 / dp_epus_order;

} // namespace detail

/// Quartic interpolant over one accepted step [t_old, t_old + h].
class DenseOutput {
  public:
    void resize(std::size_t n) {
        n_ = n;
        r_.assign(5 * n, 0.0);
    }

    double* r(int k) { return r_.data() + std::size_t(k) * n_; }
    const double* r(int k) const { return r_.data() + std::size_t(k) * n_; }

    void set_span(double t_old, double h) {
        t_old_ = t_old;
        h_ = h;
    }
    double t_old() const { return t_old_; }
    double t_new() const { return t_old_ + h_; }

    void eval(double t, double* out) const {
        double th = (t - t_old_) / h_;
        th = std::clamp(th, 0.0, 1.0);
        const double th1 = 1.0 - th;
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = r(0)[i] +
                     th * (r(1)[i] + th1 * (r(2)[i] + th * (r(3)[i] + th1 * r(4)[i])));
    }

  private:
    std::size_t n_ = 0;
    double t_old_ = 0.0, h_ = 0.0;
    std::vector<double> r_;
};

/// One adaptive sweep from t0 to t_end (either direction), writing the dense
/// solution at the given nodes. Nodes must lie in (t0, t_end], ordered in the
/// sweep direction. rhs(t, y, dy); cap(t, y, k1) bounds |h| from geometry.
/// eps_tag only labels errors.
template <class RHS, class CapFn>
void dopri5_sweep(RHS&& rhs, CapFn&& cap, std::vector<double>& y, double t0, double t_end,
                  const std::vector<double>& nodes, double* node_values,
                  const Dopri5Options& opt, StepperStats& stats, double eps_tag) {
    const std::size_t n = y.size();
    const double span = std::abs(t_end - t0);
    if (span == 0.0) {
        for (std::size_t m = 0; m < nodes.size(); ++m)
            std::copy(y.begin(), y.end(), node_values + m * n);
        return;
    }
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const double h_floor = 1e-14 * std::max(1.0, span);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n);
    DenseOutput dense;
    dense.resize(n);

    auto eval = [&](double t, const std::vector<double>& yy, std::vector<double>& out) {
        rhs(t, yy.data(), out.data());
        ++stats.rhs_evals;
    };

    double t = t0;
    eval(t, y, k1);
    std::size_t node_cursor = 0;

    double h = std::min({span / 100.0, 0.1, cap(t, y.data(), k1.data())});
    h = std::max(h, h_floor);
    double q_prev = 1.0;
    std::size_t attempts = 0;

    while (dir * (t_end - t) > 0.0) {
        if (++attempts > opt.max_steps)
            throw IntegrationError("step limit exhausted", eps_tag, t);
        h = std::min(h, cap(t, y.data(), k1.data()));
        bool last = false;
        if (h >= std::abs(t_end - t)) {
            h = std::abs(t_end - t);
            last = true;
        }
        if (h < h_floor) throw IntegrationError("step size underflow", eps_tag, t);
        const double hs = dir * h;

        using namespace detail;
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * dp_a21 * k1[i];
        eval(t + dp_c2 * hs, yt, k2);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (dp_a31 * k1[i] + dp_a32 * k2[i]);
        eval(t + dp_c3 * hs, yt, k3);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (dp_a41 * k1[i] + dp_a42 * k2[i] + dp_a43 * k3[i]);
        eval(t + dp_c4 * hs, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] +
                    hs * (dp_a51 * k1[i] + dp_a52 * k2[i] + dp_a53 * k3[i] + dp_a54 * k4[i]);
        eval(t + dp_c5 * hs, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (dp_a61 * k1[i] + dp_a62 * k2[i] + dp_a63 * k3[i] +
                                 dp_a64 * k4[i] + dp_a65 * k5[i]);
        eval(t + hs, yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + hs * (dp_b1 * k1[i] + dp_b3 * k3[i] + dp_b4 * k4[i] + dp_b5 * k5[i] +
                                 dp_b6 * k6[i]);
        eval(t + hs, y1, k7);

        double err_sq = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = hs * (dp_e1 * k1[i] + dp_e3 * k3[i] + dp_e4 * k4[i] +
                                   dp_e5 * k5[i] + dp_e6 * k6[i] + dp_e7 * k7[i]);
            const double sc =
                opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err_sq += (e / sc) * (e / sc);
            if (!std::isfinite(y1[i])) finite = false;
        }
        const double err = std::sqrt(err_sq / double(n));
        const double q = finite ? err / h : std::numeric_limits<double>::infinity();

        if (q <= 1.0) {
            dense.set_span(t, hs);
            for (std::size_t i = 0; i < n; ++i) {
                const double dy = y1[i] - y[i];
                const double bspl = hs * k1[i] - dy;
                dense.r(0)[i] = y[i];
                dense.r(1)[i] = dy;
                dense.r(2)[i] = bspl;
                dense.r(3)[i] = dy - hs * k7[i] - bspl;
                dense.r(4)[i] = hs * (dp_d1 * k1[i] + dp_d3 * k3[i] + dp_d4 * k4[i] +
                                      dp_d5 * k5[i] + dp_d6 * k6[i] + dp_d7 * k7[i]);
            }
            const double t_new = last ? t_end : t + hs;
            while (node_cursor < nodes.size() &&
                   dir * (nodes[node_cursor] - t_new) <= 1e-14 * span) {
                dense.eval(nodes[node_cursor], node_values + node_cursor * n);
                ++node_cursor;
            }
            y.swap(y1);
            k1.swap(k7);
            t = t_new;
            ++stats.accepted;
            stats.min_step = std::min(stats.min_step, h);
            stats.max_step = std::max(stats.max_step, h);
            double fac = q > 0.0 ? dp_safety * std::pow(q, -dp_pi_alpha) *
                                       std::pow(q_prev, dp_pi_beta)
                                 : dp_grow_max;
            fac = std::clamp(fac, dp_shrink_min, dp_grow_max);
            q_prev = std::max(q, 1e-4);
            h *= fac;
        } else {
            ++stats.rejected;
            const double fac =
                finite ? std::max(dp_shrink_min, dp_safety * std::pow(q, -1.0 / dp_epus_order))
                       : dp_shrink_min;
            h *= fac;
        }
    }

    // A clean sweep consumes every node; leftovers mean the node list was
    // inconsistent with [t0, t_end].
    while (node_cursor < nodes.size()) {
        dense.eval(nodes[node_cursor], node_values + node_cursor * n);
        ++node_cursor;
    }
}

} // namespace epsflow
