#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "epsflow/flow.hpp"

using namespace epsflow;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

EpsilonNet default_net() { return make_epsilon_net(1e-2, 1e-8, 7); }

VectorFieldNet exponential_line_field(const EpsilonNet& net) {
    VectorFieldNet::EvalFn eval = [](double, const double* y, double* dy) { dy[0] = y[0]; };
    VectorFieldNet::JacFn jac = [](double, const double*, double* J) { J[0] = 1.0; };
    return VectorFieldNet(Space::euclidean(1), net, "exponential-line", std::move(eval),
                          std::move(jac));
}

VectorFieldNet rotation_field(const EpsilonNet& net) {
    VectorFieldNet::EvalFn eval = [](double, const double* y, double* dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    VectorFieldNet::JacFn jac = [](double, const double*, double* J) {
        J[0] = 0.0;
        J[1] = 1.0;
        J[2] = -1.0;
        J[3] = 0.0;
    };
    return VectorFieldNet(Space::euclidean(2), net, "plane-rotation", std::move(eval),
                          std::move(jac));
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = a + (b - a) * double(k) / double(n - 1);
    return g;
}

} // namespace

TEST_CASE("ivp configuration is validated up front") {
    IvpConfig cfg;
    cfg.t_grid = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.t_grid = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.t_grid = {0.5, 1.0}; // missing t0 = 0
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.t_grid = {0.0, 1.0};
    CHECK_NOTHROW(cfg.validate());
    cfg.abs_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.abs_tol = 1e-10;
    cfg.max_step_factor = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("zero field flows are exactly the identity") {
    auto net = default_net();
    auto f = zero_field(Space::circle(), net);
    IvpConfig cfg;
    cfg.t_grid = uniform_grid(-2.0, 3.0, 11);
    auto traj = solve_ivp(f, net.values()[0], Point::circle(1.234), cfg);
    for (std::size_t i = 0; i < traj.times.size(); ++i) CHECK(traj.cover(i)[0] == 1.234);
}

TEST_CASE("initial-time sample repeats the start point exactly") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    cfg.t_grid = {-1.0, -0.25, 0.0, 0.5, 2.0};
    const double a0 = 0.7081;
    auto traj = solve_ivp(f, net.values()[3], Point::circle(a0), cfg);
    CHECK(traj.cover(2)[0] == a0);
    CHECK(traj.times == cfg.t_grid);
}

TEST_CASE("scalar exponential is integrated to near machine accuracy") {
    auto net = default_net();
    auto f = exponential_line_field(net);
    IvpConfig cfg;
    cfg.t_grid = uniform_grid(-1.0, 2.0, 13);
    auto traj = solve_ivp(f, net.values()[0], Point::euclidean({1.0}), cfg);
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        CHECK(traj.cover(i)[0] == Approx(std::exp(traj.times[i])).margin(5e-9));
    CHECK(traj.stats.accepted > 0);
    CHECK(traj.stats.rhs_evals >= 6 * traj.stats.accepted);
}

TEST_CASE("plane rotation: dense samples track sine and cosine both ways") {
    auto net = default_net();
    auto f = rotation_field(net);
    IvpConfig cfg;
    cfg.t_grid = uniform_grid(-two_pi, two_pi, 97);
    auto traj = solve_ivp(f, net.values()[0], Point::euclidean({1.0, 0.0}), cfg);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        CHECK(traj.cover(i)[0] == Approx(std::cos(t)).margin(2e-8));
        CHECK(traj.cover(i)[1] == Approx(-std::sin(t)).margin(2e-8));
    }
}

TEST_CASE("integrator matches the exact torus flow through the trench") {
    auto net = default_net();
    auto bump = build_bump(StepCase::SymmetricA);
    auto f = torus_field(bump, net);
    IvpConfig cfg;
    cfg.t_grid = uniform_grid(-1.0, 1.0, 9);
    for (double a0 : {-2.0, -0.7, 0.0, 1.3}) {
        for (std::size_t ie : {std::size_t(0), std::size_t(3), std::size_t(6)}) {
            const double eps = net.values()[ie];
            SmoothedStep step(bump, net.sigma_at(ie));
            auto traj = solve_ivp(f, eps, Point::torus(a0, 0.4), cfg);
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                auto ref = closed_form_torus(step, traj.times[i], a0, 0.4);
                CHECK(std::abs(traj.cover(i)[0] - ref.exact_cover[0]) < 1e-8);
                CHECK(std::abs(traj.cover(i)[1] - ref.exact_cover[1]) < 1e-7);
            }
        }
    }
}

TEST_CASE("jump flow: equilibria are exact, interior points creep to the boundary") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    const double eps = net.values()[0];
    const double s = net.sigma_at(0);
    IvpConfig cfg;
    cfg.t_grid = {0.0, pi};

    // Start exactly on the equilibrium rim: the field vanishes identically.
    auto [lo, hi] = marsden_moving_interval(StepCase::SymmetricA, s);
    auto still = solve_ivp(f, eps, Point::circle(hi), cfg);
    CHECK(still.cover(1)[0] == hi);
    auto frozen = solve_ivp(f, eps, Point::circle(2.0), cfg);
    CHECK(frozen.cover(1)[0] == 2.0);

    // From the plateau the orbit climbs monotonically into the right window
    // but can never reach the equilibrium in finite time.
    auto traj = solve_ivp(f, eps, Point::circle(0.0), cfg);
    const double end = traj.cover(1)[0];
    CHECK(end > pi / 2 - s);
    CHECK(end < hi);

    // Backward flow drains toward the left boundary instead.
    IvpConfig back;
    back.t_grid = {-pi, 0.0};
    auto rev = solve_ivp(f, eps, Point::circle(0.0), back);
    const double tail = rev.cover(0)[0];
    CHECK(tail < -pi / 2 + s);
    CHECK(tail > lo);
}

TEST_CASE("fixed-eps flows satisfy the group law to solver accuracy") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-9;
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> ut(-3.0, 3.0), ua(-pi, pi);
    for (int k = 0; k < 12; ++k) {
        const double eps = net.values()[std::size_t(k) % net.size()];
        const double r =
            flow_identity_residual(f, eps, ut(rng), ut(rng), Point::circle(ua(rng)), cfg);
        CHECK(r <= 20.0 * (cfg.abs_tol + cfg.rel_tol));
    }
}

TEST_CASE("step limit exhaustion surfaces as an integration error") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    cfg.t_grid = {0.0, pi};
    cfg.max_steps = 10;
    CHECK_THROWS_AS(solve_ivp(f, net.values()[0], Point::circle(0.0), cfg), NumericalError);
}

TEST_CASE("variational solution: identity at t=0 and for frozen points") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    auto at0 = variational_derivative(f, net.values()[0], 0.0, Point::circle(0.3), cfg);
    CHECK(at0.matrix == std::vector<double>{1.0});
    CHECK(at0.op_norm == 1.0);
    // Outside the support everything is pinned, so the derivative stays 1.
    auto far = variational_derivative(f, net.values()[0], 2.5, Point::circle(pi), cfg);
    CHECK(far.matrix[0] == Approx(1.0).margin(1e-12));
}

TEST_CASE("scalar variational equation reproduces the field ratio") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    const double eps = net.values()[0];
    const double a0 = 1.2, t = 0.8;
    IvpConfig cfg;
    cfg.t_grid = {0.0, t};

    auto traj = solve_ivp(f, eps, Point::circle(a0), cfg);
    const double at = traj.cover(1)[0];
    auto comp = [&](double a) {
        double dy = 0.0;
        f.eval_cover(eps, &a, &dy);
        return dy;
    };
    auto vr = variational_derivative(f, eps, t, Point::circle(a0), cfg);
    CHECK(vr.matrix[0] == Approx(comp(at) / comp(a0)).epsilon(1e-7));
    CHECK(vr.matrix[0] < 1.0); // orbit decelerates while entering the window

    // Central-difference cross-check of the same derivative.
    const double h = 1e-6;
    auto up = solve_ivp(f, eps, Point::circle(a0 + h), cfg);
    auto dn = solve_ivp(f, eps, Point::circle(a0 - h), cfg);
    const double fd = (up.cover(1)[0] - dn.cover(1)[0]) / (2.0 * h);
    CHECK(vr.matrix[0] == Approx(fd).epsilon(1e-3));
}

TEST_CASE("torus variational matrix matches its closed form") {
    auto net = default_net();
    auto bump = build_bump(StepCase::SymmetricA);
    auto f = torus_field(bump, net);
    const std::size_t ie = 2;
    const double eps = net.values()[ie], s = net.sigma_at(ie);
    const double a0 = -0.05, b0 = 0.1, t = 0.3;
    IvpConfig cfg;
    auto vr = variational_derivative(f, eps, t, Point::torus(a0, b0), cfg);
    const double m = -(bump.scaled(s, a0 + t) - bump.scaled(s, a0));
    CHECK(vr.matrix[0] == Approx(1.0).margin(1e-8));
    CHECK(vr.matrix[1] == Approx(0.0).margin(1e-10));
    CHECK(vr.matrix[2] == Approx(m).margin(1e-6));
    CHECK(vr.matrix[3] == Approx(1.0).margin(1e-8));
    // Largest singular value of [[1,0],[m,1]].
    const double lam = 1.0 + 0.5 * m * m + 0.5 * std::sqrt(m * m * (m * m + 4.0));
    CHECK(vr.op_norm == Approx(std::sqrt(lam)).epsilon(1e-6));
    CHECK(m > 1.0); // the probe sits inside the trench wall
}

TEST_CASE("closed-form circle limit: moving set and clamping per case") {
    auto lim = [](StepCase cs, double a0, double t) {
        return closed_form_marsden_limit(cs, a0, t).coords()[0];
    };
    const double q = pi / 2;
    CHECK(lim(StepCase::SymmetricA, 0.3, pi) == q);
    CHECK(lim(StepCase::SymmetricA, 0.3, -pi) == -q);
    CHECK(lim(StepCase::SymmetricA, 0.3, 0.4) == Approx(0.7).margin(1e-15));
    CHECK(lim(StepCase::SymmetricA, 2.0, 5.0) == 2.0);     // frozen
    CHECK(lim(StepCase::SymmetricA, -2.0, -5.0) == -2.0);  // frozen
    CHECK(lim(StepCase::SymmetricA, q, 1.0) == q);         // moving, already clamped
    CHECK(lim(StepCase::SymmetricA, -q, -1.0) == -q);
    CHECK(lim(StepCase::SymmetricA, 3.0 * pi, 0.1) == Approx(wrap(pi)).margin(1e-15));

    CHECK(lim(StepCase::RightB, -q, 5.0) == -q);           // left endpoint frozen
    CHECK(lim(StepCase::RightB, q, -2.0) == Approx(q - 2.0).margin(1e-15));
    CHECK(lim(StepCase::LeftC, q, -1.0) == q);             // right endpoint frozen
    CHECK(lim(StepCase::LeftC, -q, -1.0) == -q);           // moving, clamped at the floor
    CHECK(lim(StepCase::LeftC, -q, 0.7) == Approx(-q + 0.7).margin(1e-15));
}

TEST_CASE("closed-form torus flow: chart guards and case value at the jump") {
    auto bump = build_bump(StepCase::SymmetricA);
    SmoothedStep step(bump, 0.1);
    CHECK_THROWS_AS(closed_form_torus(step, 1.5, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(closed_form_torus(step, 0.5, 3.5, 0.0), ConfigError);

    // Crossing the trench forward costs exactly one unit of beta in the limit.
    auto v = closed_form_torus(step, 1.0, -0.5, 0.0);
    CHECK(v.limit_cover[1] == 1.0 - 1.0);
    CHECK(v.exact_cover[0] == 0.5);

    // Starting exactly on the jump uses the case value.
    SmoothedStep right(build_bump(StepCase::RightB), 0.1);
    auto va = closed_form_torus(step, 0.5, 0.0, 0.0);
    CHECK(va.limit_cover[1] == 0.5 - (1.0 - 0.5));
    auto vb = closed_form_torus(right, 0.5, 0.0, 0.0);
    CHECK(vb.limit_cover[1] == 0.5 - (1.0 - 0.0));
}

TEST_CASE("flow table on the circle: convergence flags and limit extraction") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    cfg.t_grid = {-pi, 0.0, pi};
    std::vector<Point> grid;
    for (double a : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0}) grid.push_back(Point::circle(a));
    auto table = flow_table(f, cfg, grid);

    REQUIRE(table.n_eps() == 7);
    REQUIRE(table.n_p() == 6);
    const double smin = table.sigma.back();
    for (std::size_t ip = 0; ip < table.n_p(); ++ip) {
        for (std::size_t it = 0; it < table.n_t(); ++it) {
            INFO("p=" << grid[ip].coords()[0] << " t=" << cfg.t_grid[it]);
            CHECK(table.converged_at(ip, it));
            auto ref = closed_form_marsden_limit(StepCase::SymmetricA, grid[ip].coords()[0],
                                                 cfg.t_grid[it]);
            CHECK(distance(table.limit_point(ip, it), ref) <=
                  2.0 * smin + table.noise_floor);
        }
    }
    // Frozen starts never move: every Cauchy difference is exactly zero.
    for (std::size_t it = 0; it < table.n_t(); ++it)
        for (std::size_t j = 0; j + 1 < table.n_eps(); ++j) {
            CHECK(table.diff_at(0, it, j) == 0.0); // alpha0 = -3
            CHECK(table.diff_at(5, it, j) == 0.0); // alpha0 = +2
        }
    CHECK(table.stats.accepted > 0);
    FlowTable stub;
    stub.eps = {1e-2};
    CHECK_THROWS_AS(extract_limit(stub), ConfigError);
}

TEST_CASE("flow table on the torus agrees with the closed-form limit off the lines") {
    auto net = default_net();
    auto bump = build_bump(StepCase::SymmetricA);
    auto f = torus_field(bump, net);
    IvpConfig cfg;
    cfg.t_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<Point> grid;
    for (double a : {-2.2, -1.3, 0.85, 2.5}) grid.push_back(Point::torus(a, 0.4));
    auto table = flow_table(f, cfg, grid);

    SmoothedStep step(bump, net.sigma_at(net.size() - 1));
    for (std::size_t ip = 0; ip < table.n_p(); ++ip)
        for (std::size_t it = 0; it < table.n_t(); ++it) {
            INFO("p=" << grid[ip].coords()[0] << " t=" << cfg.t_grid[it]);
            CHECK(table.converged_at(ip, it));
            auto ref = closed_form_torus(step, cfg.t_grid[it], grid[ip].coords()[0], 0.4);
            CHECK(distance(table.limit_point(ip, it), ref.limit) < 1e-6);
        }
}

TEST_CASE("composed limits match the direct limit away from the jump") {
    auto net = default_net();
    auto f = torus_field(build_bump(StepCase::SymmetricA), net);
    IvpConfig cfg;
    auto probe = compose_limit_flows(f, 0.4, 0.5, Point::torus(-1.5, 0.3), cfg);
    CHECK(probe.inner_converged);
    CHECK(probe.outer_converged);
    CHECK_FALSE(probe.fallback_used);
    CHECK(probe.defect < 1e-6);

    // Crossing the trench during the inner leg still composes correctly.
    auto cross = compose_limit_flows(f, 0.4, 0.5, Point::torus(-0.2, 0.3), cfg);
    CHECK(cross.defect < 1e-6);
}

TEST_CASE("circle composition probe exposes the broken group law") {
    auto net = default_net();
    auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    const auto snap = circle_grid(60).points; // +-pi/2 are nodes
    auto probe = compose_limit_flows(f, -pi, pi, Point::circle(0.9), cfg, snap);
    const double smin = f.sigma(net.values().back());

    // Inner leg drains to the left edge. Restarting the net from the raw
    // finite-eps landing point (just outside the limit's moving arc) cannot
    // converge, so the probe snaps to the nearest grid node, -pi/2 itself.
    CHECK(probe.inner_converged);
    CHECK(distance(probe.inner, Point::circle(-pi / 2)) <= 2.0 * smin + 1e-6);
    CHECK(probe.fallback_used);
    CHECK(probe.outer_converged);
    // Outer leg climbs back to the right edge; the direct run returns to the
    // start. The group law is dead.
    CHECK(distance(probe.composed, Point::circle(pi / 2)) <= 2.0 * smin + 1e-6);
    CHECK(distance(probe.direct, Point::circle(0.9)) <= 1e-6);
    CHECK(probe.defect > 0.5);
}

TEST_CASE("limiting-flow reports tell the two fields apart") {
    auto net = default_net();
    IvpConfig cfg;

    SECTION("circle jump field meets the uniform hypotheses") {
        auto f = marsden_field(StepCase::SymmetricA, net);
        cfg.t_grid = {-pi, 0.0, pi};
        std::vector<Point> grid;
        for (double a : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0}) grid.push_back(Point::circle(a));
        auto rep = uniform_limit_summary(flow_table(f, cfg, grid), f);
        CHECK(rep.grid_points == rep.converged_points);
        CHECK(rep.pointwise_limit_exists);
        CHECK(rep.global_bound.verdict == ConditionReport::Verdict::Holds);
        CHECK(rep.derivative_logtype.verdict == ConditionReport::Verdict::Holds);
        CHECK(rep.uniform_conditions_met);
    }
    SECTION("torus field fails the uniform bound") {
        auto f = torus_field(build_bump(StepCase::SymmetricA), net);
        cfg.t_grid = {-1.0, 0.0, 1.0};
        std::vector<Point> grid;
        for (double a : {-2.2, -1.3, 0.85, 2.5}) grid.push_back(Point::torus(a, 0.4));
        auto rep = uniform_limit_summary(flow_table(f, cfg, grid), f);
        CHECK(rep.pointwise_limit_exists);
        CHECK(rep.global_bound.verdict == ConditionReport::Verdict::Fails);
        CHECK_FALSE(rep.uniform_conditions_met);
        CHECK_THAT(rep.conclusion, ContainsSubstring("uniform"));
    }
}
