#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "epsflow/mollifier.hpp"
#include "epsflow/quadrature.hpp"

using namespace epsflow;
using Catch::Approx;

TEST_CASE("standard bump: support, peak, unit mass") {
    auto b = build_bump(StepCase::SymmetricA);
    CHECK(b.support_lo() == -1.0);
    CHECK(b.support_hi() == 1.0);
    CHECK(b.value(-1.0) == 0.0);
    CHECK(b.value(1.0) == 0.0);
    CHECK(b.value(-1.5) == 0.0);
    CHECK(b.value(0.0) == b.peak());
    CHECK(b.peak() == Approx(0.82857).margin(2e-4));

    // Independent mass oracle: Gauss panels split at the midpoint.
    double oracle = integrate_panels([&](double x) { return b.value(x); },
                                     {{-1.0, 0.0}, {0.0, 1.0}});
    CHECK(b.mass() == Approx(oracle).margin(1e-9));
    CHECK(b.mass() == Approx(1.0).margin(1e-9));
}

TEST_CASE("one-sided bumps squeeze the same mass into half the support") {
    auto right = build_bump(StepCase::RightB);
    CHECK(right.support_lo() == 0.0);
    CHECK(right.support_hi() == 1.0);
    CHECK(right.value(-0.1) == 0.0);
    CHECK(right.value(0.5) == Approx(2.0 * build_bump(StepCase::SymmetricA).peak()).epsilon(1e-12));
    double mass_r = integrate_adaptive([&](double x) { return right.value(x); }, 0.0, 1.0);
    CHECK(mass_r == Approx(1.0).margin(1e-9));

    auto left = build_bump(StepCase::LeftC);
    CHECK(left.support_lo() == -1.0);
    CHECK(left.support_hi() == 0.0);
    CHECK(left.value(0.1) == 0.0);
    double mass_l = integrate_adaptive([&](double x) { return left.value(x); }, -1.0, 0.0);
    CHECK(mass_l == Approx(1.0).margin(1e-9));
}

TEST_CASE("bump derivative matches finite differences") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    auto b = build_bump(StepCase::SymmetricA);
    const double h = 1e-5;
    for (int k = 0; k < 200; ++k) {
        const double x = u(rng);
        const double fd = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
        CHECK(b.derivative(x) == Approx(fd).margin(1e-6));
    }
}

TEST_CASE("smoothed step: case values at the jump") {
    const double s = 0.1;
    SmoothedStep a(build_bump(StepCase::SymmetricA), s);
    CHECK(a.value(0.0) == Approx(0.5).margin(1e-12));
    CHECK(a.value(-1.001 * s) == 0.0);
    CHECK(a.value(1.001 * s) == 1.0);

    SmoothedStep bstep(build_bump(StepCase::RightB), s);
    CHECK(bstep.value(0.0) == 0.0);
    CHECK(bstep.value(-1e-300) == 0.0);
    CHECK(bstep.value(1.001 * s) == 1.0);

    SmoothedStep cstep(build_bump(StepCase::LeftC), s);
    CHECK(cstep.value(0.0) == 1.0);
    CHECK(cstep.value(1e-300) == 1.0);
    CHECK(cstep.value(-1.001 * s) == 0.0);
}

TEST_CASE("smoothed step is monotone and saturates exactly") {
    const double s = 0.05;
    for (auto cs : {StepCase::SymmetricA, StepCase::RightB, StepCase::LeftC}) {
        SmoothedStep H(build_bump(cs), s);
        double prev = -1.0;
        for (int k = 0; k <= 10000; ++k) {
            const double x = -1.5 * s + 3.0 * s * double(k) / 10000.0;
            const double v = H.value(x);
            CHECK(v >= prev);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        CHECK(H.value(H.support_lo()) == 0.0);
        CHECK(H.value(H.support_hi()) == 1.0);
    }
}

TEST_CASE("smoothed step matches its quadrature oracle") {
    const double s = 0.2;
    for (auto cs : {StepCase::SymmetricA, StepCase::RightB}) {
        auto b = build_bump(cs);
        SmoothedStep H(b, s);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(H.support_lo(), H.support_hi());
        for (int k = 0; k < 20; ++k) {
            const double x = u(rng);
            const double oracle = integrate_adaptive(
                [&](double t) { return b.scaled(s, t); }, H.support_lo(), x, 1e-13);
            CHECK(H.value(x) == Approx(oracle).margin(1e-10));
        }
    }
}

TEST_CASE("step derivative is the scaled bump, with peak 1/sigma scaling") {
    auto b = build_bump(StepCase::SymmetricA);
    for (double s : {0.2, 0.1, 0.05}) {
        SmoothedStep H(b, s);
        CHECK(H.derivative(0.0) == Approx(b.peak() / s).epsilon(1e-12));
        const double h = s * 1e-4;
        for (double x : {-0.7 * s, -0.2 * s, 0.3 * s, 0.8 * s}) {
            const double fd = (H.value(x + h) - H.value(x - h)) / (2.0 * h);
            CHECK(H.derivative(x) == Approx(fd).epsilon(1e-5).margin(1e-8));
        }
    }
}

TEST_CASE("plateau bump: flat top, exact range, unit mass") {
    auto p = build_bump(StepCase::SymmetricA, true);
    CHECK(p.is_plateau());
    CHECK(p.support_lo() == Approx(-0.75).margin(1e-12));
    CHECK(p.support_hi() == Approx(0.75).margin(1e-12));
    CHECK(p.plateau_half_width() == Approx(0.25).margin(1e-9));
    CHECK(p.peak() == 1.0);
    CHECK(p.value(0.0) == 1.0);
    CHECK(p.value(0.249) == 1.0);
    CHECK(p.value(-0.249) == 1.0);
    CHECK(p.value(0.7501) == 0.0);
    for (int k = 0; k <= 10000; ++k) {
        const double x = -0.8 + 1.6 * double(k) / 10000.0;
        const double v = p.value(x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    double oracle = integrate_panels([&](double x) { return p.value(x); },
                                     {{-0.75, -0.25}, {-0.25, 0.25}, {0.25, 0.75}});
    CHECK(oracle == Approx(1.0).margin(1e-9));
    CHECK(p.mass() == Approx(1.0).margin(1e-9));

    CHECK_THROWS_AS(build_bump(StepCase::RightB, true), ConfigError);
    CHECK_THROWS_AS(build_bump(StepCase::LeftC, true), ConfigError);
}

TEST_CASE("plateau derivative matches finite differences across the shoulder") {
    auto p = build_bump(StepCase::SymmetricA, true);
    const double h = 1e-6;
    for (double x : {-0.6, -0.4, -0.3, 0.0, 0.1, 0.3, 0.45, 0.6, 0.7}) {
        const double fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
        CHECK(p.derivative(x) == Approx(fd).margin(5e-6));
    }
    CHECK(p.derivative(0.0) == 0.0);
    CHECK(p.derivative(0.2) == 0.0);
}

TEST_CASE("dyadic comb matches the brute-force sum") {
    auto p = build_bump(StepCase::SymmetricA, true);
    auto oracle = [&](double x) {
        double s = 0.0;
        for (int n = -30; n <= 30; ++n)
            s += p.value(std::exp2(double(std::abs(n))) * (x - double(n)));
        return s;
    };
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u(-25.0, 25.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng);
        CHECK(comb(p, x) == Approx(oracle(x)).margin(1e-12));
    }
}

TEST_CASE("comb peaks at every integer, including huge ones") {
    auto p = build_bump(StepCase::SymmetricA, true);
    for (double n : {0.0, 1.0, -3.0, 17.0, -40.0, 57.0, 1e15}) CHECK(comb(p, n) == 1.0);
    CHECK(comb(p, 57.3) == 0.0);
    CHECK(comb(p, 0.5) == Approx(p.value(0.5) + p.value(2.0 * (0.5 - 1.0))).margin(1e-15));
}

TEST_CASE("scaled comb: subnets through the teeth") {
    auto p = build_bump(StepCase::SymmetricA, true);
    // comb(x/eps) with eps = x/n lands exactly on tooth n.
    for (double x : {0.5, 1.0, 2.0}) {
        for (int n = 1; n <= 40; ++n) {
            const double eps = x / double(n);
            CHECK(comb_scaled(p, eps, x) == 1.0);
        }
    }
    // x = 0 sits on tooth 0 for every eps.
    for (double eps : {0.3, 0.01, 1e-6}) CHECK(comb_scaled(p, eps, 0.0) == 1.0);
    CHECK_THROWS_AS(comb_scaled(p, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(comb_scaled(p, -1.0, 1.0), ConfigError);
}

TEST_CASE("comb L1 norm: truncated teeth sum to 3 minus a dyadic tail") {
    auto p = build_bump(StepCase::SymmetricA, true);
    // Tooth n integrates to 2^{-|n|} * mass; assemble |n| <= 20 by quadrature
    // over each tooth's own support.
    double assembled = 0.0;
    for (int n = -20; n <= 20; ++n) {
        const double w = std::exp2(-double(std::abs(n)));
        assembled += integrate_adaptive(
            [&](double x) { return p.value(std::exp2(double(std::abs(n))) * (x - double(n))); },
            double(n) - 0.75 * w, double(n) + 0.75 * w, 1e-13);
    }
    CHECK(assembled == Approx((3.0 - std::exp2(-19.0)) * p.mass()).margin(1e-9));
    CHECK(comb_l1_norm(p, 20) == Approx(assembled).margin(1e-8));
    CHECK(std::abs(comb_l1_norm(p, 30) - 3.0) < 1e-6);
    CHECK_THROWS_AS(comb_l1_norm(p, 0), ConfigError);
}

TEST_CASE("construction guards") {
    auto b = build_bump(StepCase::SymmetricA);
    CHECK_THROWS_AS(SmoothedStep(b, 0.0), ConfigError);
    CHECK_THROWS_AS(SmoothedStep(b, -0.1), ConfigError);
    CHECK_THROWS_AS(comb(b, 0.5), ConfigError); // comb needs the plateau profile
}
