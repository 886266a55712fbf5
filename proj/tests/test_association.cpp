#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "epsflow/association.hpp"

using namespace epsflow;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

EpsilonNet log_net() { return make_epsilon_net(1e-2, 1e-6, 5); }

NetFunction shift_net(const EpsilonNet& net, std::function<double(double)> shift,
                      std::string label) {
    return scalar_net(net, std::move(label),
                      [shift = std::move(shift)](double eps, double x) { return x + shift(eps); });
}

std::function<Point(const Point&)> identity_map() {
    return [](const Point& p) { return p; };
}

std::vector<Point> line_points(std::initializer_list<double> xs) {
    std::vector<Point> pts;
    for (double x : xs) pts.push_back(Point::euclidean({x}));
    return pts;
}

} // namespace

TEST_CASE("net function wiring and guards") {
    const auto net = log_net();
    CHECK_THROWS_AS(NetFunction(Space::euclidean(1), Space::euclidean(1), net, "empty", {}),
                    ConfigError);

    const auto u = scalar_net(net, "x+eps", [](double e, double x) { return x + e; });
    CHECK(u.domain() == Space::euclidean(1));
    CHECK(u(0.5, Point::euclidean({1.0})).coords()[0] == Approx(1.5));
    CHECK_FALSE(u.has_panel_hints());
    CHECK(u.panel_hints(0.1, -1.0, 1.0).empty());

    // Mismatched nets and domains are configuration errors, not verdicts.
    const auto other = make_epsilon_net(1e-2, 1e-6, 6);
    const auto v = scalar_net(other, "other net", [](double, double x) { return x; });
    CHECK_THROWS_AS(pw_assoc(u, v, line_points({0.0})), ConfigError);
    const NetFunction w =
        fixed_net(Space::circle(), Space::circle(), net, "circle", identity_map());
    CHECK_THROWS_AS(pw_assoc(u, w, line_points({0.0})), ConfigError);
}

TEST_CASE("zero association trend rule") {
    const auto net = log_net();
    const double need = sigma(net.scaling(), net.values().back()) / 4.0;
    const auto K = euclidean_grid(-1.0, 1.0, std::size_t(std::ceil(2.0 / need)) + 1);

    SECTION("sigma-sized discrepancy decays and is classified log-type") {
        const auto law = net.scaling();
        const auto u = shift_net(net, [law](double e) { return sigma(law, e); }, "x+sigma");
        const auto verdict = zero_assoc(u, identity_map(), K);
        CHECK(verdict.notion == Notion::Zero);
        CHECK(verdict.verdict == Verdict::Holds);
        CHECK(verdict.rate.cls == GrowthClass::Class::LogType);
        CHECK(verdict.rate.constant == Approx(1.0).margin(0.05));
        CHECK(verdict.evidence.front().values.front() ==
              Approx(sigma(law, net.values().front())));
    }

    SECTION("identical nets sit at the noise floor") {
        const auto u = scalar_net(net, "x", [](double, double x) { return x; });
        const auto verdict = zero_assoc(u, identity_map(), K);
        CHECK(verdict.verdict == Verdict::Holds);
        CHECK(verdict.rate.cls == GrowthClass::Class::Bounded);
        CHECK_THAT(verdict.rate.rule_trace, ContainsSubstring("noise floor"));
    }

    SECTION("a persistent unit gap fails as bounded") {
        const auto u = shift_net(net, [](double) { return 1.0; }, "x+1");
        const auto verdict = zero_assoc(u, identity_map(), K);
        CHECK(verdict.verdict == Verdict::Fails);
        CHECK(verdict.rate.cls == GrowthClass::Class::Bounded);
    }

    SECTION("a grid too coarse for the smallest layer is rejected") {
        const auto u = scalar_net(net, "x", [](double, double x) { return x; });
        CHECK_THROWS_AS(zero_assoc(u, identity_map(), euclidean_grid(-1.0, 1.0, 20)),
                        ConfigError);
    }
}

TEST_CASE("pointwise association and adversarial subnets") {
    const auto net = log_net();

    SECTION("plain polynomial decay holds with a power rate") {
        const auto u = shift_net(net, [](double e) { return e; }, "x+eps");
        const auto verdict = pw_assoc(u, identity_map(), line_points({-0.3, 0.0, 0.7}));
        CHECK(verdict.verdict == Verdict::Holds);
        CHECK(verdict.rate.cls == GrowthClass::Class::NegligibleLike);
        CHECK(verdict.rate.constant == Approx(1.0).margin(0.05));
    }

    SECTION("the scaled comb is defeated by the tooth-center subnet") {
        // Coarser net start so the subnet's tooth indices stay small enough
        // for the tooth to be wider than the rounding of x/(x/n).
        const auto comb_net = make_epsilon_net(1e-1, 1e-4, 7, ScalingLaw::power(1.0));
        const Bump rho0 = build_bump(StepCase::SymmetricA, true);
        const auto u = scalar_net(comb_net, "comb", [rho0](double e, double x) {
            return comb_scaled(rho0, e, x);
        });
        const double eps_max = comb_net.values().front();
        const SubnetFn teeth = [eps_max](const Point& p) {
            const double x = p.coords()[0];
            std::vector<double> eps;
            for (double n = std::ceil(x / eps_max); eps.size() < 12; n += 1.0)
                eps.push_back(x / n);
            return eps;
        };
        const auto verdict = pw_assoc(
            u, [](const Point&) { return Point::euclidean({0.0}); },
            line_points({0.5, 1.0, 2.0}), {}, teeth);
        CHECK(verdict.verdict == Verdict::Fails);
        // Every subnet member parks the point on a plateau tooth center.
        for (const auto& es : verdict.evidence)
            for (double v : es.values) CHECK(v == 1.0);
    }

    SECTION("subnets must be decreasing and inside the net's range") {
        const auto u = shift_net(net, [](double e) { return e; }, "x+eps");
        const SubnetFn bad = [](const Point&) { return std::vector<double>{0.5, 0.2, 0.1, 0.05}; };
        CHECK_THROWS_AS(pw_assoc(u, identity_map(), line_points({0.0}), {}, bad), ConfigError);
    }
}

TEST_CASE("almost-everywhere association tolerates one bad node") {
    const auto net = make_epsilon_net(1e-1, 1e-4, 7, ScalingLaw::power(1.0));
    const auto grid = euclidean_grid(-1.0, 1.0, 101);
    // Narrowing spike: converges to 0 for x != 0 but sticks at 1 on the
    // single grid node x = 0.
    const auto u = scalar_net(net, "spike", [](double e, double x) {
        return e * e / (x * x + e * e);
    });
    const auto zero_map = [](const Point&) { return Point::euclidean({0.0}); };

    const auto ae = pwae_assoc(u, zero_map, grid);
    CHECK(ae.verdict == Verdict::Holds);
    CHECK(ae.exceptional_fraction == Approx(1.0 / 101.0));

    const auto at_zero = pw_assoc(u, zero_map, line_points({0.0}));
    CHECK(at_zero.verdict == Verdict::Fails);
}

TEST_CASE("model association against an oscillatory oracle") {
    const auto net = make_epsilon_net(1e-1, 1e-4, 7, ScalingLaw::power(1.0));
    NetFunction sine = scalar_net(net, "sin(x/eps)",
                                  [](double e, double x) { return std::sin(x / e); });
    sine.set_panel_hints(detail::sine_panel_hints);
    const auto zero_map = [](const Point&) { return Point::euclidean({0.0}); };

    const Bump smooth = build_bump(StepCase::SymmetricA);
    const Density phi = bump_density(smooth);
    const std::vector<SmoothTest> tests{{[](double x) { return x * x; }, 2.0, "x^2"}};

    const auto verdict = model_assoc(
        sine, fixed_net(sine.domain(), sine.codomain(), net, "0", zero_map), tests, {phi});
    CHECK(verdict.verdict == Verdict::Fails);
    const auto& series = verdict.evidence.front();

    // Independent oracle: sin^2 = (1 - cos(2x/eps))/2, so the integral is
    // (1/2) int phi minus an oscillatory correction, both evaluated by the
    // global adaptive rule, which never sees the net's panel hints.
    const double mass = integrate_adaptive(phi.phi, phi.lo, phi.hi, 1e-13);
    for (std::size_t i = 0; i < series.eps.size(); ++i) {
        const double w = 2.0 / series.eps[i];
        const double osc = integrate_adaptive(
            [&](double x) { return std::cos(w * x) * phi.phi(x); }, phi.lo, phi.hi, 1e-13);
        CHECK(series.values[i] == Approx(std::abs(0.5 * mass - 0.5 * osc)).margin(1e-9));
    }
    CHECK(series.values.back() == Approx(0.5 * mass).epsilon(0.01));

    // Weak form with the identity test alone holds for the same net.
    const auto weak = assoc_Rn(
        sine, fixed_net(sine.domain(), sine.codomain(), net, "0", zero_map), {phi});
    CHECK(weak.notion == Notion::WeakRn);
    CHECK(weak.verdict == Verdict::Holds);
}

TEST_CASE("model association rejects bad inputs and surfaces quadrature failures") {
    const auto net = log_net();
    const auto zero_map = [](const Point&) { return Point::euclidean({0.0}); };
    const Density phi = bump_density(build_bump(StepCase::SymmetricA));
    const std::vector<SmoothTest> tests{{[](double x) { return x; }, 1.0, "x"}};

    const NetFunction on_circle =
        fixed_net(Space::circle(), Space::circle(), net, "circle", identity_map());
    CHECK_THROWS_AS(model_assoc(on_circle, on_circle, tests, {phi}), ConfigError);

    // An integrable interior singularity defeats the panel subdivision and
    // must surface as a numerical error naming the witness pair.
    const auto singular = scalar_net(net, "singular", [](double, double x) {
        return std::pow(std::abs(x) + 1e-300, -0.49);
    });
    CHECK_THROWS_AS(
        model_assoc(singular,
                    fixed_net(singular.domain(), singular.codomain(), net, "0", zero_map), tests,
                    {phi}),
        NumericalError);
}

TEST_CASE("fast association clauses") {
    SECTION("exact agreement passes through the floor clause") {
        const auto net = log_net();
        const auto u = scalar_net(net, "x", [](double, double x) { return x; });
        const auto verdict = fast_assoc(u, identity_map(), line_points({-0.5, 0.4}));
        CHECK(verdict.verdict == Verdict::Holds);
    }

    SECTION("slope at the probe order certifies, one below does not") {
        const auto net = make_epsilon_net(1e-1, 1e-2, 5, ScalingLaw::power(1.0));
        AssocConfig cfg;
        cfg.tol = 1e-15;
        const auto steep = shift_net(net, [](double e) { return std::pow(e, 7.0); }, "x+e^7");
        const auto fast7 = fast_assoc(steep, identity_map(), line_points({0.0}), cfg);
        CHECK(fast7.verdict == Verdict::Holds);
        CHECK(fast7.rate.cls == GrowthClass::Class::NegligibleLike);
        CHECK(fast7.rate.constant == Approx(7.0).margin(0.1));

        const auto shallow = shift_net(net, [](double e) { return std::pow(e, 5.0); }, "x+e^5");
        CHECK(fast_assoc(shallow, identity_map(), line_points({0.0}), cfg).verdict ==
              Verdict::Fails);
    }

    SECTION("log-type decay is slower than every polynomial rate") {
        const auto net = log_net();
        const auto law = net.scaling();
        const auto u = shift_net(net, [law](double e) { return sigma(law, e); }, "x+sigma");
        const auto fast = fast_assoc(u, identity_map(), line_points({0.0}));
        CHECK(fast.verdict == Verdict::Fails);
        // The same discrepancy still converges pointwise: fast is strictly
        // stronger than pw on this witness.
        CHECK(pw_assoc(u, identity_map(), line_points({0.0})).verdict == Verdict::Holds);
    }
}

TEST_CASE("hierarchy counterexamples separate the association notions") {
    const auto net = make_epsilon_net(1e-1, 1e-4, 7, ScalingLaw::power(1.0));
    const auto rep = hierarchy_report(net);

    CHECK(rep.sine.weak.verdict == Verdict::Holds);
    CHECK(rep.sine.model.verdict == Verdict::Fails);
    CHECK(rep.sine.zero.verdict == Verdict::Fails);
    CHECK(rep.sine.fast.verdict == Verdict::Fails);

    CHECK(rep.comb.model.verdict == Verdict::Holds);
    CHECK(rep.comb.weak.verdict == Verdict::Holds);
    CHECK(rep.comb.pw.verdict == Verdict::Fails);
    CHECK(rep.comb.pwae.verdict == Verdict::Fails);
    CHECK(rep.comb.pwae.exceptional_fraction == Approx(1.0));
    CHECK(rep.comb.zero.verdict == Verdict::Fails);

    CHECK(rep.comb_l1 == Approx(3.0).margin(1e-6));
    CHECK(rep.comb_bound_ok);
    CHECK(rep.comb_bound_margin <= 1.0);
    CHECK(rep.sine_model_final == Approx(rep.sine_model_limit).epsilon(0.01));
    CHECK(rep.sine_pattern_ok);
    CHECK(rep.comb_pattern_ok);
    CHECK(rep.chain_ok);
    CHECK(rep.passed);
    REQUIRE_FALSE(rep.lines.empty());
    CHECK_THAT(rep.lines.back(), ContainsSubstring("PASS"));
}

TEST_CASE("limiting flow report on the circle counterexample") {
    const auto net = log_net();
    const auto f = marsden_field(StepCase::SymmetricA, net);
    IvpConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-9;
    cfg.t_grid = {-pi, 0.0, pi};
    const auto table = flow_table(f, cfg, circle_grid(24).points);
    const auto rep = limiting_flow_report(table, f, [](double t, const Point& p) {
        return closed_form_marsden_limit(StepCase::SymmetricA, p.coords()[0], t);
    });

    CHECK(rep.assoc_pw.verdict == Verdict::Holds);
    CHECK(rep.assoc_zero.verdict == Verdict::Fails);
    CHECK(rep.assoc_fast.verdict == Verdict::Fails);
    CHECK(rep.assoc_fast_off_layer.verdict == Verdict::Holds);
    CHECK(rep.off_layer_points > 0);
    CHECK(rep.off_layer_points < table.n_p());

    // The uniform gap is the full transport across the moving interval:
    // nodes just below the lower layer are frozen by the limit but carried
    // across by every member.
    CHECK(rep.assoc_zero.evidence.front().values.back() > pi / 2);

    CHECK(rep.flow_defect > pi / 2 - 0.05);
    CHECK_FALSE(rep.flow_property_measured);
    CHECK_FALSE(rep.flow_property_predicted);
    CHECK(rep.prediction_agrees);
    CHECK(rep.headline == "pw-association held, flow property failed");
    bool flagged = false;
    for (const auto& line : rep.lines)
        if (line.find("did NOT guarantee the flow property") != std::string::npos) flagged = true;
    CHECK(flagged);
}

TEST_CASE("limiting flow report on the torus transport field") {
    const auto net = log_net();
    const Bump bump = build_bump(StepCase::SymmetricA);
    const auto f = torus_field(bump, net);
    IvpConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-9;
    cfg.t_grid = {-0.9, 0.0, 0.9};
    const auto table = flow_table(f, cfg, torus_grid(12, 4).points);
    const SmoothedStep step(bump, 0.5);
    const auto rep = limiting_flow_report(table, f, [&step](double t, const Point& p) {
        return closed_form_torus(step, t, p.coords()[0], p.coords()[1]).limit;
    });

    CHECK(rep.assoc_pw.verdict == Verdict::Holds);
    CHECK(rep.assoc_fast_off_layer.verdict == Verdict::Holds);
    CHECK(rep.assoc_zero.verdict == Verdict::Fails);
    CHECK(rep.flow_defect <= rep.flow_defect_tol);
    CHECK(rep.flow_property_measured);
    CHECK(rep.flow_property_predicted);
    CHECK(rep.prediction_agrees);
    CHECK_THAT(rep.headline, ContainsSubstring("held as predicted"));
}

TEST_CASE("limiting flow report requires a usable table") {
    const auto net = log_net();
    const auto f = zero_field(Space::euclidean(1), net);
    CHECK_THROWS_AS(limiting_flow_report(FlowTable{}, f), ConfigError);
}
