#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "epsflow/scenarios.hpp"

using namespace epsflow;
using Catch::Matchers::ContainsSubstring;
using json = nlohmann::json;

namespace {

// Small nets and coarse grids: the full-scale defaults belong to the
// acceptance suite, not the unit tests.
RunConfig reduced_marsden() {
    RunConfig c = default_config("marsden");
    c.eps_min = 1e-6;
    c.eps_count = 5;
    c.p_count = 24;
    c.t_count = 5;
    c.traj_t_count = 21;
    return c;
}

RunConfig reduced_torus() {
    RunConfig c = default_config("torus");
    c.eps_min = 1e-6;
    c.eps_count = 5;
    c.p_count = 12;
    c.p_beta_count = 4;
    c.t_count = 5;
    c.traj_t_count = 11;
    return c;
}

bool assertion_passed(const RunArtifacts& art, const std::string& name) {
    for (const auto& a : art.report.at("assertions"))
        if (a.at("name") == name) return a.at("passed").get<bool>();
    FAIL("no assertion named " << name);
    return false;
}

const std::string& file_content(const RunArtifacts& art, const std::string& name) {
    for (const auto& [n, content] : art.files)
        if (n == name) return content;
    FAIL("no artifact named " << name);
    static const std::string empty;
    return empty;
}

} // namespace

TEST_CASE("config defaults and round trip") {
    for (const char* s : {"marsden", "torus", "hierarchy", "custom"}) {
        const RunConfig c = default_config(s);
        CHECK(c.scenario == s);
        const RunConfig back = parse_config(config_to_json(c));
        CHECK(config_to_json(back) == config_to_json(c));
    }
    CHECK(default_config("marsden").space == "circle");
    CHECK(default_config("torus").space == "torus");
    CHECK(default_config("hierarchy").starts.empty());
    CHECK_THROWS_AS(default_config("warsden"), ConfigError);
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"scenario":"marsden","nett":{}})")),
                      ContainsSubstring("unknown key 'nett'"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"net":{"eps_minn":1e-6}})")),
                      ContainsSubstring("unknown key 'net.eps_minn'"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"grid":{"t_count":4}})")),
                      ContainsSubstring("odd"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"scenario":"warsden"})")),
                      ContainsSubstring("scenario"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"case":"d"})")),
                      ContainsSubstring("case"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"net":{"eps_min":0.2,"eps_max":0.1}})")),
                      ContainsSubstring("eps_min"));
    CHECK_THROWS_WITH(
        parse_config(json::parse(R"({"scenario":"torus","trajectories":{"starts":[[0.1]]}})")),
        ContainsSubstring("dimension"));
    CHECK_THROWS_WITH(parse_config(json::parse(R"({"witnesses":{"tests":["x^3"]}})")),
                      ContainsSubstring("x^3"));

    // Flag-style overrides land in the nested objects.
    const RunConfig c = parse_config(
        json::parse(R"({"scenario":"torus","net":{"eps_min":1e-5,"count":5},"out":"d"})"));
    CHECK(c.eps_min == 1e-5);
    CHECK(c.eps_count == 5);
    CHECK(c.out == "d");
    CHECK(c.t_max == default_config("torus").t_max);
}

TEST_CASE("circle scenario verdict pattern") {
    const RunArtifacts art = run_scenario(reduced_marsden());
    CHECK(art.ok);
    CHECK(art.failures.empty());
    CHECK(assertion_passed(art, "pw-association-holds"));
    CHECK(assertion_passed(art, "zero-association-fails"));
    CHECK(assertion_passed(art, "fast-association-fails"));
    CHECK(assertion_passed(art, "flow-property-fails"));
    CHECK(assertion_passed(art, "violation-probe-matches-closed-form"));
    CHECK(assertion_passed(art, "uniform-conditions-hold"));
    CHECK(assertion_passed(art, "prediction-agrees"));
    CHECK(art.report.at("limit_report").at("headline") ==
          "pw-association held, flow property failed");

    // The half-turn composition probe lands a quarter turn away from start.
    const auto& probe = art.report.at("violation_probe");
    CHECK(probe.at("expected_defect").get<double>() ==
          Catch::Approx(1.5707963267948966).epsilon(1e-12));
    CHECK(probe.at("probe").at("defect").get<double>() > 1.0);

    for (const char* name : {"report.json", "trajectories.csv", "flowtable.csv",
                             "assoc_zero.dat", "assoc_pw.dat", "assoc_fast.dat",
                             "limit_profile.dat", "growth_global_bound.dat",
                             "growth_derivative.dat"})
        CHECK_FALSE(file_content(art, name).empty());
}

TEST_CASE("torus scenario verdict pattern") {
    const RunArtifacts art = run_scenario(reduced_torus());
    CHECK(art.ok);
    CHECK(assertion_passed(art, "flow-property-holds"));
    CHECK(assertion_passed(art, "fast-holds-off-layers"));
    CHECK(assertion_passed(art, "zero-association-fails"));
    CHECK(assertion_passed(art, "global-bound-fails-log-type"));
    CHECK(assertion_passed(art, "limit-discontinuous"));
    CHECK(assertion_passed(art, "prediction-agrees"));

    // Discontinuous limit map and intact group law coexist here.
    CHECK(art.report.at("limit_jump").get<double>() > 0.9);
    CHECK(art.report.at("limit_report").at("flow_property").at("defect").get<double>() < 1e-6);
}

TEST_CASE("hierarchy scenario separates the notions") {
    const RunArtifacts art = run_scenario(default_config("hierarchy"));
    CHECK(art.ok);
    CHECK(assertion_passed(art, "sine-separates-weak-from-model"));
    CHECK(assertion_passed(art, "comb-separates-model-from-pointwise"));
    CHECK(assertion_passed(art, "hierarchy-passed"));
    CHECK(art.report.at("hierarchy").at("passed").get<bool>());
    CHECK_FALSE(file_content(art, "sine_weak.dat").empty());
    CHECK_FALSE(file_content(art, "comb_pw.dat").empty());
}

TEST_CASE("run_scenario rejects configs without preset assertions") {
    RunConfig c = default_config("custom");
    c.field = "zero";
    c.space = "circle";
    CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("solve runner emits one trajectory per start and member") {
    RunConfig c = default_config("custom");
    c.field = "zero";
    c.space = "circle";
    c.starts = {{0.7}};
    c.traj_t_count = 11;
    const RunArtifacts art = run_solve(c);
    CHECK(art.ok);
    CHECK(art.report.at("trajectories").get<std::size_t>() == c.eps_count);

    // The zero field holds every row at the start angle.
    const std::string& csv = file_content(art, "trajectories.csv");
    CHECK_THAT(csv, ContainsSubstring("epsilon,t,alpha\n"));
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    std::size_t n = 0;
    while (std::getline(rows, line)) {
        CHECK_THAT(line, ContainsSubstring(",0.69999999999999996"));
        ++n;
    }
    CHECK(n == c.eps_count * c.traj_t_count);

    c.starts.clear();
    CHECK_THROWS_AS(run_solve(c), ConfigError);
}

TEST_CASE("flow runner writes table with limit rows") {
    RunConfig c = reduced_torus();
    const RunArtifacts art = run_flow(c);
    CHECK(art.ok);
    CHECK_THAT(file_content(art, "flowtable.csv"),
               ContainsSubstring("epsilon,t,p_alpha,p_beta,phi_alpha,phi_beta\n"));
    CHECK_THAT(file_content(art, "flowtable.csv"), ContainsSubstring("\n0,"));
    CHECK(art.report.at("uniform_summary").contains("conclusion"));
}

TEST_CASE("conditions runner matches the scenario pattern") {
    RunConfig c = reduced_marsden();
    c.p_count = 64;
    const RunArtifacts art = run_conditions(c);
    const auto& conds = art.report.at("conditions");
    CHECK(conds.at("global-bound-h").at("verdict") == "holds");
    CHECK(conds.at("logtype-derivative").at("verdict") == "holds");
    CHECK(conds.at("bounded-derivative").at("verdict") == "fails");
    CHECK_FALSE(conds.contains("linear-growth"));

    // Auto-densification: the grid resolves the narrowest layer.
    CHECK(art.report.at("grid").at("size").get<std::size_t>() > 64);
}

TEST_CASE("associate runner picks one notion") {
    RunConfig c = reduced_torus();
    const RunArtifacts art = run_associate(c, "fast");
    CHECK(art.report.at("verdict").at("notion") == "fast");
    CHECK(art.report.at("verdict").at("verdict") == "holds");

    RunConfig h = default_config("hierarchy");
    const RunArtifacts hart = run_associate(h, "model");
    CHECK(hart.report.at("sine").at("verdict") == "fails");
    CHECK(hart.report.at("comb").at("verdict") == "holds");

    CHECK_THROWS_AS(run_associate(c, "weakest"), ConfigError);
}

TEST_CASE("artifacts land on disk") {
    RunConfig c = default_config("custom");
    c.field = "zero";
    c.space = "euclidean";
    c.starts = {{0.0}};
    c.traj_t_count = 5;
    const RunArtifacts art = run_solve(c);

    const auto dir = std::filesystem::temp_directory_path() /
                     ("epsflow_test_" + std::to_string(::getpid()));
    write_artifacts(art, dir.string());
    for (const auto& [name, content] : art.files) {
        std::ifstream in(dir / name, std::ios::binary);
        REQUIRE(in.good());
        std::string on_disk((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        CHECK(on_disk == content);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs produce identical artifacts") {
    const RunConfig c = reduced_marsden();
    const RunArtifacts a = run_scenario(c);
    const RunArtifacts b = run_scenario(c);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].first == b.files[i].first);
        if (a.files[i].first == "report.json") continue;  // created_utc differs
        CHECK(a.files[i].second == b.files[i].second);
    }

    // Reports agree once the timestamp is stripped.
    json ra = a.report;
    json rb = b.report;
    ra.erase("created_utc");
    rb.erase("created_utc");
    CHECK(ra == rb);
}
