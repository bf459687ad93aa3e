#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "lagrangeflow/scenario.hpp"

using namespace lagrangeflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// report.json with the wall_time_s line removed (the only timing field).
std::string report_without_timing(const fs::path& p) {
    return std::regex_replace(slurp(p), std::regex("\\s*\"wall_time_s\":[^\\n]*"), "");
}

const char* kMinimalCorrespondence = R"json({
  "name": "mini",
  "pipeline": "correspondence",
  "flux": {"name": "burgers"},
  "initial": {"profile": "riemann", "left": 2.0, "right": 1.0, "jump": 0.0},
  "grid": {"n": 64, "domain": [-1.0, 1.0], "boundary": "constant"},
  "times": [0.1, 0.2]
})json";

}  // namespace

TEST_CASE("parse_scenario: minimal correspondence config round-trips") {
    auto scs = parse_config_text(kMinimalCorrespondence);
    REQUIRE(scs.size() == 1);
    CHECK(scs[0].name == "mini");
    CHECK(scs[0].pipeline == Pipeline::correspondence);
    CHECK(scs[0].grid.n == 64);
    CHECK(scs[0].times.back() == doctest::Approx(0.2));
}

TEST_CASE("parse_scenario: strict key checking names the offender") {
    std::string bad = R"({"name": "x", "pipeline": "eulerian",
        "fluxx": {"name": "burgers"},
        "initial": {"profile": "constant", "value": 1.5},
        "grid": {"n": 32, "domain": [0,1], "boundary": "periodic"},
        "times": [0.1]})";
    try {
        parse_config_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fluxx") != std::string::npos);
    }
}

TEST_CASE("parse_scenario: N below 16 is rejected") {
    std::string bad = R"({"name": "x", "pipeline": "eulerian",
        "flux": {"name": "burgers"},
        "initial": {"profile": "constant", "value": 1.5},
        "grid": {"n": 8, "domain": [0,1], "boundary": "periodic"},
        "times": [0.1]})";
    CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("parse_scenario: malformed pieces are rejected, never ignored") {
    CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"name":"x","pipeline":"warp"})"), ConfigError);
    std::string bad_profile = R"({"name":"x","pipeline":"eulerian",
        "flux":{"name":"burgers"},
        "initial":{"profile":"step","value":1},
        "grid":{"n":32,"domain":[0,1],"boundary":"periodic"},"times":[0.1]})";
    CHECK_THROWS_AS(parse_config_text(bad_profile), ConfigError);
    std::string bad_times = R"({"name":"x","pipeline":"eulerian",
        "flux":{"name":"burgers"},
        "initial":{"profile":"constant","value":1.5},
        "grid":{"n":32,"domain":[0,1],"boundary":"periodic"},"times":[0.2, 0.1]})";
    CHECK_THROWS_AS(parse_config_text(bad_times), ConfigError);
    std::string bad_poly = R"({"name":"x","pipeline":"eulerian",
        "flux":{"coefficients":[0,1]},
        "initial":{"profile":"constant","value":1.5},
        "grid":{"n":32,"domain":[0,1],"boundary":"periodic"},"times":[0.1]})";
    CHECK_THROWS_AS(parse_config_text(bad_poly), ConfigError);  // needs data_range
}

TEST_CASE("run_scenario: minimal correspondence run passes and writes artifacts") {
    auto sc = parse_config_text(kMinimalCorrespondence)[0];
    fs::path dir = fs::temp_directory_path() / "lagrangeflow_mini";
    fs::remove_all(dir);
    ScenarioResult res = run_scenario(sc, dir.string());
    CHECK(res.all_pass());
    for (const char* f : {"solution_eulerian.csv", "solution_temple.csv",
                          "solution_gamma.csv", "correspondence.json", "report.json"})
        CHECK(fs::exists(dir / f));
    CHECK(slurp(dir / "report.json").find("\"scenario\": \"mini\"") != std::string::npos);
}

TEST_CASE("run_scenario: tolerance overrides flip the pass flag") {
    auto sc = parse_config_text(kMinimalCorrespondence)[0];
    sc.tolerances["l1_error_final"] = -1.0;  // impossible bound
    fs::path dir = fs::temp_directory_path() / "lagrangeflow_tolfail";
    fs::remove_all(dir);
    ScenarioResult res = run_scenario(sc, dir.string());
    CHECK(!res.all_pass());
}

TEST_CASE("run_scenario: identical configs produce byte-identical artifacts") {
    auto sc = parse_config_text(kMinimalCorrespondence)[0];
    fs::path d1 = fs::temp_directory_path() / "lagrangeflow_det1";
    fs::path d2 = fs::temp_directory_path() / "lagrangeflow_det2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    run_scenario(sc, d1.string());
    run_scenario(sc, d2.string());
    for (const char* f : {"solution_eulerian.csv", "solution_temple.csv",
                          "solution_gamma.csv", "correspondence.json"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(report_without_timing(d1 / "report.json") ==
          report_without_timing(d2 / "report.json"));
    CHECK(report_without_timing(d1 / "report.json")
              .find("wall_time") == std::string::npos);
}

TEST_CASE("catalog text is stable and lists the built-ins") {
    std::string a = catalog_text();
    CHECK(a == catalog_text());
    CHECK(a.find("burgers") != std::string::npos);
    CHECK(a.find("riemann") != std::string::npos);
    CHECK(a.find("power") != std::string::npos);
}

TEST_CASE("run_scenario: metric-roundtrip pipeline needs no grid") {
    std::string cfg = R"({"name":"rt","pipeline":"metric-roundtrip",
        "flux":{"name":"cubic"}})";
    auto sc = parse_config_text(cfg)[0];
    fs::path dir = fs::temp_directory_path() / "lagrangeflow_rt";
    fs::remove_all(dir);
    ScenarioResult res = run_scenario(sc, dir.string());
    CHECK(res.all_pass());
    CHECK(fs::exists(dir / "potential.csv"));
}

TEST_CASE("CSV artifacts: pinned headers and 17-significant-digit round-trip") {
    auto sc = parse_config_text(kMinimalCorrespondence)[0];
    fs::path dir = fs::temp_directory_path() / "lagrangeflow_csvfmt";
    fs::remove_all(dir);
    run_scenario(sc, dir.string());

    std::ifstream eul(dir / "solution_eulerian.csv");
    std::string header;
    std::getline(eul, header);
    CHECK(header == "t,x,rho");

    // Values written with %.17g parse back to the exact double.
    std::string line;
    std::getline(eul, line);
    double t, x, rho;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &rho) == 3);
    CHECK(t == 0.0);
    CHECK(x == -1.0 + 0.5 * (2.0 / 64.0));
    CHECK(rho == 2.0);

    std::ifstream tem(dir / "solution_temple.csv");
    std::getline(tem, header);
    CHECK(header == "t,x,eta,v");
    std::ifstream gam(dir / "solution_gamma.csv");
    std::getline(gam, header);
    CHECK(header == "t,x,gamma");
}

TEST_CASE("report.json exposes exactly the documented shape") {
    auto sc = parse_config_text(kMinimalCorrespondence)[0];
    fs::path dir = fs::temp_directory_path() / "lagrangeflow_repshape";
    fs::remove_all(dir);
    run_scenario(sc, dir.string());
    json rep = json::parse(slurp(dir / "report.json"));
    REQUIRE(rep.is_object());
    CHECK(rep.size() == 3);
    CHECK(rep.contains("scenario"));
    CHECK(rep.contains("checks"));
    CHECK(rep.contains("wall_time_s"));
    for (const auto& c : rep["checks"]) {
        CHECK(c.size() == 4);
        for (const char* k : {"name", "value", "bound", "pass"}) CHECK(c.contains(k));
    }

    json corr = json::parse(slurp(dir / "correspondence.json"));
    REQUIRE(corr.is_array());
    for (const auto& e : corr)
        for (const char* k : {"t", "N", "l1_error", "tv_eulerian", "mass_defect"})
            CHECK(e.contains(k));
}
