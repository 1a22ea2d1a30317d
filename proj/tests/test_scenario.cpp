#include "kgsys/acceptance.hpp"
#include "kgsys/groundstate.hpp"
#include "kgsys/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kgsys;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kgsys_scenario_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = fs::temp_directory_path() / ("kgsys_" + name + ".yaml");
    std::ofstream(p) << text;
    return p;
}

int run_file(const fs::path& config, const fs::path& out, std::string* errors = nullptr) {
    std::ostringstream log, err;
    const int code = run_scenario_file(config, log, err, out);
    if (errors) *errors = err.str();
    return code;
}

const char* kSingleRun = R"(kind: single_run
seed: 3
params: {beta: 1.0, mu1: 1.0, mu2: 1.0}
grid: {dim: 1, points: 128, half_length: 16}
run:
  horizon: 2.0
  max_energy_drift: 1.0e-5
  expect_status: completed
datum:
  type: gaussian
  amplitude: [0.3, 0.2]
  velocity: 0.2
)";

} // namespace

TEST_CASE("empty ensemble") {
    const auto cfg = write_config("empty", R"(kind: dichotomy_ensemble
params: {beta: 2.0, mu1: 1.0, mu2: 1.0}
grid: {dim: 1, points: 128, half_length: 16}
ensemble:
  rays: []
  bumps: 0
)");
    const auto out = scratch("empty");
    CHECK(run_file(cfg, out) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(summary.is_object());
    CHECK_FALSE(fs::exists(out / "FAILED"));
}

TEST_CASE("ground-state sweep") {
    const auto cfg = write_config("sweep", R"(kind: groundstate_sweep
params: {beta: 0.0, mu1: 1.0, mu2: 1.0}
grid: {dim: 3, points: 32, half_length: 12}
sweep:
  betas: [0.0, 1.0, 2.0]
  solver: radial
)");
    const auto out = scratch("sweep");
    REQUIRE(run_file(cfg, out) == 0);
    const auto rows = nlohmann::json::parse(slurp(out / "groundstates.json"));
    REQUIRE(rows.size() == 3);
    const double J = scalar_level(3);
    CHECK(rows[0]["level"].get<double>() == doctest::Approx(J).epsilon(1e-4));
    CHECK(rows[1]["level"].get<double>() == doctest::Approx(J).epsilon(1e-4));
    CHECK(rows[2]["level"].get<double>() == doctest::Approx(2.0 / 3.0 * J).epsilon(1e-4));
    CHECK(rows[2]["level"].get<double>() == doctest::Approx(2.0 / 3.0 * 18.8973).epsilon(1e-4));
}

TEST_CASE("configuration errors") {
    const auto cfg = write_config("typo", R"(kind: single_run
params: {beta: 1.0, mu1: 1.0, mu2: 1.0}
grid: {dim: 1, points: 128, half_length: 16}
run:
  horizn: 2.0
)");
    const auto out = scratch("typo");
    std::string err;
    CHECK(run_file(cfg, out, &err) == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(err.find("line 5") != std::string::npos);
    CHECK(err.find("run.horizn") != std::string::npos);

    CHECK_THROWS_AS(parse_scenario("kind: nonsense\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("kind: single_run\ngrid: {dim: 1, points: 7}\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("kind: [unclosed\n"), ConfigError);
    CHECK(run_file(fs::temp_directory_path() / "kgsys_missing.yaml", out) == 2);
}

TEST_CASE("reruns are byte-identical") {
    const auto cfg = write_config("single", kSingleRun);
    const auto a = scratch("single_a"), b = scratch("single_b");
    REQUIRE(run_file(cfg, a) == 0);
    REQUIRE(run_file(cfg, b) == 0);
    const auto csv = slurp(a / "trajectory.csv");
    CHECK(csv == slurp(b / "trajectory.csv"));
    CHECK(csv.rfind("# config_sha256=" + sha256_hex(slurp(cfg)), 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["config_sha256"] == sha256_hex(slurp(cfg)));
    CHECK(manifest["seed"] == 3);
    CHECK(fs::exists(a / "final.kgdu"));
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("failed checks and aborted runs") {
    std::string text = kSingleRun;
    text.replace(text.find("expect_status: completed"), 24, "expect_status: blowup_detected");
    const auto out = scratch("check");
    CHECK(run_file(write_config("check", text), out) == 1);
    const auto checks = nlohmann::json::parse(slurp(out / "checks.json"));
    CHECK(checks["passed"] == false);

    const auto overflow = write_config("overflow", R"(kind: profile_test
params: {beta: 0.0, mu1: 1.0, mu2: 1.0}
grid: {dim: 1, points: 1024, half_length: 64}
profiles:
  bubbles: 1
  members: 60
)");
    const auto dir = scratch("overflow");
    std::string err;
    CHECK(run_file(overflow, dir, &err) == 1);
    REQUIRE(fs::exists(dir / "FAILED"));
    CHECK(slurp(dir / "FAILED").find("leaves the box") != std::string::npos);
}

TEST_CASE("corrupted level cache is ignored") {
    const auto cache = fs::temp_directory_path() / "kgsys_bad_cache.json";
    std::ofstream(cache) << "{not json";
    clear_h0_cache();
    CHECK_FALSE(load_h0_cache(cache));
    SuiteOptions o;
    o.only = {2};
    o.h0_cache = cache;
    const auto report = validate_suite(o);
    REQUIRE(report.results.size() == 1);
    CHECK(report.results[0].pass);
}

TEST_CASE("verdicts do not depend on the seed") {
    for (int id : {5, 9}) {
        const auto a = run_criterion(id, 11), b = run_criterion(id, 12);
        CHECK(a.pass);
        CHECK(a.pass == b.pass);
    }
}
