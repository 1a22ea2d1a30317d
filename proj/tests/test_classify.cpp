#include "kgsys/classify.hpp"
#include "kgsys/groundstate.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace kgsys;

namespace {

const NonlinearityParams params{2.0, 1.0, 1.0};

const GroundState& ground() {
    static const GroundState gs = solve_ground_state(params, SpectralGrid(1, 512, 32.0));
    return gs;
}

PhasePoint on_ray(double s) { return PhasePoint::at_rest(ground().pair.scaled(s)); }

} // namespace

TEST_CASE("region membership") {
    const double h = ground().level;
    const auto zero = classify(PhasePoint::zeros(ground().pair.grid()), params, h);
    CHECK(zero.region == Region::PS_plus);
    CHECK(zero.borderline);
    CHECK(zero.margin == doctest::Approx(h));

    for (double eps : {1e-3, 5e-2}) {
        CHECK(classify(on_ray(1 - eps), params, h).region == Region::PS_plus);
        CHECK(classify(on_ray(1 + eps), params, h).region == Region::PS_minus);
    }
    CHECK(classify(on_ray(1.0), params, h).region == Region::above_threshold);
    CHECK(classify_values(1.0, -1.0, 1.0, 0.5).region == Region::above_threshold);
    CHECK(classify_values(0.1, 1e-12, 1.0, 0.5).borderline);
}

TEST_CASE("dichotomy runs") {
    const double h = ground().level;
    DichotomyConfig cfg;
    cfg.horizon = 20.0;

    const auto up = run_dichotomy(on_ray(1.05), params, h, cfg);
    CHECK(up.verdict == DichotomyVerdict::blowup_detected);
    REQUIRE(up.escape_time);
    CHECK(*up.escape_time < 20.0);
    CHECK(up.free_fit_error_series.empty());

    const auto down = run_dichotomy(on_ray(0.5), params, h, cfg);
    CHECK(down.verdict == DichotomyVerdict::global_bounded);
    CHECK(down.status == RunStatus::completed);
    CHECK(down.region_flips == 0);
    CHECK(down.free_fit_times.size() == down.free_fit_error_series.size());

    const auto zero = run_dichotomy(PhasePoint::zeros(ground().pair.grid()), params, h, cfg);
    CHECK(zero.verdict == DichotomyVerdict::global_bounded);
    CHECK(zero.peak_h1 == 0.0);

    CHECK_THROWS_AS(run_dichotomy(on_ray(1.0), params, h, cfg), std::invalid_argument);

    const auto j = nlohmann::json::parse(to_json(down));
    CHECK(j["verdict"] == "global_bounded");
}

TEST_CASE("scattering diagnostic") {
    const auto& g = ground().pair.grid();
    const auto free_run = evolve(on_ray(0.3), 12.0, StepPolicy{}, NonlinearityParams::linear());
    const auto s = scattering_diagnostic(free_run, 0.0, 3.0);
    REQUIRE(!s.increments.empty());
    for (double inc : s.increments) CHECK(inc <= 1e-10 * s.datum_norm);
    for (double e : s.free_fit_error) CHECK(e <= 1e-10 * s.datum_norm);
    CHECK(s.window_times.back() == doctest::Approx(12.0));

    DichotomyConfig cfg;
    cfg.horizon = 20.0;
    const auto blown = evolve(on_ray(1.05), 20.0, cfg.policy, params);
    REQUIRE(blown.status == RunStatus::blowup_detected);
    CHECK_THROWS_AS(scattering_diagnostic(blown, 0.0, 3.0), std::invalid_argument);

    CHECK(wrap_time(g, 4.0) == doctest::Approx(28.0));
    CHECK(wrap_time(g, 40.0) == 0.0);
}

TEST_CASE("perturbation harness") {
    const auto base = on_ray(0.1);
    const auto dir = PhasePoint::at_rest(ground().pair);
    const double q = phase_norm(dir);
    StepPolicy pol;
    pol.snapshot_stride = 5;

    const auto small = perturbation_test(base, {0.0, 1e-3, 1e-2}, {dir}, params, 4.0, pol);
    REQUIRE(small.rows.size() == 3);
    CHECK(small.rows[0].sup_distance == 0.0);
    CHECK(small.violations == 0);
    CHECK(small.exponent_sup == doctest::Approx(1.0).epsilon(0.1));

    const auto crossing = perturbation_test(base, {1.1 * q}, {dir}, params, 20.0, pol);
    CHECK(crossing.violations == 1);
    CHECK(crossing.rows[0].hypothesis_violated);
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0));
    CHECK(loglog_slope({0.0, 1.0, 10.0}, {5.0, 1.0, 10.0}) == doctest::Approx(1.0));
}

TEST_CASE("ensemble csv") {
    EnsembleRow row;
    row.report.verdict = DichotomyVerdict::global_bounded;
    row.final_increment = 0.01;
    std::ostringstream os;
    write_ensemble_csv(os, {row}, "seed=1");
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "# seed=1");
    std::getline(is, line);
    CHECK(line.rfind("index,E,K0,margin,region,verdict", 0) == 0);
}
