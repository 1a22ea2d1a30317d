#include "kgsys/profiles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>

using namespace kgsys;

namespace {

const SpectralGrid& line() {
    static const SpectralGrid g(1, 1024, 64.0);
    return g;
}

PhasePoint bubble(double a, double w) {
    auto u = ScalarField::from_function(line(), [&](auto x) { return a * std::exp(-x[0] * x[0] / (2 * w * w)); });
    return PhasePoint::at_rest({u, 0.5 * u});
}

BubbleSpec drifting(const PhasePoint& datum, int n, double start, double step, double t_step = 0.0) {
    const double h = line().spacing();
    BubbleSpec b{datum, {}};
    for (int k = 0; k < n; ++k) b.shifts.push_back({t_step * k, {std::round((start + step * k) / h) * h}});
    return b;
}

ExtractionOptions options() {
    ExtractionOptions o;
    o.nu_floor = 0.05;
    return o;
}

} // namespace

TEST_CASE("bubble placement") {
    const auto v = bubble(1.0, 1.0);
    CHECK(phase_norm(place_bubble(v, {0.0, {0.0}}) - v) == 0.0);

    const double h = line().spacing();
    const auto moved = place_bubble(v, {0.0, {10 * h}});
    CHECK(moved.pair.u1[512 + 10] == doctest::Approx(v.pair.u1[512]).epsilon(1e-12));
    CHECK(free_energy(place_bubble(v, {1.5, {3.0}})) == doctest::Approx(free_energy(v)).epsilon(1e-12));
}

TEST_CASE("sequence synthesis") {
    const auto& g = line();
    const auto empty = synthesize_sequence(g, {}, 0.0, 3);
    REQUIRE(empty.size() == 3);
    CHECK(phase_norm(empty[2]) == 0.0);

    const auto noisy = synthesize_sequence(g, {}, 0.2, 2, 7);
    CHECK(phase_norm(noisy[0]) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(phase_norm(noisy[0] - synthesize_sequence(g, {}, 0.2, 2, 7)[0]) == 0.0);

    const auto A = drifting(bubble(1.0, 1.0), 4, -8.0, -1.5);
    const auto seq = synthesize_sequence(g, {A}, 0.0, 4);
    CHECK(free_energy(seq[3]) == doctest::Approx(free_energy(A.datum)).epsilon(1e-12));

    CHECK_THROWS_AS(synthesize_sequence(g, {drifting(bubble(1.0, 1.0), 4, 50.0, 3.0)}, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_sequence(g, {A}, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_sequence(g, {}, -1.0, 2), std::invalid_argument);
}

TEST_CASE("extraction of an empty sequence") {
    const auto seq = synthesize_sequence(line(), {}, 0.0, 4);
    const auto d = extract_profiles(seq, options());
    CHECK(d.bubbles.empty());
    CHECK(d.complete);
    CHECK(d.final_nu == 0.0);
}

TEST_CASE("extraction recovers one planted bubble") {
    const int n = 12;
    const auto A = drifting(bubble(1.0, 1.0), n, -8.0, -1.5);
    const auto seq = synthesize_sequence(line(), {A}, 0.0, n);
    const auto o = options();
    const auto d = extract_profiles(seq, o);
    REQUIRE(d.bubbles.size() == 1);
    const double h = line().spacing();
    for (int k = 0; k < n; ++k) {
        CHECK(std::abs(d.bubbles[0].shifts[k].x[0] - A.shifts[k].x[0]) <= 0.5 * h);
        CHECK(std::abs(d.bubbles[0].shifts[k].t) <= 0.5 * o.t_step);
    }
    CHECK(free_energy(d.bubbles[0].datum) == doctest::Approx(free_energy(A.datum)).epsilon(0.02));

    const auto r = orthogonality_check(d, seq, o);
    CHECK(r.defects.back() <= 0.03);
    CHECK(r.nonincreasing_tail);
    for (double w : r.weak_limit_proxy) CHECK(w <= 0.05 * std::sqrt(free_energy(A.datum)));
    REQUIRE(r.detection_ratios.size() == 1);
    CHECK(r.detection_constant > 0.0);
    CHECK(r.detection_constant <= 1.0);

    // Remainders carry nothing above the floor.
    CHECK(extract_profiles(d.remainders, o).bubbles.empty());
}

TEST_CASE("extraction separates two bubbles") {
    const int n = 12;
    const auto A = drifting(bubble(1.0, 1.0), n, -8.0, -1.5);
    const auto B = drifting(bubble(0.6, 1.3), n, 8.0, 1.5, 0.2);
    const auto seq = synthesize_sequence(line(), {A, B}, 0.0, n);
    const auto d = extract_profiles(seq, options());
    REQUIRE(d.bubbles.size() == 2);
    CHECK(d.nu_series[0] >= d.nu_series[1]);
    CHECK(d.bubbles[1].shifts.back().t == doctest::Approx(B.shifts.back().t).epsilon(0.05));
}

TEST_CASE("bubble budget") {
    const int n = 6;
    const auto A = drifting(bubble(1.0, 1.0), n, -8.0, -1.5);
    const auto B = drifting(bubble(0.6, 1.3), n, 8.0, 1.5);
    auto o = options();
    o.max_bubbles = 1;
    const auto d = extract_profiles(synthesize_sequence(line(), {A, B}, 0.0, n), o);
    CHECK(d.bubbles.size() == 1);
    CHECK_FALSE(d.complete);
    CHECK(d.final_nu > o.nu_floor);
}

TEST_CASE("decomposition manifest") {
    const int n = 4;
    const auto A = drifting(bubble(1.0, 1.0), n, -8.0, -1.5);
    const auto seq = synthesize_sequence(line(), {A}, 0.0, n);
    const auto o = options();
    const auto d = extract_profiles(seq, o);
    const auto dir = std::filesystem::temp_directory_path() / "kgsys_profiles_test";
    std::filesystem::create_directories(dir);
    const auto j = nlohmann::json::parse(decomposition_json(d, orthogonality_check(d, seq, o), dir));
    CHECK(j["bubbles"].size() == 1);
    CHECK(std::filesystem::exists(dir / "profile_0.kgdu"));
    std::filesystem::remove_all(dir);
}
