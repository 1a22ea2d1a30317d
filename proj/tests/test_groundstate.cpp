#include "kgsys/bumps.hpp"
#include "kgsys/groundstate.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace kgsys;

TEST_CASE("scalar radial profile") {
    const auto S = scalar_ground_state();
    CHECK(S.center_value > 2.0);
    CHECK(S.center_value < 6.0);
    CHECK(S.values.front() == doctest::Approx(S.center_value));
    for (std::size_t i = 1; i < S.values.size(); ++i) CHECK(S.values[i] > 0.0);
    CHECK(S.decay_rate == doctest::Approx(1.0).epsilon(0.05));
    // On the constraint: ||S||^2 = int S^4, so J = ||S||^2 / 4.
    CHECK(S.action() == doctest::Approx(0.25 * S.h1_norm_sq()).epsilon(1e-4));

    const auto fine = scalar_ground_state(20.0, 8000);
    CHECK(std::abs(fine.center_value - S.center_value) <= 1e-6 * S.center_value);
    CHECK(std::abs(fine.action() - S.action()) <= 1e-6 * S.action());

    CHECK_THROWS_AS(scalar_ground_state(10.0), std::invalid_argument);
    CHECK_THROWS_AS(scalar_ground_state(20.0, 100), std::invalid_argument);
}

TEST_CASE("scalar level in one dimension") {
    CHECK(scalar_level(1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(scalar_profile(1, 0.7) == doctest::Approx(std::sqrt(2.0) / std::cosh(0.7)).epsilon(1e-12));
}

TEST_CASE("candidate levels") {
    const double J = scalar_level(3);
    const auto c0 = candidate_levels({0.0, 1.0, 1.0});
    CHECK(c0.semitrivial == doctest::Approx(J).epsilon(1e-12));
    // Symmetric candidate: alpha^2 = gamma^2 = 1, two decoupled copies.
    REQUIRE(c0.synchronized);
    CHECK(*c0.synchronized == doctest::Approx(2 * J).epsilon(1e-12));
    CHECK(c0.best() == doctest::Approx(J));

    const auto c1 = candidate_levels({1.0, 1.0, 1.0});
    REQUIRE(c1.synchronized);
    CHECK(*c1.synchronized == doctest::Approx(J).epsilon(1e-12));

    const auto c3 = candidate_levels({3.0, 1.0, 1.0});
    REQUIRE(c3.synchronized);
    CHECK(*c3.synchronized == doctest::Approx(J / 2).epsilon(1e-12));
    CHECK(c3.alpha_sq == doctest::Approx(0.25));

    CHECK(candidate_levels({1.0, 2.0, 0.5}).semitrivial == doctest::Approx(J / 2).epsilon(1e-12));
}

TEST_CASE("grid minimizer in one dimension") {
    const SpectralGrid g(1, 512, 32.0);
    const auto decoupled = solve_ground_state({0.0, 1.0, 1.0}, g);
    CHECK(decoupled.converged);
    CHECK(decoupled.level == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(decoupled.kind == GroundStateKind::semitrivial);

    const auto coupled = solve_ground_state({3.0, 1.0, 1.0}, g);
    CHECK(coupled.converged);
    CHECK(coupled.level == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(coupled.kind == GroundStateKind::symmetric);
    CHECK(coupled.el_residual <= 1e-6);
    CHECK(coupled.k0_relative <= 1e-6);
}

TEST_CASE("h0 is positive and nonincreasing in beta") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double h = h0({beta, 1.0, 1.0}, 1);
        CHECK(h > 0.0);
        CHECK(h <= prev * (1 + 1e-9));
        prev = h;
    }
    CHECK(h0({0.0, 1.0, 1.0}, 3) == doctest::Approx(scalar_level(3)).epsilon(1e-4));
}

TEST_CASE("projected level gradient matches finite differences") {
    const SpectralGrid g(1, 128, 12.0);
    const NonlinearityParams p{1.5, 1.0, 0.8};
    std::mt19937_64 rng(4);
    const auto pair = random_bump_pair(rng, 1).sample(g);
    const auto grad = projected_level_gradient(pair, p);
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto dir = random_bump_pair(rng, 1).sample(g);
        // Directional derivative in the H1 pairing: <grad, dir>_{H1}.
        const double analytic = inner_product(apply_bessel(grad.u1, 2.0), dir.u1) +
                                inner_product(apply_bessel(grad.u2, 2.0), dir.u2);
        auto shifted = [&](double s) { return FieldPair{pair.u1 + s * dir.u1, pair.u2 + s * dir.u2}; };
        const double fd = (projected_level(shifted(h), p) - projected_level(shifted(-h), p)) / (2 * h);
        worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("grid minimizer is resolution independent") {
    const NonlinearityParams p{1.5, 1.0, 0.7};
    const auto coarse = solve_ground_state(p, SpectralGrid(1, 256, 32.0));
    const auto fine = solve_ground_state(p, SpectralGrid(1, 512, 32.0));
    CHECK(std::abs(fine.level - coarse.level) <= 1e-3 * fine.level);
    CHECK(fine.level == doctest::Approx(g0(fine.pair)).epsilon(1e-6));
    CHECK(std::abs(k0(fine.pair, p)) <= 1e-6 * pair_h1_norm_sq(fine.pair));
}

TEST_CASE("radial minimizer") {
    const NonlinearityParams p{2.0, 1.0, 1.0};
    const auto r = solve_radial_ground_state(p);
    CHECK(r.converged);
    CHECK(r.kind == GroundStateKind::symmetric);
    CHECK(r.level == doctest::Approx(2.0 / 3.0 * scalar_level(3)).epsilon(1e-6));
    CHECK(r.el_residual <= 1e-6);
    CHECK(r.profile(0, 0.0) > r.profile(0, 2.0));

    const auto coarse = solve_radial_ground_state(p, 1024, 24.0);
    CHECK(coarse.level == doctest::Approx(r.level).epsilon(1e-6));
}

TEST_CASE("ground state is a mountain pass along its ray") {
    const SpectralGrid g(1, 512, 32.0);
    const NonlinearityParams p{2.0, 1.0, 1.0};
    const auto gs = solve_ground_state(p, g);
    CHECK(k0(gs.pair.scaled(0.9), p) > 0.0);
    CHECK(k0(gs.pair.scaled(1.1), p) < 0.0);
    CHECK(static_action(gs.pair.scaled(0.9), p) < gs.level);
    CHECK(static_action(gs.pair.scaled(1.1), p) < gs.level);
}

TEST_CASE("ground state table") {
    const auto j = nlohmann::json::parse(
        ground_state_table_json({{{1.0, 1.0, 1.0}, 1.5, GroundStateKind::symmetric, 1e-9}}));
    REQUIRE(j.size() == 1);
    CHECK(j[0]["beta"] == 1.0);
    CHECK(j[0]["kind"] == "symmetric");
}

TEST_CASE("component classification") {
    CHECK(classify_components(1.0, 0.0) == GroundStateKind::semitrivial);
    CHECK(classify_components(1.0, 1.0) == GroundStateKind::symmetric);
    CHECK(classify_components(1.0, 0.5) == GroundStateKind::coupled_asymmetric);
}
