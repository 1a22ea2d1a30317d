#include "kgsys/bumps.hpp"
#include "kgsys/classify.hpp"
#include "kgsys/groundstate.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kgsys;

namespace {

const SpectralGrid& line() {
    static const SpectralGrid g(1, 512, 32.0);
    return g;
}

PhasePoint random_phase(std::mt19937_64& rng, const SpectralGrid& g, double scale) {
    const auto pair = random_bump_pair(rng, g.dim()).sample(g).scaled(scale);
    std::uniform_real_distribution<double> vel(-0.5, 0.5);
    return {pair, vel(rng) * partial_derivative(pair.u1, 0), vel(rng) * pair.u2};
}

} // namespace

TEST_CASE("functional identities on random pairs") {
    std::mt19937_64 rng(21);
    const NonlinearityParams p{1.3, 1.0, 0.6};
    for (int dim : {1, 2, 3}) {
        const SpectralGrid g(dim, dim == 3 ? 24 : 64, 8.0);
        for (int i = 0; i < 20; ++i) {
            const auto pair = random_bump_pair(rng, dim).sample(g);
            const double J = static_action(pair, p), a = pair_h1_norm_sq(pair);
            CHECK(g0(pair) == doctest::Approx(J - k0(pair, p) / 4).epsilon(1e-10).scale(a));
            CHECK(g2(pair) == doctest::Approx(J - k2(pair, p) / dim).epsilon(1e-10).scale(a));
            CHECK(g0(pair) >= 0.0);
            if (dim >= 2) CHECK(g2(pair) >= 0.0);
            // The projected level is invariant under scaling of the pair.
            CHECK(projected_level(pair.scaled(2.5), p) == doctest::Approx(projected_level(pair, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("conservation on random data") {
    std::mt19937_64 rng(22);
    const NonlinearityParams p{1.0, 1.0, 1.0};
    StepPolicy fine;
    fine.dt_base = 2.5e-3;
    StepPolicy coarse;
    coarse.dt_base = 5e-3;
    for (int i = 0; i < 5; ++i) {
        const auto u0 = random_phase(rng, line(), 0.4);
        const auto tr = evolve(u0, 5.0, fine, p);
        REQUIRE(tr.status == RunStatus::completed);
        CHECK(tr.max_energy_drift <= 1e-6);
        const double ratio = evolve(u0, 5.0, coarse, p).max_energy_drift / tr.max_energy_drift;
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.25));
        const double P0 = tr.series.front().P[0];
        const double scale = std::max(std::abs(tr.series.front().E), 1e-12);
        for (const auto& r : tr.series) CHECK(std::abs(r.P[0] - P0) <= 1e-8 * scale);
        const auto back = evolve(time_reversed(tr.final_state()), 5.0, fine, p);
        const auto& start = tr.snapshots.front();
        CHECK(phase_norm(time_reversed(back.final_state()) - start) <= 1e-6 * phase_norm(start));
    }
}

TEST_CASE("energy is invariant under translation") {
    std::mt19937_64 rng(23);
    const NonlinearityParams p{0.7, 1.0, 1.0};
    const auto bp = random_bump_pair(rng, 1);
    const std::vector<double> shift{2.5};
    const auto a = PhasePoint::at_rest(bp.sample(line()));
    const auto b = PhasePoint::at_rest(bp.translated(shift).sample(line()));
    CHECK(energy(b, p) == doctest::Approx(energy(a, p)).epsilon(1e-12));
}

TEST_CASE("sub-threshold regions are invariant") {
    const NonlinearityParams p{2.0, 1.0, 1.0};
    const double h = solve_ground_state(p, line()).level;
    std::mt19937_64 rng(24);
    DichotomyConfig cfg;
    cfg.horizon = 15.0;
    BumpOptions bo;
    bo.empty_component_probability = 0.0;
    int plus = 0, minus = 0;
    for (int i = 0; i < 6; ++i) {
        const auto bp = random_bump_pair(rng, 1, bo);
        const auto m = measure_pair(bp.sample(line()), p);
        const bool beyond = i % 2 == 1;
        const auto s = action_scaling(m, 0.6 * h, beyond);
        REQUIRE(s);
        const auto datum = PhasePoint::at_rest(bp.amplitude_scaled(*s).sample(line()));
        const auto rep = run_dichotomy(datum, p, h, cfg);
        CHECK(rep.initial.region == (beyond ? Region::PS_minus : Region::PS_plus));
        CHECK(rep.region_flips == 0);
        CHECK(rep.initial.E + rep.energy_drift * std::abs(rep.initial.E) < h);
        CHECK(rep.verdict != DichotomyVerdict::inconclusive);
        (rep.initial.region == Region::PS_plus ? plus : minus) += 1;
    }
    CHECK(plus == 3);
    CHECK(minus == 3);
}

TEST_CASE("free flow preserves the phase norm") {
    std::mt19937_64 rng(25);
    const SpectralGrid g(2, 32, 6.0);
    for (int i = 0; i < 10; ++i) {
        const auto u = random_phase(rng, g, 1.0);
        CHECK(phase_norm(free_evolve(u, 0.37 * i)) == doctest::Approx(phase_norm(u)).epsilon(1e-12));
    }
}
