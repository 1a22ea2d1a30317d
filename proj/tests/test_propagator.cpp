#include "kgsys/bumps.hpp"
#include "kgsys/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kgsys;

namespace {

PhasePoint gaussian_pair(const SpectralGrid& g, double amp, double velocity = 0.0) {
    BumpPair bp;
    bp.dim = g.dim();
    bp.first = {{{0.5, 0.0, 0.0}, 1.0, amp}};
    bp.second = {{{-0.5, 0.3, 0.0}, 1.2, 0.8 * amp}};
    auto pair = bp.sample(g);
    ScalarField v1 = -velocity * partial_derivative(pair.u1, 0);
    return {std::move(pair), std::move(v1), ScalarField(g)};
}

double distance(const PhasePoint& a, const PhasePoint& b) { return phase_norm(a - b); }

} // namespace

TEST_CASE("free evolution") {
    const SpectralGrid g(1, 64, std::numbers::pi);
    std::mt19937_64 rng(1);
    const auto pair = random_bump_pair(rng, 1).sample(g);
    const PhasePoint u{pair, 0.3 * pair.u2, -0.2 * pair.u1};
    CHECK(distance(free_evolve(u, 0.0), u) <= 1e-14 * phase_norm(u));

    const double k0 = 3.0, w = std::sqrt(1 + k0 * k0), t = 0.77;
    const auto c = ScalarField::from_function(g, [&](auto x) { return std::cos(k0 * x[0]); });
    const auto s = free_evolve(PhasePoint::at_rest({c, ScalarField(g)}), t);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(s.pair.u1[i] == doctest::Approx(std::cos(w * t) * c[i]).epsilon(1e-12).scale(1.0));
        CHECK(s.v1[i] == doctest::Approx(-w * std::sin(w * t) * c[i]).epsilon(1e-12).scale(1.0));
    }

    CHECK(distance(free_evolve(free_evolve(u, 0.4), 1.1), free_evolve(u, 1.5)) <= 1e-12 * phase_norm(u));
}

TEST_CASE("nonlinear kick") {
    const SpectralGrid g(2, 16, 4.0);
    const NonlinearityParams p{1.5, 1.0, 0.5};
    CHECK(phase_norm(nonlinear_kick(PhasePoint::zeros(g), 0.1, p)) == 0.0);

    std::mt19937_64 rng(2);
    const auto u = PhasePoint::at_rest(random_bump_pair(rng, 2).sample(g));
    CHECK(distance(nonlinear_kick(u, 0.0, p), u) == 0.0);

    const double a = 0.7, b = -0.4, dt = 0.05;
    const auto ca = ScalarField::from_function(g, [&](auto) { return a; });
    const auto cb = ScalarField::from_function(g, [&](auto) { return b; });
    const auto k = nonlinear_kick(PhasePoint::at_rest({ca, cb}), dt, p);
    CHECK(k.v1[5] == doctest::Approx(dt * (p.mu1 * a * a * a + p.beta * b * b * a)).epsilon(1e-13));
    CHECK(k.v2[5] == doctest::Approx(dt * (p.mu2 * b * b * b + p.beta * a * a * b)).epsilon(1e-13));
    CHECK(k.pair.u1[5] == a);
}

TEST_CASE("evolve: zero and small data") {
    const SpectralGrid g(1, 256, 16.0);
    const NonlinearityParams p{1.0, 1.0, 1.0};
    const auto zero = evolve(PhasePoint::zeros(g), 2.0, StepPolicy{}, p);
    CHECK(zero.status == RunStatus::completed);
    for (const auto& r : zero.series) CHECK(r.E == 0.0);

    const auto small = evolve(gaussian_pair(g, 0.1, 0.2), 20.0, StepPolicy{}, p);
    CHECK(small.status == RunStatus::completed);
    CHECK(small.peak_phase_norm() < 1.1 * small.phase_norm.front());
    CHECK(std::isfinite(small.strichartz_running.back()));
    CHECK(small.final_time() == doctest::Approx(20.0));
}

TEST_CASE("evolve is second order") {
    const SpectralGrid g(1, 256, 16.0);
    const NonlinearityParams p{1.0, 1.0, 1.0};
    const auto u0 = gaussian_pair(g, 0.8, 0.3);
    auto run = [&](double dt) {
        StepPolicy pol;
        pol.dt_base = dt;
        pol.dt_min = dt / 100;
        return evolve(u0, 2.0, pol, p).final_state();
    };
    const auto ref = run(0.04 / 8);
    const double e1 = distance(run(0.04), ref), e2 = distance(run(0.02), ref);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("duhamel residual") {
    const SpectralGrid g(1, 256, 16.0);
    StepPolicy pol;
    pol.snapshot_stride = 5;
    const auto u0 = gaussian_pair(g, 0.4, 0.2);
    const auto lin = evolve(u0, 2.0, pol, NonlinearityParams::linear());
    CHECK(duhamel_residual(lin, {1.0, 2.0}) <= 1e-10);

    const auto nl = evolve(u0, 2.0, pol, {1.0, 1.0, 1.0});
    CHECK(duhamel_residual(nl, {0.5, 1.0, 1.5, 2.0}) <= 1e-4);

    StepPolicy sparse = pol;
    sparse.snapshot_stride = 50;
    const auto coarse = evolve(u0, 2.0, sparse, {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(duhamel_residual(coarse, {1.0}), std::invalid_argument);
}

TEST_CASE("strichartz accumulator") {
    const SpectralGrid g(1, 64, 8.0);
    const auto zero = evolve(PhasePoint::zeros(g), 1.0, StepPolicy{}, NonlinearityParams::linear());
    for (double v : strichartz_accumulator(zero)) CHECK(v == 0.0);

    // Time-constant integrand: running value T^{1/3} ||U||_{L6xL6}.
    Trajectory held(g, NonlinearityParams::linear());
    for (int i = 0; i <= 40; ++i) {
        held.times.push_back(0.05 * i);
        held.l6.push_back(0.8);
    }
    const auto s = strichartz_accumulator(held);
    CHECK(s.back() == doctest::Approx(std::cbrt(2.0) * 0.8).epsilon(1e-12));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] >= s[i - 1]);
}

TEST_CASE("free strichartz norm plateaus before wrap-around") {
    const SpectralGrid g(3, 64, 16.0);
    BumpPair bp;
    bp.dim = 3;
    bp.first = {{{0.0, 0.0, 0.0}, 1.2, 0.3}};
    const auto u0 = PhasePoint::at_rest(bp.sample(g));
    const double T = 12.0;
    std::vector<double> times;
    for (int i = 0; i <= 120; ++i) times.push_back(0.1 * i);
    const auto s = free_strichartz_series(u0, times);
    CHECK(s.back() - s[90] < 0.01 * s.back());
    CHECK(times.back() == doctest::Approx(T));
}

TEST_CASE("conservation and reversibility in 1D") {
    const SpectralGrid g(1, 256, 16.0);
    const NonlinearityParams p{0.5, 1.0, 1.0};
    const auto u0 = gaussian_pair(g, 0.2, 0.3);
    const auto fwd = evolve(u0, 10.0, StepPolicy{}, p);
    REQUIRE(fwd.status == RunStatus::completed);
    CHECK(fwd.max_energy_drift <= 1e-6);
    for (const auto& r : fwd.series) CHECK(std::abs(r.P[0] - fwd.series.front().P[0]) <= 1e-8);
    const auto back = evolve(time_reversed(fwd.final_state()), 10.0, StepPolicy{}, p);
    const auto& start = fwd.snapshots.front();
    CHECK(distance(time_reversed(back.final_state()), start) <= 1e-6 * phase_norm(start));
}

TEST_CASE("virial identity for compactly supported solutions") {
    // d/dt sum <chi v_i, x u_i' + u_i / 2> = -K2 while chi = 1 on the support.
    const SpectralGrid g(1, 256, 16.0);
    const NonlinearityParams p{1.0, 1.0, 1.0};
    StepPolicy pol;
    pol.dt_base = 0.005;
    pol.snapshot_stride = 1;
    const auto tr = evolve(gaussian_pair(g, 0.6), 1.0, pol, p);
    const std::vector<double> origin{0.0};
    const auto chi = virial_cutoff(g, 6.0, origin);
    const auto x = ScalarField::from_function(g, [](auto y) { return y[0]; });
    auto A = [&](const PhasePoint& u) {
        double acc = 0.0;
        for (const auto* pr : {&u.pair.u1, &u.pair.u2}) {
            const auto& vi = pr == &u.pair.u1 ? u.v1 : u.v2;
            ScalarField dil = partial_derivative(*pr, 0);
            for (std::size_t i = 0; i < g.size(); ++i) dil[i] = x[i] * dil[i] + 0.5 * (*pr)[i];
            for (std::size_t i = 0; i < g.size(); ++i) dil[i] *= chi[i] * vi[i];
            acc += integrate(dil);
        }
        return acc;
    };
    const std::size_t k = 100;
    REQUIRE(tr.snapshot_times[k] == doctest::Approx(0.5));
    const double h = tr.snapshot_times[k + 1] - tr.snapshot_times[k];
    const double dA = (A(tr.snapshots[k + 1]) - A(tr.snapshots[k - 1])) / (2 * h);
    const double K2 = k2(tr.snapshots[k].pair, p);
    CHECK(dA == doctest::Approx(-K2).epsilon(1e-3).scale(1e-3 * pair_h1_norm_sq(tr.snapshots[k].pair)));
}

TEST_CASE("localized virial derivative is controlled by the exterior energy") {
    // Data at rest, hence zero momentum: |dX_R/dt| <= (1 + sup |x chi_R'|) * exterior free energy.
    const SpectralGrid g(1, 512, 32.0);
    const NonlinearityParams p{1.0, 1.0, 1.0};
    const double R = 4.0;
    const std::vector<double> origin{0.0};
    const auto chi = virial_cutoff(g, R, origin);
    const auto dchi = partial_derivative(chi, 0);
    double slope = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) slope = std::max(slope, std::abs(g.point(i)[0] * dchi[i]));
    const double bound = 1.0 + slope;

    std::vector<double> constants;
    for (double amp : {0.3, 0.6}) {
        BumpPair bp;
        bp.dim = 1;
        bp.first = {{{1.0, 0.0, 0.0}, 1.0, amp}};
        bp.second = {{{-0.8, 0.0, 0.0}, 1.5, 0.7 * amp}};
        StepPolicy pol;
        pol.snapshot_stride = 1;
        const auto tr = evolve(PhasePoint::at_rest(bp.sample(g)), 8.0, pol, p);
        REQUIRE(tr.status == RunStatus::completed);
        double C = 0.0;
        for (std::size_t k = 1; k + 1 < tr.snapshots.size(); k += 20) {
            const auto& u = tr.snapshots[k];
            double ext = 0.0;
            const auto d1 = partial_derivative(u.pair.u1, 0), d2 = partial_derivative(u.pair.u2, 0);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (std::abs(g.point(i)[0]) >= R)
                    ext += 0.5 * g.cell_volume() *
                           (d1[i] * d1[i] + d2[i] * d2[i] + u.pair.u1[i] * u.pair.u1[i] +
                            u.pair.u2[i] * u.pair.u2[i] + u.v1[i] * u.v1[i] + u.v2[i] * u.v2[i]);
            const double h = tr.snapshot_times[k + 1] - tr.snapshot_times[k];
            const double dX = (localized_virial(tr.snapshots[k + 1], p, R, origin)[0] -
                               localized_virial(tr.snapshots[k - 1], p, R, origin)[0]) / (2 * h);
            if (ext > 1e-8) C = std::max(C, std::abs(dX) / ext);
        }
        constants.push_back(C);
    }
    MESSAGE("measured constants " << constants[0] << ", " << constants[1] << "; bound " << bound);
    for (double C : constants) CHECK(C <= bound);
    CHECK(constants[0] == doctest::Approx(constants[1]).epsilon(0.05));
}

TEST_CASE("trajectory csv") {
    const SpectralGrid g(2, 16, 4.0);
    const auto tr = evolve(PhasePoint::zeros(g), 0.05, StepPolicy{}, NonlinearityParams::linear());
    std::ostringstream os;
    write_trajectory_csv(os, tr, "hash");
    std::istringstream is(os.str());
    std::string comment, header;
    std::getline(is, comment);
    std::getline(is, header);
    CHECK(comment == "# hash");
    CHECK(header == "t,E,P1,P2,K0,K2,H1sq,Linf,strichartz_running");
}

TEST_CASE("step policy validation") {
    StepPolicy p;
    p.dt_min = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_THROWS_AS(evolve(PhasePoint::zeros(SpectralGrid(1, 16, 1.0)), 0.0, StepPolicy{}, {}), std::invalid_argument);
}
