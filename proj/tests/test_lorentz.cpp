#include "kgsys/lorentz.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace kgsys;

namespace {

const SpectralGrid& line() {
    static const SpectralGrid g(1, 512, 32.0);
    return g;
}

ScalarField gauss(double a, double c) {
    return ScalarField::from_function(line(), [=](auto x) { return a * std::exp(-(x[0] - c) * (x[0] - c) / 2); });
}

const SpacetimeBlock& even_block() {
    static const SpacetimeBlock b =
        SpacetimeBlock::record(PhasePoint::at_rest({gauss(0.5, 0.0), gauss(0.3, 0.0)}), {0.5, 1.0, 1.0}, 21.0, 0.05);
    return b;
}

double rel_distance(const PhasePoint& a, const PhasePoint& b) { return phase_norm(a - b) / phase_norm(b); }

} // namespace

TEST_CASE("zero rapidity is the identity") {
    const auto& blk = even_block();
    const auto& slice = blk.slices[200];
    CHECK(rel_distance(boost(blk, {0.0, 1}, 10.0), slice) <= 1e-10);

    const auto rep = energy_momentum_rotation_check(blk, 1, {0.0}, 10.0);
    CHECK(rep.rows[0].rel_err <= 1e-10);
}

TEST_CASE("inverse and composition") {
    const auto& blk = even_block();
    const auto half = boost_block(blk, {0.15, 1}, 5.0, 0.05, 205);
    const auto& reference = blk.slices[200];
    CHECK(rel_distance(boost(half, {-0.15, 1}, 10.0), reference) <= 1e-5);
    CHECK(rel_distance(boost(half, {0.15, 1}, 10.0), boost(blk, {0.3, 1}, 10.0)) <= 1e-4);
}

TEST_CASE("energy-momentum rotation for even data") {
    const auto& blk = even_block();
    const auto rep = energy_momentum_rotation_check(blk, 1, {-0.2, 0.2}, 10.0);
    CHECK(std::abs(rep.P) <= 1e-12 * rep.E);
    for (const auto& row : rep.rows) {
        CHECK(row.E_boosted == doctest::Approx(rep.E * std::cosh(row.lambda)).epsilon(2e-3));
        CHECK(row.P_boosted == doctest::Approx(rep.E * std::sinh(row.lambda)).epsilon(2e-3));
    }
    const auto d = boost_derivative_check(blk, 1, 10.0);
    CHECK(d.dep_rel_err <= 1e-3);
    CHECK(d.dpe_rel_err <= 1e-3);

    std::ostringstream os;
    write_rotation_csv(os, rep);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "lambda,E_boosted,P_boosted,E_predicted,P_predicted,rel_err");
}

TEST_CASE("boosted fields solve the equation") {
    const auto datum = PhasePoint::at_rest({gauss(0.5, 0.0), gauss(0.3, 0.0)});
    const auto free_blk = SpacetimeBlock::record(datum, NonlinearityParams::linear(), 21.0, 0.05);
    CHECK(boosted_residual(free_blk, {0.2, 1}, 10.0) <= 1e-4);
    CHECK(boosted_residual(even_block(), {0.2, 1}, 10.0) <= 5e-3);
}

TEST_CASE("slab coverage and rapidity cap") {
    const auto& blk = even_block();
    const auto [lo, hi] = required_slab(line(), {0.2, 1}, 10.0);
    CHECK(lo < 10.0);
    CHECK(hi > 10.0);
    CHECK_THROWS_AS(boost(blk, {0.3, 1}, 19.0), std::out_of_range);
    CHECK_THROWS_AS(boost(blk, {0.6, 1}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(boost(blk, {0.1, 2}, 10.0), std::invalid_argument);
}

TEST_CASE("solutions must stay away from the box boundary") {
    const auto wide = PhasePoint::at_rest({gauss(0.5, 0.0), gauss(0.3, 28.0)});
    const auto blk = SpacetimeBlock::record(wide, {0.5, 1.0, 1.0}, 3.0, 0.05);
    CHECK_THROWS_AS(energy_momentum_rotation_check(blk, 1, {0.1}, 1.5), std::domain_error);
    CHECK_NOTHROW(require_interior(even_block(), 1));
}

TEST_CASE("block construction") {
    Trajectory tr(line(), NonlinearityParams::linear());
    CHECK_THROWS_AS(SpacetimeBlock::from_trajectory(tr, 0.0, 1.0), std::invalid_argument);
    CHECK(even_block().t_end() == doctest::Approx(21.0));
    CHECK(even_block().interpolation_error_estimate() <= 1e-6);
}
