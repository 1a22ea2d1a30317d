#include "kgsys/functionals.hpp"
#include "kgsys/littlewood_paley.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kgsys {

void NonlinearityParams::validate() const {
    if (!std::isfinite(beta) || !std::isfinite(mu1) || !std::isfinite(mu2))
        throw std::invalid_argument("nonlinearity parameters must be finite");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (mu1 < 0.0 || mu2 < 0.0) throw std::invalid_argument("mu1, mu2 must be >= 0");
}

void NonlinearityParams::require_focusing() const {
    validate();
    if (!(mu1 > 0.0 && mu2 > 0.0))
        throw std::invalid_argument("mu1, mu2 must be > 0 for a positive mountain-pass level");
}

FieldPair FieldPair::scaled(double factor) const {
    FieldPair out = *this;
    out.u1 *= factor;
    out.u2 *= factor;
    return out;
}

PhasePoint& PhasePoint::add_scaled(double factor, const PhasePoint& other) {
    pair.u1.add_scaled(factor, other.pair.u1);
    pair.u2.add_scaled(factor, other.pair.u2);
    v1.add_scaled(factor, other.v1);
    v2.add_scaled(factor, other.v2);
    return *this;
}

PhasePoint& PhasePoint::operator*=(double factor) {
    pair.u1 *= factor;
    pair.u2 *= factor;
    v1 *= factor;
    v2 *= factor;
    return *this;
}

PhasePoint operator-(PhasePoint a, const PhasePoint& b) { return a.add_scaled(-1.0, b); }
PhasePoint operator+(PhasePoint a, const PhasePoint& b) { return a.add_scaled(1.0, b); }

double quartic_integral(const FieldPair& pair, const NonlinearityParams& params) {
    const auto a = pair.u1.values();
    const auto b = pair.u2.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double a2 = a[i] * a[i];
        const double b2 = b[i] * b[i];
        sum += params.mu1 * a2 * a2 + params.mu2 * b2 * b2 + 2.0 * params.beta * a2 * b2;
    }
    return sum * pair.grid().cell_volume();
}

PairMeasures measure_pair(const FieldPair& pair, const NonlinearityParams& params) {
    const auto& g = pair.grid();
    PairMeasures m;
    for (const ScalarField* f : {&pair.u1, &pair.u2}) {
        const auto s = to_spectrum(*f);
        const double l2 = spectral_l2_norm_sq(g, s);
        const double grad = gradient_norm_sq(s, g);
        m.l2_sq += l2;
        m.gradient_sq += grad;
    }
    m.h1_sq = m.l2_sq + m.gradient_sq;
    m.quartic = quartic_integral(pair, params);
    return m;
}

double pair_h1_norm_sq(const FieldPair& pair) {
    return h1_norm_sq(to_spectrum(pair.u1), pair.grid()) + h1_norm_sq(to_spectrum(pair.u2), pair.grid());
}

double kinetic_norm_sq(const PhasePoint& phase) {
    return inner_product(phase.v1, phase.v1) + inner_product(phase.v2, phase.v2);
}

double phase_norm_sq(const PhasePoint& phase) { return pair_h1_norm_sq(phase.pair) + kinetic_norm_sq(phase); }
double phase_norm(const PhasePoint& phase) { return std::sqrt(phase_norm_sq(phase)); }

double static_action(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    return 0.5 * m.h1_sq - 0.25 * m.quartic;
}

double k0(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    return m.h1_sq - m.quartic;
}

double k2(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    const double d = pair.grid().dim();
    return m.gradient_sq - 0.25 * d * m.quartic;
}

double g0(const FieldPair& pair) { return 0.25 * pair_h1_norm_sq(pair); }

double g2(const FieldPair& pair) {
    const auto m = measure_pair(pair, NonlinearityParams::linear());
    const double d = pair.grid().dim();
    return (0.5 - 1.0 / d) * m.gradient_sq + 0.5 * m.l2_sq;
}

double energy(const PhasePoint& phase, const NonlinearityParams& params) {
    return static_action(phase.pair, params) + 0.5 * kinetic_norm_sq(phase);
}

namespace {

// int v d_axis u dx from the two spectra.
double derivative_pairing(const SpectralGrid& g, const Spectrum& v, const Spectrum& u, int axis) {
    const auto w = g.mode_weight();
    const auto k = g.wavevector_component(axis);
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        // Re(conj(v) * i k * u)
        sum += w[i] * k[i] * (v[i].imag() * u[i].real() - v[i].real() * u[i].imag());
    }
    return sum * g.cell_volume() / static_cast<double>(g.size());
}

} // namespace

std::vector<double> momentum(const PhasePoint& phase) {
    const auto& g = phase.grid();
    std::vector<double> p(g.dim(), 0.0);
    const auto u1 = to_spectrum(phase.pair.u1);
    const auto u2 = to_spectrum(phase.pair.u2);
    const auto v1 = to_spectrum(phase.v1);
    const auto v2 = to_spectrum(phase.v2);
    for (int a = 0; a < g.dim(); ++a)
        p[a] = derivative_pairing(g, v1, u1, a) + derivative_pairing(g, v2, u2, a);
    return p;
}

FunctionalReport functional_report(const SpectralGrid& g, const Spectrum& u1, const Spectrum& u2,
                                   const Spectrum& v1, const Spectrum& v2, double quartic) {
    const double l2 = spectral_l2_norm_sq(g, u1) + spectral_l2_norm_sq(g, u2);
    const double grad = gradient_norm_sq(u1, g) + gradient_norm_sq(u2, g);
    const double h1 = l2 + grad;
    const double kinetic = spectral_l2_norm_sq(g, v1) + spectral_l2_norm_sq(g, v2);
    const double d = g.dim();

    FunctionalReport r;
    r.J = 0.5 * h1 - 0.25 * quartic;
    r.E = r.J + 0.5 * kinetic;
    r.K0 = h1 - quartic;
    r.K2 = grad - 0.25 * d * quartic;
    r.G0 = 0.25 * h1;
    r.G2 = (0.5 - 1.0 / d) * grad + 0.5 * l2;
    r.h1_norm_sq = h1;
    r.P.resize(g.dim());
    for (int a = 0; a < g.dim(); ++a)
        r.P[a] = derivative_pairing(g, v1, u1, a) + derivative_pairing(g, v2, u2, a);
    return r;
}

FunctionalReport functional_report(const PhasePoint& phase, const NonlinearityParams& params) {
    return functional_report(phase.grid(), to_spectrum(phase.pair.u1), to_spectrum(phase.pair.u2),
                             to_spectrum(phase.v1), to_spectrum(phase.v2),
                             quartic_integral(phase.pair, params));
}

std::string to_json(const FunctionalReport& r) {
    nlohmann::ordered_json j;
    j["E"] = r.E;
    j["J"] = r.J;
    j["K0"] = r.K0;
    j["K2"] = r.K2;
    j["G0"] = r.G0;
    j["G2"] = r.G2;
    j["P"] = r.P;
    j["H1sq"] = r.h1_norm_sq;
    return j.dump();
}

ScalarField energy_density(const PhasePoint& phase, const NonlinearityParams& params) {
    const auto& g = phase.grid();
    ScalarField e(g);
    auto ev = e.values();
    for (const ScalarField* u : {&phase.pair.u1, &phase.pair.u2}) {
        for (int a = 0; a < g.dim(); ++a) {
            const auto du = partial_derivative(*u, a);
            for (std::size_t i = 0; i < ev.size(); ++i) ev[i] += 0.5 * du[i] * du[i];
        }
    }
    const auto a = phase.pair.u1.values();
    const auto b = phase.pair.u2.values();
    const auto p = phase.v1.values();
    const auto q = phase.v2.values();
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const double a2 = a[i] * a[i];
        const double b2 = b[i] * b[i];
        ev[i] += 0.5 * (a2 + b2 + p[i] * p[i] + q[i] * q[i]) -
                 0.25 * (params.mu1 * a2 * a2 + params.mu2 * b2 * b2 + 2.0 * params.beta * a2 * b2);
    }
    return e;
}

namespace {

void check_virial_geometry(const SpectralGrid& grid, double radius, std::span<const double> center) {
    if (!(radius > 0.0)) throw std::invalid_argument("virial radius must be positive");
    if (2.0 * radius > grid.half_length())
        throw std::invalid_argument("virial cutoff 2R exceeds the box half length");
    if (static_cast<int>(center.size()) != grid.dim())
        throw std::invalid_argument("virial center must have one coordinate per axis");
}

} // namespace

ScalarField virial_cutoff(const SpectralGrid& grid, double radius, std::span<const double> center) {
    check_virial_geometry(grid, radius, center);
    const double L = grid.half_length();
    const int d = grid.dim();
    return ScalarField::from_function(grid, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double dx = periodic_displacement(x[a], center[a], L);
            r2 += dx * dx;
        }
        return lp_bump(std::sqrt(r2) / radius);
    });
}

std::vector<double> localized_virial(const PhasePoint& phase, const NonlinearityParams& params,
                                     double radius, std::span<const double> center) {
    const auto& g = phase.grid();
    const auto chi = virial_cutoff(g, radius, center);
    const auto e = energy_density(phase, params);
    const double L = g.half_length();
    std::vector<double> x_r(g.dim(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (chi[i] == 0.0) continue;
        const auto x = g.point(i);
        for (int a = 0; a < g.dim(); ++a)
            x_r[a] += chi[i] * periodic_displacement(x[a], center[a], L) * e[i];
    }
    for (auto& v : x_r) v *= g.cell_volume();
    return x_r;
}

double scaling_normalize(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    if (!(m.quartic > 0.0))
        throw std::domain_error("scaling_normalize: quartic integral is not positive, no constraint crossing");
    if (!(m.h1_sq > 0.0)) throw std::domain_error("scaling_normalize: zero pair");
    return 0.5 * std::log(m.h1_sq / m.quartic);
}

namespace {

BranchCheck check_branch(double functional, double gap, double h1_sq, double scale) {
    BranchCheck b;
    b.functional = functional;
    b.negative_branch = functional < 0.0;
    if (b.negative_branch) {
        b.ratio = gap > 0.0 ? -functional / (2.0 * gap) : std::numeric_limits<double>::infinity();
        // rounding slack relative to the level
        b.holds = -functional >= 2.0 * gap - 1e-12 * scale;
    } else {
        const double m = std::min(gap, h1_sq);
        b.ratio = m > 0.0 ? functional / m : 0.0;
        b.holds = b.ratio > 0.0;
    }
    return b;
}

} // namespace

ConditionalReport conditional_inequality_check(const FieldPair& pair, const NonlinearityParams& params,
                                               double h0) {
    ConditionalReport r;
    const auto m = measure_pair(pair, params);
    const double d = pair.grid().dim();
    r.h1_sq = m.h1_sq;
    r.J = 0.5 * m.h1_sq - 0.25 * m.quartic;
    r.gap = h0 - r.J;
    if (!(m.h1_sq > 0.0)) {
        r.status = InequalityStatus::degenerate;
        return r;
    }
    if (!(r.J < h0)) {
        r.status = InequalityStatus::precondition_failed;
        return r;
    }
    const double scale = std::max(std::abs(h0), m.h1_sq);
    r.k0 = check_branch(m.h1_sq - m.quartic, r.gap, m.h1_sq, scale);
    r.k2 = check_branch(m.gradient_sq - 0.25 * d * m.quartic, r.gap, m.h1_sq, scale);
    r.status = (r.k0.holds && r.k2.holds) ? InequalityStatus::holds : InequalityStatus::violated;
    return r;
}

const char* to_string(InequalityStatus status) noexcept {
    switch (status) {
    case InequalityStatus::holds: return "holds";
    case InequalityStatus::violated: return "violated";
    case InequalityStatus::precondition_failed: return "precondition_failed";
    case InequalityStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

} // namespace kgsys
