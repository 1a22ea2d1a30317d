#include "kgsys/lorentz.hpp"

#include "kgsys/report_format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kgsys {

SpacetimeBlock SpacetimeBlock::from_trajectory(const Trajectory& traj, double t_a, double t_b) {
    SpacetimeBlock b{traj.grid, traj.params, 0.0, 0.0, {}};
    std::vector<double> ts;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const double t = traj.snapshot_times[i];
        if (t < t_a - 1e-12 || t > t_b + 1e-12) continue;
        ts.push_back(t);
        b.slices.push_back(traj.snapshots[i]);
    }
    if (ts.size() < 6) throw std::invalid_argument("a space-time block needs at least 6 snapshots");
    b.t_start = ts.front();
    b.stride = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (std::abs(ts[i] - (b.t_start + b.stride * static_cast<double>(i))) > 1e-9 * std::max(1.0, ts.back()))
            throw std::invalid_argument("snapshots are not uniformly spaced near t = " + format_number(ts[i]));
    return b;
}

SpacetimeBlock SpacetimeBlock::record(const PhasePoint& initial, const NonlinearityParams& params, double duration,
                                      double stride, int substeps) {
    if (!(stride > 0.0) || substeps < 1) throw std::invalid_argument("record needs stride > 0 and substeps >= 1");
    StepPolicy policy;
    policy.dt_base = stride / substeps;
    policy.dt_min = std::min(policy.dt_min, policy.dt_base);
    policy.amplitude_guard = 1e300;
    policy.growth_onset = 1e300;
    policy.snapshot_stride = substeps;
    const auto traj = evolve(initial, duration, policy, params);
    if (traj.status != RunStatus::completed)
        throw std::runtime_error(std::string("block integration stopped: ") + to_string(traj.status));
    return from_trajectory(traj, 0.0, duration);
}

namespace {

// Lagrange weights on 6 consecutive nodes starting at i0.
std::pair<int, std::array<double, 6>> time_stencil(const SpacetimeBlock& b, double t) {
    const int n = static_cast<int>(b.slices.size());
    const double s = (t - b.t_start) / b.stride;
    const int i0 = std::clamp(static_cast<int>(std::floor(s)) - 2, 0, n - 6);
    std::array<double, 6> w{};
    for (int a = 0; a < 6; ++a) {
        double p = 1.0;
        for (int c = 0; c < 6; ++c)
            if (c != a) p *= (s - (i0 + c)) / static_cast<double>(a - c);
        w[a] = p;
    }
    return {i0, w};
}

double field_sup(const PhasePoint& p) { return std::max(p.pair.u1.max_abs(), p.pair.u2.max_abs()); }

double block_sup(const SpacetimeBlock& b) {
    double m = 0.0;
    for (const auto& s : b.slices) m = std::max(m, field_sup(s));
    return m;
}

// Half-complex coefficients of every grid line along one axis.
struct LineSeries {
    int n = 0;
    std::size_t lines = 0;
    std::vector<Complex> coeff; // lines x (n/2 + 1), unnormalized

    LineSeries(const ScalarField& f, int axis, const SpectralGrid& line_grid) : n(f.grid().points()) {
        const auto& g = f.grid();
        lines = g.size() / n;
        const std::size_t m = n / 2 + 1;
        coeff.resize(lines * m);
        std::vector<double> buf(n);
        for (std::size_t l = 0; l < lines; ++l) {
            for (int k = 0; k < n; ++k) buf[k] = f[line_point(g, axis, l, k)];
            const auto c = line_grid.forward(buf);
            std::copy(c.begin(), c.end(), coeff.begin() + static_cast<std::ptrdiff_t>(l * m));
        }
    }

    // Flat index of sample k on line l, lines enumerated in row-major order of the remaining axes.
    static std::size_t line_point(const SpectralGrid& g, int axis, std::size_t line, int k) {
        const std::size_t n = g.points();
        std::size_t stride = 1;
        for (int a = g.dim() - 1; a > axis; --a) stride *= n;
        const std::size_t low = line % stride;
        const std::size_t high = line / stride;
        return (high * n + static_cast<std::size_t>(k)) * stride + low;
    }
};

// Values of four trigonometric interpolants at offset xi = y + L, plus the
// derivatives of the first two.
struct LineValues {
    std::array<double, 4> val{};
    std::array<double, 2> der{};
};

LineValues eval_lines(const std::array<const Complex*, 4>& c, int n, double kappa, double xi) {
    const int half = n / 2;
    LineValues out;
    for (int f = 0; f < 4; ++f) out.val[f] = c[f][0].real();
    const Complex step = std::polar(1.0, kappa * xi);
    Complex e = step;
    for (int k = 1; k < half; ++k) {
        for (int f = 0; f < 4; ++f) {
            const Complex z = c[f][k] * e;
            out.val[f] += 2.0 * z.real();
            if (f < 2) out.der[f] -= 2.0 * kappa * k * z.imag();
        }
        e *= step;
    }
    const double nyq = std::cos(kappa * half * xi);
    for (int f = 0; f < 4; ++f) out.val[f] = (out.val[f] + c[f][half].real() * nyq) / n;
    for (int f = 0; f < 2; ++f) out.der[f] /= n;
    return out;
}

} // namespace

double SpacetimeBlock::interpolation_error_estimate() const {
    const int n = static_cast<int>(slices.size());
    if (n < 13) throw std::invalid_argument("stride-halving estimate needs at least 13 slices");
    // Interpolate the odd slices from the even ones (stride doubled), then scale by 2^-6.
    double worst = 0.0;
    const int even = (n + 1) / 2;
    for (int q = 5; q + 6 < n; q += 2) {
        const double s = q / 2.0;
        const int i0 = std::clamp(static_cast<int>(std::floor(s)) - 2, 0, even - 6);
        std::array<double, 6> w{};
        for (int a = 0; a < 6; ++a) {
            double p = 1.0;
            for (int c = 0; c < 6; ++c)
                if (c != a) p *= (s - (i0 + c)) / static_cast<double>(a - c);
            w[a] = p;
        }
        const auto& target = slices[q];
        for (int comp = 0; comp < 2; ++comp) {
            const auto& tv = comp == 0 ? target.pair.u1 : target.pair.u2;
            for (std::size_t i = 0; i < tv.size(); ++i) {
                double v = 0.0;
                for (int a = 0; a < 6; ++a) {
                    const auto& src = slices[2 * (i0 + a)];
                    v += w[a] * (comp == 0 ? src.pair.u1[i] : src.pair.u2[i]);
                }
                worst = std::max(worst, std::abs(v - tv[i]));
            }
        }
    }
    const double scale = block_sup(*this);
    return scale > 0.0 ? worst / 64.0 / scale : 0.0;
}

double SpacetimeBlock::outer_amplitude(int axis, double radius) const {
    if (axis < 1 || axis > grid.dim()) throw std::invalid_argument("axis out of range");
    double outer = 0.0;
    for (const auto& s : slices)
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(grid.point(i)[axis - 1]) >= radius)
                outer = std::max({outer, std::abs(s.pair.u1[i]), std::abs(s.pair.u2[i])});
    const double scale = block_sup(*this);
    return scale > 0.0 ? outer / scale : 0.0;
}

void BoostParams::validate(int dim) const {
    if (!(std::abs(lambda) <= kMaxRapidity))
        throw std::invalid_argument("rapidity " + format_number(lambda) + " exceeds the cap " + format_number(kMaxRapidity));
    if (axis < 1 || axis > dim) throw std::invalid_argument("boost axis must be in 1.." + std::to_string(dim));
}

void require_interior(const SpacetimeBlock& block, int axis) {
    const double outer = block.outer_amplitude(axis, (1.0 - kOuterFraction) * block.grid.half_length());
    if (outer > kOuterAmplitude)
        throw std::domain_error("solution reaches the outer tenth of the box along axis " + std::to_string(axis) +
                                " (relative amplitude " + format_number(outer) + ")");
}

std::pair<double, double> required_slab(const SpectralGrid& grid, const BoostParams& b, double target) {
    const double c = std::cosh(b.lambda), s = std::sinh(b.lambda);
    const double L = grid.half_length();
    const double a = target * c - L * s;
    const double z = target * c + L * s;
    return {std::min(a, z), std::max(a, z)};
}

PhasePoint boost(const SpacetimeBlock& block, const BoostParams& params, double target) {
    const auto& g = block.grid;
    params.validate(g.dim());
    const auto [lo, hi] = required_slab(g, params, target);
    if (lo < block.t_start - 1e-12 || hi > block.t_end() + 1e-12)
        throw std::out_of_range("boost needs snapshots on [" + format_number(lo) + ", " + format_number(hi) +
                                "] but the block covers [" + format_number(block.t_start) + ", " +
                                format_number(block.t_end()) + "]");
    if (params.lambda == 0.0) {
        const auto [i0, w] = time_stencil(block, target);
        PhasePoint out = PhasePoint::zeros(g);
        for (int a = 0; a < 6; ++a) out.add_scaled(w[a], block.slices[i0 + a]);
        return out;
    }

    const int axis = params.axis - 1;
    const int n = g.points();
    const double L = g.half_length();
    const double kappa = std::numbers::pi / L;
    const double ch = std::cosh(params.lambda), sh = std::sinh(params.lambda);
    const SpectralGrid line(1, n, L);
    const std::size_t m = n / 2 + 1;

    struct PointPlan {
        int i0;
        std::array<double, 6> w;
        double xi;
        std::size_t line;
    };
    std::vector<PointPlan> plan(g.size());
    std::size_t lines = g.size() / n;
    for (std::size_t l = 0; l < lines; ++l)
        for (int k = 0; k < n; ++k) {
            const std::size_t p = LineSeries::line_point(g, axis, l, k);
            const double x = g.coordinate(k);
            const double y0 = target * ch + x * sh;
            const double y = target * sh + x * ch;
            auto [i0, w] = time_stencil(block, y0);
            plan[p] = {i0, w, y + L, l};
        }

    PhasePoint out = PhasePoint::zeros(g);
    const int first = std::min_element(plan.begin(), plan.end(), [](auto& a, auto& b) { return a.i0 < b.i0; })->i0;
    const int last = std::max_element(plan.begin(), plan.end(), [](auto& a, auto& b) { return a.i0 < b.i0; })->i0 + 5;
    for (int q = first; q <= last; ++q) {
        const auto& s = block.slices[q];
        const LineSeries u1(s.pair.u1, axis, line), u2(s.pair.u2, axis, line);
        const LineSeries v1(s.v1, axis, line), v2(s.v2, axis, line);
        for (std::size_t p = 0; p < plan.size(); ++p) {
            const auto& pp = plan[p];
            const int a = q - pp.i0;
            if (a < 0 || a > 5) continue;
            const double w = pp.w[a];
            const std::size_t off = pp.line * m;
            const auto r = eval_lines({&u1.coeff[off], &u2.coeff[off], &v1.coeff[off], &v2.coeff[off]}, n, kappa, pp.xi);
            out.pair.u1[p] += w * r.val[0];
            out.pair.u2[p] += w * r.val[1];
            out.v1[p] += w * (ch * r.val[2] + sh * r.der[0]);
            out.v2[p] += w * (ch * r.val[3] + sh * r.der[1]);
        }
    }
    return out;
}

SpacetimeBlock boost_block(const SpacetimeBlock& block, const BoostParams& params, double target_start,
                           double stride, int count) {
    if (count < 1) throw std::invalid_argument("boost_block needs count >= 1");
    require_interior(block, params.axis);
    SpacetimeBlock out{block.grid, block.params, target_start, stride, {}};
    for (int k = 0; k < count; ++k) out.slices.push_back(boost(block, params, target_start + stride * k));
    return out;
}

RotationReport energy_momentum_rotation_check(const SpacetimeBlock& block, int axis,
                                              const std::vector<double>& lambdas, double target) {
    require_interior(block, axis);
    RotationReport rep;
    rep.axis = axis;
    rep.target_time = target;
    const auto base = boost(block, {0.0, axis}, target);
    rep.E = energy(base, block.params);
    rep.P = momentum(base)[axis - 1];
    for (double l : lambdas) {
        RotationRow row;
        row.lambda = l;
        if (l == 0.0) {
            row.E_boosted = row.E_predicted = rep.E;
            row.P_boosted = row.P_predicted = rep.P;
        } else {
            const auto b = boost(block, {l, axis}, target);
            row.E_boosted = energy(b, block.params);
            row.P_boosted = momentum(b)[axis - 1];
            row.E_predicted = rep.E * std::cosh(l) + rep.P * std::sinh(l);
            row.P_predicted = rep.E * std::sinh(l) + rep.P * std::cosh(l);
            const double scale = std::abs(rep.E) > 0.0 ? std::abs(rep.E) : 1.0;
            row.rel_err = std::max(std::abs(row.E_boosted - row.E_predicted), std::abs(row.P_boosted - row.P_predicted)) / scale;
        }
        rep.max_rel_err = std::max(rep.max_rel_err, row.rel_err);
        rep.rows.push_back(row);
    }
    return rep;
}

DerivativeCheck boost_derivative_check(const SpacetimeBlock& block, int axis, double target, double h) {
    require_interior(block, axis);
    DerivativeCheck d;
    const auto base = boost(block, {0.0, axis}, target);
    d.E = energy(base, block.params);
    d.P = momentum(base)[axis - 1];
    const auto plus = boost(block, {h, axis}, target);
    const auto minus = boost(block, {-h, axis}, target);
    d.dE_dlambda = (energy(plus, block.params) - energy(minus, block.params)) / (2.0 * h);
    d.dP_dlambda = (momentum(plus)[axis - 1] - momentum(minus)[axis - 1]) / (2.0 * h);
    const double pscale = std::max(std::abs(d.P), 1e-2 * std::abs(d.E));
    d.dep_rel_err = pscale > 0.0 ? std::abs(d.dE_dlambda - d.P) / pscale : 0.0;
    d.dpe_rel_err = d.E != 0.0 ? std::abs(d.dP_dlambda - d.E) / std::abs(d.E) : 0.0;
    return d;
}

double boosted_residual(const SpacetimeBlock& block, const BoostParams& params, double target, double h) {
    const auto mid = boost(block, params, target);
    std::array<PhasePoint, 4> around{boost(block, params, target - 2 * h), boost(block, params, target - h),
                                     boost(block, params, target + h), boost(block, params, target + 2 * h)};
    const auto forcing = nonlinear_kick(PhasePoint::at_rest(mid.pair), 1.0, block.params);
    double worst = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        auto pick_v = [&](const PhasePoint& p) -> const ScalarField& { return comp == 0 ? p.v1 : p.v2; };
        const auto& u = comp == 0 ? mid.pair.u1 : mid.pair.u2;
        const auto lap = laplacian(u);
        const auto& nl = comp == 0 ? forcing.v1 : forcing.v2;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double utt = (pick_v(around[0])[i] - 8.0 * pick_v(around[1])[i] + 8.0 * pick_v(around[2])[i] -
                                pick_v(around[3])[i]) / (12.0 * h);
            worst = std::max(worst, std::abs(utt - lap[i] + u[i] - nl[i]));
        }
    }
    const double scale = field_sup(mid);
    return scale > 0.0 ? worst / scale : worst;
}

void write_rotation_csv(std::ostream& os, const RotationReport& r, const std::string& comment) {
    CsvWriter csv(os, {"lambda", "E_boosted", "P_boosted", "E_predicted", "P_predicted", "rel_err"}, comment);
    for (const auto& row : r.rows) {
        csv << row.lambda << row.E_boosted << row.P_boosted << row.E_predicted << row.P_predicted << row.rel_err;
        csv.end_row();
    }
}

} // namespace kgsys
