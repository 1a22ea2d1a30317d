#include "kgsys/groundstate.hpp"

#include "kgsys/bumps.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace kgsys {

namespace {

constexpr double pi = std::numbers::pi;

double sphere_area(int dim) {
    switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    default: return 4.0 * pi;
    }
}

// r^{-nu} K_nu(r) with nu = |d - 2| / 2: the decaying radial solution of the
// linearized equation.
double linear_tail(int dim, double r) {
    const double nu = std::abs(dim - 2) * 0.5;
    return std::pow(r, -(dim - 2) * 0.5) * std::cyl_bessel_k(nu, r);
}

double linear_tail_derivative(int dim, double r) {
    // (r^{-nu} K_nu)' = -r^{-nu} K_{nu+1} for the index nu = (d-2)/2;
    // K_{-nu} = K_nu covers d = 1.
    const double nu = (dim - 2) * 0.5;
    return -std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu + 1.0), r);
}

enum class Shot { undershoot = -1, reached_end = 0, overshoot = 1 };

struct ShotTrace {
    Shot outcome = Shot::reached_end;
    std::vector<double> s, p; // filled up to the event
};

ShotTrace shoot(double s0, int dim, double h, int nodes, bool keep) {
    ShotTrace tr;
    // Taylor series S0 + a r^2 + b r^4 + c r^6 near the regular singular point.
    const double f0 = s0 - s0 * s0 * s0;
    const double f1 = 1.0 - 3.0 * s0 * s0;
    const double f2 = -6.0 * s0;
    const double a = f0 / (2.0 * dim);
    const double b = f1 * a / (8.0 + 4.0 * dim);
    const double c = (f1 * b + 0.5 * f2 * a * a) / (24.0 + 6.0 * dim);
    const double r_series = 0.02;

    int i = 0;
    double s = s0, p = 0.0;
    for (; i <= nodes && i * h <= r_series; ++i) {
        const double r = i * h, r2 = r * r;
        s = s0 + r2 * (a + r2 * (b + r2 * c));
        p = r * (2.0 * a + r2 * (4.0 * b + 6.0 * c * r2));
        if (keep) {
            tr.s.push_back(s);
            tr.p.push_back(p);
        }
    }
    auto rhs = [dim](double r, double s, double p) {
        return std::pair{p, -(dim - 1) / r * p + s - s * s * s};
    };
    for (--i; i < nodes; ++i) {
        const double r0 = i * h;
        // Substeps keep h_sub <= r / 40 while the 1/r coefficient is stiff.
        const int m = std::max(1, static_cast<int>(std::ceil(40.0 * h / r0)));
        const double k = h / m;
        for (int j = 0; j < m; ++j) {
            const double r = r0 + j * k;
            const auto [k1s, k1p] = rhs(r, s, p);
            const auto [k2s, k2p] = rhs(r + 0.5 * k, s + 0.5 * k * k1s, p + 0.5 * k * k1p);
            const auto [k3s, k3p] = rhs(r + 0.5 * k, s + 0.5 * k * k2s, p + 0.5 * k * k2p);
            const auto [k4s, k4p] = rhs(r + k, s + k * k3s, p + k * k3p);
            s += k / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s);
            p += k / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        }
        if (s < 0.0) {
            tr.outcome = Shot::overshoot;
            return tr;
        }
        if (p > 0.0) {
            tr.outcome = Shot::undershoot;
            return tr;
        }
        if (keep) {
            tr.s.push_back(s);
            tr.p.push_back(p);
        }
    }
    return tr;
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() - 1; // intervals, even by construction
    double s = f.front() + f.back();
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

} // namespace

double RadialProfile::operator()(double r) const {
    r = std::abs(r);
    if (r >= match_radius) return tail_amplitude * linear_tail(dim, r);
    const int i = std::min(static_cast<int>(r / spacing), nodes - 1);
    const double t = (r - i * spacing) / spacing;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * values[i] + h10 * spacing * derivatives[i] + h01 * values[i + 1] +
           h11 * spacing * derivatives[i + 1];
}

double RadialProfile::derivative(double r) const {
    const double sign = r < 0 ? -1.0 : 1.0;
    r = std::abs(r);
    if (r >= match_radius) return sign * tail_amplitude * linear_tail_derivative(dim, r);
    const int i = std::min(static_cast<int>(r / spacing), nodes - 1);
    const double t = (r - i * spacing) / spacing;
    const double d00 = 6 * t * t - 6 * t;
    const double d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t;
    const double d11 = 3 * t * t - 2 * t;
    return sign * ((d00 * values[i] + d01 * values[i + 1]) / spacing + d10 * derivatives[i] +
                   d11 * derivatives[i + 1]);
}

double RadialProfile::h1_norm_sq() const {
    std::vector<double> f(values.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = i * spacing;
        f[i] = (derivatives[i] * derivatives[i] + values[i] * values[i]) * std::pow(r, dim - 1);
    }
    return sphere_area(dim) * simpson(f, spacing);
}

double RadialProfile::quartic() const {
    std::vector<double> f(values.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s2 = values[i] * values[i];
        f[i] = s2 * s2 * std::pow(i * spacing, dim - 1);
    }
    return sphere_area(dim) * simpson(f, spacing);
}

RadialProfile scalar_ground_state(double r_max, int nodes, double tol, int dim) {
    if (r_max < 15.0) throw std::invalid_argument("scalar_ground_state needs r_max >= 15");
    if (nodes < 2000) throw std::invalid_argument("scalar_ground_state needs nodes >= 2000");
    if (dim < 1 || dim > 3) throw std::invalid_argument("scalar_ground_state: dim must be 1, 2 or 3");
    if (nodes % 2) ++nodes;
    const double h = r_max / nodes;

    const double scan_lo = 1.05, scan_hi = 8.0, scan_step = 0.05;
    double lo = 0.0, hi = 0.0;
    Shot prev = shoot(scan_lo, dim, h, nodes, false).outcome;
    for (double s0 = scan_lo + scan_step; s0 <= scan_hi + 1e-12; s0 += scan_step) {
        const Shot cur = shoot(s0, dim, h, nodes, false).outcome;
        if (prev == Shot::undershoot && cur == Shot::overshoot) {
            lo = s0 - scan_step;
            hi = s0;
            break;
        }
        prev = cur;
    }
    if (hi == 0.0) {
        std::ostringstream msg;
        msg << "shooting bracket not found scanning S(0) in [" << scan_lo << ", " << scan_hi << "]";
        throw std::runtime_error(msg.str());
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Shot o = shoot(mid, dim, h, nodes, false).outcome;
        if (o == Shot::overshoot)
            hi = mid;
        else
            lo = mid;
    }

    const auto a = shoot(lo, dim, h, nodes, true);
    const auto b = shoot(hi, dim, h, nodes, true);
    const std::size_t valid = std::min(a.s.size(), b.s.size());

    RadialProfile prof;
    prof.dim = dim;
    prof.r_max = r_max;
    prof.nodes = nodes;
    prof.spacing = h;
    prof.center_value = 0.5 * (lo + hi);
    prof.bracket_lo = lo;
    prof.bracket_hi = hi;

    // Trust the shot while the two bracketing trajectories agree.
    std::size_t match = 1;
    for (std::size_t i = 1; i < valid; ++i) {
        const double avg = 0.5 * (a.s[i] + b.s[i]);
        if (std::abs(a.s[i] - b.s[i]) > 1e-7 * avg) break;
        match = i;
    }
    match = std::min<std::size_t>(match, static_cast<std::size_t>(nodes));
    prof.match_radius = match * h;
    const double s_match = 0.5 * (a.s[match] + b.s[match]);
    prof.tail_amplitude = s_match / linear_tail(dim, prof.match_radius);

    prof.values.resize(nodes + 1);
    prof.derivatives.resize(nodes + 1);
    for (std::size_t i = 0; i <= static_cast<std::size_t>(nodes); ++i) {
        if (i <= match) {
            prof.values[i] = 0.5 * (a.s[i] + b.s[i]);
            prof.derivatives[i] = 0.5 * (a.p[i] + b.p[i]);
        } else {
            const double r = i * h;
            prof.values[i] = prof.tail_amplitude * linear_tail(dim, r);
            prof.derivatives[i] = prof.tail_amplitude * linear_tail_derivative(dim, r);
        }
    }

    // Decay rate from log(r^{(d-1)/2} S) over the last six units before the match.
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::size_t i = 1; i <= match; ++i) {
            const double r = i * h;
            if (r < prof.match_radius - 6.0) continue;
            const double y = std::log(prof.values[i] * std::pow(r, 0.5 * (dim - 1)));
            sx += r;
            sy += y;
            sxx += r * r;
            sxy += r * y;
            ++n;
        }
        prof.decay_rate = n > 2 ? -(n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    }

    // Sixth-order differences of S' (odd in r) checked against the ODE.
    double worst = 0.0;
    const auto& dp = prof.derivatives;
    auto pm = [&](int j) { return j < 0 ? -dp[-j] : dp[j]; };
    for (int i = 1; i + 3 <= nodes; ++i) {
        const double r = i * h;
        const double spp = (pm(i + 3) - 9 * pm(i + 2) + 45 * pm(i + 1) - 45 * pm(i - 1) + 9 * pm(i - 2) -
                            pm(i - 3)) / (60 * h);
        const double s = prof.values[i];
        worst = std::max(worst, std::abs(spp + (dim - 1) / r * dp[i] - s + s * s * s));
    }
    prof.ode_residual = worst;
    if (worst > tol) {
        std::ostringstream msg;
        msg << "shooting ODE residual " << worst << " exceeds tolerance " << tol;
        throw std::runtime_error(msg.str());
    }
    return prof;
}

namespace {

const RadialProfile& cached_profile(int dim) {
    static std::mutex m;
    static std::map<int, RadialProfile> cache;
    std::lock_guard lock(m);
    auto it = cache.find(dim);
    if (it == cache.end()) it = cache.emplace(dim, scalar_ground_state(24.0, 6000, 1e-6, dim)).first;
    return it->second;
}

} // namespace

double scalar_level(int dim) {
    if (dim == 1) return 4.0 / 3.0;
    return cached_profile(dim).action();
}

double scalar_profile(int dim, double r) {
    if (dim == 1) return std::sqrt(2.0) / std::cosh(r);
    return cached_profile(dim)(r);
}

CandidateLevels candidate_levels(const NonlinearityParams& params, int dim) {
    params.require_focusing();
    const double js = scalar_level(dim);
    CandidateLevels c;
    c.semitrivial = js / std::max(params.mu1, params.mu2);
    double a = 0.0, g = 0.0;
    if (params.mu1 == params.mu2) {
        a = g = 1.0 / (params.mu1 + params.beta);
    } else {
        const double det = params.mu1 * params.mu2 - params.beta * params.beta;
        if (std::abs(det) > 1e-14) {
            a = (params.mu2 - params.beta) / det;
            g = (params.mu1 - params.beta) / det;
        }
    }
    if (a > 0.0 && g > 0.0) {
        c.alpha_sq = a;
        c.gamma_sq = g;
        c.synchronized = (a + g) * js;
    }
    return c;
}

FieldPair candidate_pair(const NonlinearityParams& params, const SpectralGrid& grid, CandidateKind kind) {
    const int dim = grid.dim();
    const auto lv = candidate_levels(params, dim);
    double c1 = 0.0, c2 = 0.0;
    switch (kind) {
    case CandidateKind::first_component: c1 = 1.0 / std::sqrt(params.mu1); break;
    case CandidateKind::second_component: c2 = 1.0 / std::sqrt(params.mu2); break;
    case CandidateKind::synchronized:
        if (!lv.synchronized) throw std::invalid_argument("no synchronized candidate for these parameters");
        c1 = std::sqrt(lv.alpha_sq);
        c2 = std::sqrt(lv.gamma_sq);
        break;
    }
    auto radial = [&](double c) {
        return ScalarField::from_function(grid, [&](const std::array<double, 3>& x) {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
            return c == 0.0 ? 0.0 : c * scalar_profile(dim, std::sqrt(r2));
        });
    };
    return {radial(c1), radial(c2)};
}

const char* to_string(GroundStateKind k) noexcept {
    switch (k) {
    case GroundStateKind::semitrivial: return "semitrivial";
    case GroundStateKind::symmetric: return "symmetric";
    case GroundStateKind::coupled_asymmetric: return "coupled-asymmetric";
    }
    return "unknown";
}

GroundStateKind classify_components(double n1, double n2) noexcept {
    const double hi = std::max(n1, n2);
    const double lo = std::min(n1, n2);
    if (lo < 1e-3 * hi) return GroundStateKind::semitrivial;
    if (hi - lo <= 1e-3 * hi) return GroundStateKind::symmetric;
    return GroundStateKind::coupled_asymmetric;
}

namespace {

// (1 - Lap)^{-1} f
ScalarField resolvent(const ScalarField& f) { return apply_bessel(f, -2.0); }

void nonlinearity(const FieldPair& u, const NonlinearityParams& p, ScalarField& n1, ScalarField& n2) {
    const auto a = u.u1.values();
    const auto b = u.u2.values();
    auto x = n1.values();
    auto y = n2.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double a2 = a[i] * a[i], b2 = b[i] * b[i];
        x[i] = (p.mu1 * a2 + p.beta * b2) * a[i];
        y[i] = (p.mu2 * b2 + p.beta * a2) * b[i];
    }
}

double sup_norm(const FieldPair& p) { return std::max(p.u1.max_abs(), p.u2.max_abs()); }

// Scales onto K0 = 0; false when the quartic integral vanishes.
bool project_nehari(FieldPair& u, const NonlinearityParams& params) {
    const auto m = measure_pair(u, params);
    if (!(m.quartic > 0.0) || !(m.h1_sq > 0.0)) return false;
    const double s = std::sqrt(m.h1_sq / m.quartic);
    u.u1 *= s;
    u.u2 *= s;
    return true;
}

GroundState finish(FieldPair u, const NonlinearityParams& params, bool converged, int iterations) {
    GroundState gs{std::move(u), 0.0, params, 0.0, 0.0, GroundStateKind::semitrivial, converged, iterations};
    const auto m = measure_pair(gs.pair, params);
    gs.level = 0.5 * m.h1_sq - 0.25 * m.quartic;
    gs.k0_relative = m.h1_sq > 0.0 ? std::abs(m.h1_sq - m.quartic) / m.h1_sq : 0.0;
    gs.el_residual = sup_norm(euler_lagrange_defect(gs.pair, params));
    const auto& g = gs.pair.grid();
    gs.kind = classify_components(std::sqrt(h1_norm_sq(to_spectrum(gs.pair.u1), g)),
                                  std::sqrt(h1_norm_sq(to_spectrum(gs.pair.u2), g)));
    return gs;
}

GroundState run_flow(FieldPair u, const NonlinearityParams& params, const SolverOptions& opt) {
    const auto& g = u.grid();
    if (!project_nehari(u, params)) return finish(std::move(u), params, false, 0);
    ScalarField n1(g), n2(g);
    const double tau = opt.step;
    int it = 0;
    bool converged = false;
    for (; it < opt.max_iterations; ++it) {
        if (it % 10 == 0 && sup_norm(euler_lagrange_defect(u, params)) <= opt.tol) {
            converged = true;
            break;
        }
        nonlinearity(u, params, n1, n2);
        u.u1 *= 1.0 - tau;
        u.u1.add_scaled(tau, resolvent(n1));
        u.u2 *= 1.0 - tau;
        u.u2.add_scaled(tau, resolvent(n2));
        if (!project_nehari(u, params) || !u.is_finite()) break;
    }
    return finish(std::move(u), params, converged, it);
}

bool better(const GroundState& a, const GroundState& b) {
    if (a.converged != b.converged) return a.converged;
    return a.level < b.level;
}

} // namespace

double projected_level(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    if (!(m.quartic > 0.0)) throw std::domain_error("projected_level: quartic integral must be positive");
    return m.h1_sq * m.h1_sq / (4.0 * m.quartic);
}

FieldPair projected_level_gradient(const FieldPair& pair, const NonlinearityParams& params) {
    const auto m = measure_pair(pair, params);
    if (!(m.quartic > 0.0)) throw std::domain_error("projected_level_gradient: quartic integral must be positive");
    const auto& g = pair.grid();
    ScalarField n1(g), n2(g);
    nonlinearity(pair, params, n1, n2);
    const double ca = m.h1_sq / m.quartic;
    const double cb = ca * ca;
    FieldPair out{ca * pair.u1, ca * pair.u2};
    out.u1.add_scaled(-cb, resolvent(n1));
    out.u2.add_scaled(-cb, resolvent(n2));
    return out;
}

FieldPair euler_lagrange_defect(const FieldPair& pair, const NonlinearityParams& params) {
    const auto& g = pair.grid();
    ScalarField n1(g), n2(g);
    nonlinearity(pair, params, n1, n2);
    FieldPair out{apply_bessel(pair.u1, 2.0), apply_bessel(pair.u2, 2.0)};
    out.u1 -= n1;
    out.u2 -= n2;
    return out;
}

GroundState solve_ground_state(const NonlinearityParams& params, const SpectralGrid& grid,
                               const SolverOptions& options) {
    params.require_focusing();
    if (grid.half_length() < 8.0) throw std::invalid_argument("ground-state grid needs box_half_length >= 8");

    std::vector<FieldPair> seeds;
    const auto lv = candidate_levels(params, grid.dim());
    seeds.push_back(candidate_pair(params, grid,
                                   params.mu1 >= params.mu2 ? CandidateKind::first_component
                                                            : CandidateKind::second_component));
    if (lv.synchronized) seeds.push_back(candidate_pair(params, grid, CandidateKind::synchronized));

    std::mt19937_64 rng(options.seed);
    BumpOptions bo;
    bo.min_bumps = bo.max_bumps = 1;
    bo.center_radius = 1.0;
    bo.width_min = 0.7;
    bo.width_max = 1.5;
    bo.amplitude_min = 0.5;
    bo.amplitude_max = 2.0;
    bo.empty_component_probability = 0.0;
    for (int i = 0; i < options.random_seeds; ++i) seeds.push_back(random_bump_pair(rng, grid.dim(), bo).sample(grid));

    std::optional<GroundState> best;
    for (auto& s : seeds) {
        auto gs = run_flow(std::move(s), params, options);
        if (!best || better(gs, *best)) best = std::move(gs);
    }
    return std::move(*best);
}

// ---------------------------------------------------------------------------
// Radial reduction, d = 3: w = r u on [-R, R), odd.

namespace {

struct RadialOps {
    SpectralGrid line;
    std::vector<double> inv_r2; // 1/r^2, 0 at the origin
    std::size_t center;

    explicit RadialOps(SpectralGrid g) : line(std::move(g)), inv_r2(line.size()), center(line.size() / 2) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const double r = line.coordinate(static_cast<int>(i));
            inv_r2[i] = i == center ? 0.0 : 1.0 / (r * r);
        }
    }

    double h1(const ScalarField& w) const { return 2.0 * pi * h1_norm_sq(to_spectrum(w), line); }

    double quartic(const ScalarField& w1, const ScalarField& w2, const NonlinearityParams& p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const double a2 = w1[i] * w1[i], b2 = w2[i] * w2[i];
            s += (p.mu1 * a2 * a2 + p.mu2 * b2 * b2 + 2.0 * p.beta * a2 * b2) * inv_r2[i];
        }
        return 2.0 * pi * s * line.spacing();
    }

    // N_i(w) / r^2 in the w variables.
    void forcing(const ScalarField& w1, const ScalarField& w2, const NonlinearityParams& p, ScalarField& f1,
                 ScalarField& f2) const {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const double a = w1[i], b = w2[i];
            f1[i] = (p.mu1 * a * a + p.beta * b * b) * a * inv_r2[i];
            f2[i] = (p.mu2 * b * b + p.beta * a * a) * b * inv_r2[i];
        }
    }

    // Rounding seeds even parts that the iteration amplifies; keep w odd.
    void make_odd(ScalarField& w) const {
        w[0] = 0.0;
        w[center] = 0.0;
        for (std::size_t j = 1; j < center; ++j) {
            const double odd = 0.5 * (w[center + j] - w[center - j]);
            w[center + j] = odd;
            w[center - j] = -odd;
        }
    }

    bool project(ScalarField& w1, ScalarField& w2, const NonlinearityParams& p) const {
        make_odd(w1);
        make_odd(w2);
        const double a = h1(w1) + h1(w2);
        const double b = quartic(w1, w2, p);
        if (!(a > 0.0) || !(b > 0.0)) return false;
        const double s = std::sqrt(a / b);
        w1 *= s;
        w2 *= s;
        return true;
    }

    // Sup norm of the Euler-Lagrange defect in the u variables; also returns u on r >= 0.
    double residual(const ScalarField& w1, const ScalarField& w2, const NonlinearityParams& p,
                    std::vector<double>* u1 = nullptr, std::vector<double>* u2 = nullptr) const {
        ScalarField f1(line), f2(line);
        forcing(w1, w2, p, f1, f2);
        double worst = 0.0;
        int comp = 0;
        for (auto [w, f, u] : {std::tuple{&w1, &f1, u1}, std::tuple{&w2, &f2, u2}}) {
            ++comp;
            ScalarField d = apply_bessel(*w, 2.0);
            d -= *f;
            const ScalarField dd = partial_derivative(d, 0);
            for (std::size_t i = 0; i < line.size(); ++i) {
                const double r = line.coordinate(static_cast<int>(i));
                const double res = i == center ? dd[i] : d[i] / r;
                worst = std::max(worst, std::abs(res));
            }
            if (u) {
                const ScalarField dw = partial_derivative(*w, 0);
                u->assign(line.size() - center, 0.0);
                for (std::size_t i = center; i < line.size(); ++i) {
                    const double r = line.coordinate(static_cast<int>(i));
                    (*u)[i - center] = i == center ? dw[i] : (*w)[i] / r;
                }
            }
        }
        return worst;
    }
};

ScalarField odd_profile(const SpectralGrid& line, const std::function<double(double)>& u) {
    return ScalarField::from_function(line, [&](const std::array<double, 3>& x) { return x[0] * u(std::abs(x[0])); });
}

RadialGroundState radial_flow(const RadialOps& ops, ScalarField w1, ScalarField w2, const NonlinearityParams& params,
                              const SolverOptions& opt) {
    RadialGroundState gs{ops.line, w1, w2, 0.0, params, 0.0, 0.0, GroundStateKind::semitrivial, false, 0, {}, {}};
    gs.params = params;
    const auto& g = ops.line;
    ScalarField f1(g), f2(g);
    bool ok = ops.project(w1, w2, params);
    int it = 0;
    bool converged = false;
    for (; ok && it < opt.max_iterations; ++it) {
        if (it % 10 == 0 && ops.residual(w1, w2, params) <= opt.tol) {
            converged = true;
            break;
        }
        ops.forcing(w1, w2, params, f1, f2);
        w1 *= 1.0 - opt.step;
        w1.add_scaled(opt.step, resolvent(f1));
        w2 *= 1.0 - opt.step;
        w2.add_scaled(opt.step, resolvent(f2));
        ok = ops.project(w1, w2, params) && w1.is_finite() && w2.is_finite();
    }
    gs.w1 = std::move(w1);
    gs.w2 = std::move(w2);
    gs.converged = converged;
    gs.iterations = it;
    const double n1 = ops.h1(gs.w1), n2 = ops.h1(gs.w2);
    const double a = n1 + n2;
    const double b = ops.quartic(gs.w1, gs.w2, params);
    gs.level = 0.5 * a - 0.25 * b;
    gs.k0_relative = a > 0.0 ? std::abs(a - b) / a : 0.0;
    gs.el_residual = ops.residual(gs.w1, gs.w2, params, &gs.u1_nodes, &gs.u2_nodes);
    gs.kind = classify_components(std::sqrt(n1), std::sqrt(n2));
    return gs;
}

} // namespace

double RadialGroundState::profile(int component, double r) const {
    const auto& u = component == 0 ? u1_nodes : u2_nodes;
    r = std::abs(r);
    const double h = line.spacing();
    const double x = r / h;
    const int n = static_cast<int>(u.size());
    if (x >= n - 1) return 0.0;
    // Six-point Lagrange stencil; u is even, so mirror across the origin.
    const int i0 = static_cast<int>(std::floor(x)) - 2;
    auto node = [&](int i) {
        i = std::abs(i);
        return i < n ? u[i] : 0.0;
    };
    double s = 0.0;
    for (int j = 0; j < 6; ++j) {
        double l = 1.0;
        for (int k = 0; k < 6; ++k)
            if (k != j) l *= (x - (i0 + k)) / static_cast<double>(j - k);
        s += l * node(i0 + j);
    }
    return s;
}

FieldPair RadialGroundState::sample(const SpectralGrid& grid) const {
    auto make = [&](int c) {
        return ScalarField::from_function(grid, [&](const std::array<double, 3>& x) {
            double r2 = 0.0;
            for (int a = 0; a < grid.dim(); ++a) r2 += x[a] * x[a];
            return profile(c, std::sqrt(r2));
        });
    };
    return {make(0), make(1)};
}

double RadialGroundState::h1_norm_sq() const {
    return 2.0 * pi * (kgsys::h1_norm_sq(to_spectrum(w1), line) + kgsys::h1_norm_sq(to_spectrum(w2), line));
}

RadialGroundState solve_radial_ground_state(const NonlinearityParams& params, int points, double half_length,
                                            const SolverOptions& options) {
    params.require_focusing();
    if (half_length < 12.0) throw std::invalid_argument("radial ground-state grid needs half length >= 12");
    const RadialOps ops(SpectralGrid(1, points, half_length));
    const auto& line = ops.line;
    const auto lv = candidate_levels(params, 3);

    std::vector<std::pair<ScalarField, ScalarField>> seeds;
    const ScalarField s = odd_profile(line, [](double r) { return scalar_profile(3, r); });
    const ScalarField zero(line);
    if (params.mu1 >= params.mu2)
        seeds.emplace_back((1.0 / std::sqrt(params.mu1)) * s, zero);
    else
        seeds.emplace_back(zero, (1.0 / std::sqrt(params.mu2)) * s);
    if (lv.synchronized) seeds.emplace_back(std::sqrt(lv.alpha_sq) * s, std::sqrt(lv.gamma_sq) * s);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> width(0.7, 1.5), amp(0.5, 2.0);
    for (int i = 0; i < options.random_seeds; ++i) {
        auto gauss = [&] {
            const double w = width(rng), a = amp(rng);
            return odd_profile(line, [=](double r) { return a * std::exp(-0.5 * r * r / (w * w)); });
        };
        auto a = gauss();
        auto b = gauss();
        seeds.emplace_back(std::move(a), std::move(b));
    }

    std::optional<RadialGroundState> best;
    for (auto& [a, b] : seeds) {
        auto gs = radial_flow(ops, std::move(a), std::move(b), params, options);
        const bool take = !best || (gs.converged != best->converged ? gs.converged : gs.level < best->level);
        if (take) best = std::move(gs);
    }
    return std::move(*best);
}

// ---------------------------------------------------------------------------
// h0 cache

namespace {

using CacheKey = std::tuple<int, double, double, double>;

struct LevelCache {
    std::shared_mutex mutex;
    std::map<CacheKey, double> levels;
};

LevelCache& level_cache() {
    static LevelCache c;
    return c;
}

double compute_h0(const NonlinearityParams& params, int dim) {
    const double cand = candidate_levels(params, dim).best();
    double solved = cand;
    if (dim == 3) {
        solved = solve_radial_ground_state(params).level;
    } else if (dim == 2) {
        solved = solve_ground_state(params, SpectralGrid(2, 128, 16.0)).level;
    } else {
        solved = solve_ground_state(params, SpectralGrid(1, 1024, 32.0)).level;
    }
    return std::min(cand, solved);
}

} // namespace

double h0(const NonlinearityParams& params, int dim) {
    params.require_focusing();
    if (dim < 1 || dim > 3) throw std::invalid_argument("h0: dim must be 1, 2 or 3");
    auto& c = level_cache();
    const CacheKey key{dim, params.beta, params.mu1, params.mu2};
    {
        std::shared_lock lock(c.mutex);
        if (auto it = c.levels.find(key); it != c.levels.end()) return it->second;
    }
    const double level = compute_h0(params, dim);
    std::unique_lock lock(c.mutex);
    return c.levels.emplace(key, level).first->second;
}

void clear_h0_cache() {
    auto& c = level_cache();
    std::unique_lock lock(c.mutex);
    c.levels.clear();
}

bool load_h0_cache(const std::filesystem::path& path) {
    std::map<CacheKey, double> loaded;
    try {
        std::ifstream is(path);
        if (!is) return false;
        const auto j = nlohmann::json::parse(is);
        for (const auto& e : j.at("levels")) {
            const double level = e.at("h0").get<double>();
            if (!std::isfinite(level) || level <= 0.0) return false;
            loaded[{e.at("dim").get<int>(), e.at("beta").get<double>(), e.at("mu1").get<double>(),
                    e.at("mu2").get<double>()}] = level;
        }
    } catch (const std::exception&) {
        return false;
    }
    auto& c = level_cache();
    std::unique_lock lock(c.mutex);
    c.levels = std::move(loaded);
    return true;
}

void save_h0_cache(const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["levels"] = nlohmann::json::array();
    {
        auto& c = level_cache();
        std::shared_lock lock(c.mutex);
        for (const auto& [k, v] : c.levels) {
            nlohmann::ordered_json e;
            e["dim"] = std::get<0>(k);
            e["beta"] = std::get<1>(k);
            e["mu1"] = std::get<2>(k);
            e["mu2"] = std::get<3>(k);
            e["h0"] = v;
            j["levels"].push_back(e);
        }
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << std::setprecision(17) << j.dump(2) << '\n';
}

std::string ground_state_table_json(const std::vector<GroundStateRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json e;
        e["beta"] = r.params.beta;
        e["mu1"] = r.params.mu1;
        e["mu2"] = r.params.mu2;
        e["level"] = r.level;
        e["kind"] = to_string(r.kind);
        e["residual"] = r.residual;
        arr.push_back(e);
    }
    return arr.dump(2);
}

} // namespace kgsys
