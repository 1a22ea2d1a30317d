#include "kgsys/propagator.hpp"

#include "kgsys/report_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace kgsys {

void StepPolicy::validate() const {
    if (!(dt_base > 0.0) || !(dt_min > 0.0) || dt_min > dt_base)
        throw std::invalid_argument("step policy needs 0 < dt_min <= dt_base");
    if (!(amplitude_guard > 0.0)) throw std::invalid_argument("amplitude_guard must be positive");
    if (!(growth_onset >= 1.0)) throw std::invalid_argument("growth_onset must be >= 1");
    if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
    if (!(escape_factor > 1.0)) throw std::invalid_argument("escape_factor must exceed 1");
}

const char* to_string(RunStatus s) noexcept {
    switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::completed: return "completed";
    case RunStatus::blowup_detected: return "blowup_detected";
    case RunStatus::resolution_exhausted: return "resolution_exhausted";
    }
    return "unknown";
}

double Trajectory::peak_phase_norm() const {
    return phase_norm.empty() ? 0.0 : *std::max_element(phase_norm.begin(), phase_norm.end());
}

SpectralPhase SpectralPhase::from(const PhasePoint& p) {
    return {p.grid(), to_spectrum(p.pair.u1), to_spectrum(p.pair.u2), to_spectrum(p.v1), to_spectrum(p.v2)};
}

PhasePoint SpectralPhase::to_phase() const {
    return {{from_spectrum(grid, u1), from_spectrum(grid, u2)}, from_spectrum(grid, v1), from_spectrum(grid, v2)};
}

void free_evolve_in_place(SpectralPhase& p, double t) {
    if (t == 0.0) return;
    const auto omega = p.grid.bessel_symbol();
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double w = omega[i];
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        for (auto [u, v] : {std::pair{&p.u1, &p.v1}, std::pair{&p.u2, &p.v2}}) {
            const Complex u0 = (*u)[i];
            const Complex v0 = (*v)[i];
            (*u)[i] = c * u0 + (s / w) * v0;
            (*v)[i] = -w * s * u0 + c * v0;
        }
    }
}

PhasePoint free_evolve(const PhasePoint& phase, double t) {
    if (t == 0.0) return phase;
    auto s = SpectralPhase::from(phase);
    free_evolve_in_place(s, t);
    return s.to_phase();
}

namespace {

void nonlinearity(const ScalarField& u1, const ScalarField& u2, const NonlinearityParams& p,
                  ScalarField& n1, ScalarField& n2) {
    const auto a = u1.values();
    const auto b = u2.values();
    auto x = n1.values();
    auto y = n2.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double a2 = a[i] * a[i];
        const double b2 = b[i] * b[i];
        x[i] = (p.mu1 * a2 + p.beta * b2) * a[i];
        y[i] = (p.mu2 * b2 + p.beta * a2) * b[i];
    }
}

// Dealiased spectra of N1(u), N2(u).
std::pair<Spectrum, Spectrum> nonlinearity_spectra(const ScalarField& u1, const ScalarField& u2,
                                                   const NonlinearityParams& p) {
    const auto& g = u1.grid();
    ScalarField n1(g), n2(g);
    nonlinearity(u1, u2, p, n1, n2);
    auto s1 = to_spectrum(n1);
    auto s2 = to_spectrum(n2);
    dealias_in_place(s1, g);
    dealias_in_place(s2, g);
    return {std::move(s1), std::move(s2)};
}

double l6_norm(std::span<const double> v, double cell) {
    double s = 0.0;
    for (double x : v) {
        const double x2 = x * x;
        s += x2 * x2 * x2;
    }
    return std::cbrt(std::sqrt(s * cell));
}

double pair_l6(const ScalarField& u1, const ScalarField& u2) {
    const double cell = u1.grid().cell_volume();
    const double a = l6_norm(u1.values(), cell);
    const double b = l6_norm(u2.values(), cell);
    return std::sqrt(a * a + b * b);
}

// Fraction of the H x H energy carried above the tail threshold.
double phase_tail_fraction(const SpectralPhase& s, double threshold) {
    const auto& g = s.grid;
    const auto w = g.mode_weight();
    const auto r = g.relative_mode_radius();
    const auto ksq = g.wavenumber_sq();
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double e = w[i] * ((1.0 + ksq[i]) * (std::norm(s.u1[i]) + std::norm(s.u2[i])) +
                                 std::norm(s.v1[i]) + std::norm(s.v2[i]));
        total += e;
        if (r[i] > threshold) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double spectral_phase_norm_sq(const SpectralPhase& s) {
    const auto& g = s.grid;
    return h1_norm_sq(s.u1, g) + h1_norm_sq(s.u2, g) + spectral_l2_norm_sq(g, s.v1) +
           spectral_l2_norm_sq(g, s.v2);
}

class Stepper {
public:
    Stepper(const PhasePoint& initial, const NonlinearityParams& params)
        : grid_(initial.grid()), params_(params), s_(SpectralPhase::from(initial)), u1_(grid_), u2_(grid_) {
        for (auto* spec : {&s_.u1, &s_.u2, &s_.v1, &s_.v2}) dealias_in_place(*spec, grid_);
        sync();
    }

    void step(double dt) {
        kick(0.5 * dt);
        drift(dt);
        sync();
        kick(0.5 * dt);
    }

    const ScalarField& u1() const { return u1_; }
    const ScalarField& u2() const { return u2_; }
    const SpectralPhase& spectra() const { return s_; }

    PhasePoint phase() const {
        return {{u1_, u2_}, from_spectrum(grid_, s_.v1), from_spectrum(grid_, s_.v2)};
    }

    FunctionalReport report() const {
        return functional_report(grid_, s_.u1, s_.u2, s_.v1, s_.v2, quartic_integral({u1_, u2_}, params_));
    }

private:
    void drift(double dt) {
        if (dt != cached_dt_) {
            const auto omega = grid_.bessel_symbol();
            cos_.resize(omega.size());
            sin_.resize(omega.size());
            for (std::size_t i = 0; i < omega.size(); ++i) {
                cos_[i] = std::cos(omega[i] * dt);
                sin_[i] = std::sin(omega[i] * dt);
            }
            cached_dt_ = dt;
        }
        const auto omega = grid_.bessel_symbol();
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const double w = omega[i], c = cos_[i], sn = sin_[i];
            for (auto [u, v] : {std::pair{&s_.u1, &s_.v1}, std::pair{&s_.u2, &s_.v2}}) {
                const Complex u0 = (*u)[i];
                const Complex v0 = (*v)[i];
                (*u)[i] = c * u0 + (sn / w) * v0;
                (*v)[i] = -w * sn * u0 + c * v0;
            }
        }
    }

    void sync() {
        u1_ = from_spectrum(grid_, s_.u1);
        u2_ = from_spectrum(grid_, s_.u2);
        forcing_valid_ = false;
    }

    // The closing half kick of one step and the opening half kick of the next
    // see the same u, so the forcing is computed once per step.
    void kick(double dt) {
        if (params_.is_linear()) return;
        if (!forcing_valid_) {
            forcing_ = nonlinearity_spectra(u1_, u2_, params_);
            forcing_valid_ = true;
        }
        const auto& [n1, n2] = forcing_;
        for (std::size_t i = 0; i < n1.size(); ++i) {
            s_.v1[i] += dt * n1[i];
            s_.v2[i] += dt * n2[i];
        }
    }

    SpectralGrid grid_;
    NonlinearityParams params_;
    SpectralPhase s_;
    ScalarField u1_, u2_;
    double cached_dt_ = 0.0;
    bool forcing_valid_ = false;
    std::pair<Spectrum, Spectrum> forcing_;
    std::vector<double> cos_, sin_;
};

} // namespace

PhasePoint nonlinear_kick(const PhasePoint& phase, double dt, const NonlinearityParams& params) {
    PhasePoint out = phase;
    if (dt == 0.0 || params.is_linear()) return out;
    const auto [n1, n2] = nonlinearity_spectra(phase.pair.u1, phase.pair.u2, params);
    out.v1.add_scaled(dt, from_spectrum(phase.grid(), n1));
    out.v2.add_scaled(dt, from_spectrum(phase.grid(), n2));
    return out;
}

PhasePoint time_reversed(const PhasePoint& phase) {
    PhasePoint out = phase;
    out.v1 *= -1.0;
    out.v2 *= -1.0;
    return out;
}

Trajectory evolve(const PhasePoint& initial, double T, const StepPolicy& policy,
                  const NonlinearityParams& params, const StepObserver& observer) {
    policy.validate();
    params.validate();
    if (!(T > 0.0)) throw std::invalid_argument("evolve needs T > 0");
    if (!initial.is_finite()) throw std::invalid_argument("initial datum is not finite");

    Trajectory traj(initial.grid(), params);
    Stepper st(initial, params);

    double t = 0.0;
    double running_integral = 0.0;
    double e0 = 0.0;
    double norm0 = 0.0;
    double prev_l6_cubed = 0.0;

    auto record = [&](bool first) {
        const auto rep = st.report();
        const double linf = std::max(st.u1().max_abs(), st.u2().max_abs());
        const double l6 = pair_l6(st.u1(), st.u2());
        const double norm = std::sqrt(spectral_phase_norm_sq(st.spectra()));
        const double l6c = l6 * l6 * l6;
        if (first) {
            e0 = rep.E;
            norm0 = norm;
        } else {
            running_integral += 0.5 * (traj.times.empty() ? 0.0 : t - traj.times.back()) * (prev_l6_cubed + l6c);
        }
        prev_l6_cubed = l6c;
        const double drift = std::abs(rep.E - e0) / (std::abs(e0) > 0.0 ? std::abs(e0) : 1.0);
        if (std::isfinite(drift)) traj.max_energy_drift = std::max(traj.max_energy_drift, drift);
        traj.times.push_back(t);
        traj.series.push_back(rep);
        traj.linf.push_back(linf);
        traj.l6.push_back(l6);
        traj.phase_norm.push_back(norm);
        traj.tail_fraction.push_back(phase_tail_fraction(st.spectra(), policy.tail_threshold));
        traj.strichartz_running.push_back(std::cbrt(running_integral));
    };
    auto snapshot = [&] {
        traj.snapshot_times.push_back(t);
        traj.snapshots.push_back(st.phase());
    };

    record(true);
    snapshot();

    long step_count = 0;
    const double eps = 1e-12 * std::max(1.0, T);
    while (t < T - eps) {
        const double linf = traj.linf.back();
        double dt = policy.dt_base;
        if (linf > 0.0) dt = std::min(dt, policy.amplitude_guard / (linf * linf));
        const double growth = norm0 > 0.0 ? traj.phase_norm.back() / norm0 : 1.0;
        if (growth > policy.growth_onset) {
            const double r = policy.growth_onset / growth;
            dt = std::min(dt, policy.dt_base * r * r);
        }
        if (dt < policy.dt_min) {
            traj.status = RunStatus::blowup_detected;
            break;
        }
        if (t + dt > T - eps) dt = T - t;
        st.step(dt);
        t = (T - t - dt <= eps) ? T : t + dt;
        ++step_count;
        record(false);

        const double norm = traj.phase_norm.back();
        const bool finite = std::isfinite(norm) && std::isfinite(traj.series.back().E);
        if (!finite || (norm0 > 0.0 && norm > policy.escape_factor * norm0)) {
            traj.status = RunStatus::blowup_detected;
            break;
        }
        if (traj.tail_fraction.back() > policy.tail_limit) {
            traj.status = RunStatus::resolution_exhausted;
            break;
        }
        if (observer) observer(t, st.phase());
        if (step_count % policy.snapshot_stride == 0) snapshot();
    }
    if (traj.status == RunStatus::running) traj.status = RunStatus::completed;
    traj.stop_time = t;
    if (traj.snapshot_times.back() != t) snapshot();
    return traj;
}

double duhamel_residual(const Trajectory& traj, const std::vector<double>& sample_times, double max_spacing) {
    const auto& ts = traj.snapshot_times;
    if (ts.size() < 3) throw std::invalid_argument("Duhamel residual needs at least 3 snapshots");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] - ts[i - 1] > max_spacing)
            throw std::invalid_argument("snapshot spacing " + format_number(ts[i] - ts[i - 1]) +
                                        " exceeds " + format_number(max_spacing) +
                                        "; store snapshots more densely");

    const auto& g = traj.grid;
    const auto omega = g.bessel_symbol();
    const std::size_t m = g.spectral_size();

    std::vector<std::pair<Spectrum, Spectrum>> forcing;
    forcing.reserve(ts.size());
    for (const auto& s : traj.snapshots) {
        if (traj.params.is_linear())
            forcing.emplace_back(Spectrum(m), Spectrum(m));
        else
            forcing.push_back(nonlinearity_spectra(s.pair.u1, s.pair.u2, traj.params));
    }
    const auto u0 = SpectralPhase::from(traj.snapshots.front());

    double worst = 0.0;
    for (double t : sample_times) {
        const auto it = std::find_if(ts.begin(), ts.end(), [&](double s) { return std::abs(s - t) <= 1e-9; });
        if (it == ts.end()) throw std::invalid_argument("sample time " + format_number(t) + " is not a snapshot time");
        const std::size_t last = static_cast<std::size_t>(it - ts.begin());

        std::vector<double> w(last + 1, 0.0);
        if (last == 1) {
            w[0] = w[1] = 0.5 * (ts[1] - ts[0]);
        } else if (last >= 2) {
            const std::size_t pairs_end = (last % 2 == 0) ? last : last - 1;
            for (std::size_t i = 0; i + 2 <= pairs_end; i += 2) {
                const double h0 = ts[i + 1] - ts[i];
                const double h1 = ts[i + 2] - ts[i + 1];
                const double c = (h0 + h1) / 6.0;
                w[i] += c * (2.0 - h1 / h0);
                w[i + 1] += c * (h0 + h1) * (h0 + h1) / (h0 * h1);
                w[i + 2] += c * (2.0 - h0 / h1);
            }
            if (pairs_end != last) {
                const double h0 = ts[last - 1] - ts[last - 2];
                const double h1 = ts[last] - ts[last - 1];
                w[last - 2] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
                w[last - 1] += h1 * (3.0 * h0 + h1) / (6.0 * h0);
                w[last] += h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1));
            }
        }

        SpectralPhase r = u0;
        free_evolve_in_place(r, ts[last]);
        const auto ut = SpectralPhase::from(traj.snapshots[last]);
        for (std::size_t i = 0; i < m; ++i) {
            r.u1[i] = ut.u1[i] - r.u1[i];
            r.u2[i] = ut.u2[i] - r.u2[i];
            r.v1[i] = ut.v1[i] - r.v1[i];
            r.v2[i] = ut.v2[i] - r.v2[i];
        }
        if (!traj.params.is_linear()) {
            for (std::size_t n = 0; n <= last; ++n) {
                if (w[n] == 0.0) continue;
                const double lag = ts[last] - ts[n];
                const auto& [f1, f2] = forcing[n];
                for (std::size_t i = 0; i < m; ++i) {
                    const double om = omega[i];
                    const double sn = w[n] * std::sin(om * lag) / om;
                    const double cs = w[n] * std::cos(om * lag);
                    r.u1[i] -= sn * f1[i];
                    r.u2[i] -= sn * f2[i];
                    r.v1[i] -= cs * f1[i];
                    r.v2[i] -= cs * f2[i];
                }
            }
        }
        const double scale = std::sqrt(spectral_phase_norm_sq(ut));
        const double err = std::sqrt(spectral_phase_norm_sq(r));
        worst = std::max(worst, scale > 0.0 ? err / scale : err);
    }
    return worst;
}

namespace {

std::vector<double> running_cube_root(const std::vector<double>& times, const std::vector<double>& l6) {
    std::vector<double> out(times.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double a = l6[i - 1] * l6[i - 1] * l6[i - 1];
        const double b = l6[i] * l6[i] * l6[i];
        acc += 0.5 * (times[i] - times[i - 1]) * (a + b);
        out[i] = std::cbrt(acc);
    }
    return out;
}

} // namespace

std::vector<double> strichartz_accumulator(const Trajectory& traj) {
    return running_cube_root(traj.times, traj.l6);
}

std::vector<double> free_strichartz_series(const PhasePoint& initial, const std::vector<double>& times) {
    const auto s0 = SpectralPhase::from(initial);
    const auto& g = s0.grid;
    const auto omega = g.bessel_symbol();
    std::vector<double> l6(times.size());
    Spectrum a(s0.u1.size()), b(s0.u2.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        for (std::size_t k = 0; k < omega.size(); ++k) {
            const double c = std::cos(omega[k] * t);
            const double sn = std::sin(omega[k] * t) / omega[k];
            a[k] = c * s0.u1[k] + sn * s0.v1[k];
            b[k] = c * s0.u2[k] + sn * s0.v2[k];
        }
        l6[i] = pair_l6(from_spectrum(g, a), from_spectrum(g, b));
    }
    return running_cube_root(times, l6);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& comment) {
    std::vector<std::string> cols{"t", "E"};
    for (int a = 1; a <= traj.grid.dim(); ++a) cols.push_back("P" + std::to_string(a));
    for (const char* c : {"K0", "K2", "H1sq", "Linf", "strichartz_running"}) cols.emplace_back(c);
    CsvWriter csv(os, cols, comment);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& r = traj.series[i];
        csv << traj.times[i] << r.E;
        for (double p : r.P) csv << p;
        csv << r.K0 << r.K2 << r.h1_norm_sq << traj.linf[i] << traj.strichartz_running[i];
        csv.end_row();
    }
}

} // namespace kgsys
