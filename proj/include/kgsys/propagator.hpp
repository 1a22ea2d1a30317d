#pragma once

// Exact free Klein-Gordon group and the Strang split-step integrator for the
// coupled cubic system, with Duhamel-residual checks and the running
// L^3_t L^6_x norm.

#include "kgsys/functionals.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace kgsys {

struct StepPolicy {
    double dt_base = 1e-2;
    double dt_min = 1e-6;
    /// dt = min(dt_base, amplitude_guard / ||u||_inf^2, dt_base (growth_onset / growth)^2)
    /// with growth = ||U||_{HxH} / ||U(0)||_{HxH}; the last bound applies once growth exceeds growth_onset.
    double amplitude_guard = 0.5;
    double growth_onset = 1.5;
    int snapshot_stride = 10;
    /// Blow-up is declared when the H x H norm exceeds this multiple of its initial value.
    double escape_factor = 10.0;
    double tail_threshold = 4.0 / 9.0;
    double tail_limit = 1e-3;

    void validate() const;
};

enum class RunStatus { running, completed, blowup_detected, resolution_exhausted };
const char* to_string(RunStatus status) noexcept;

struct Trajectory {
    SpectralGrid grid;
    NonlinearityParams params;

    // One entry per diagnostic step (every integrator step, plus t = 0).
    std::vector<double> times;
    std::vector<FunctionalReport> series;
    std::vector<double> linf;
    std::vector<double> l6;            ///< ||U||_{L6 x L6}
    std::vector<double> phase_norm;    ///< ||U||_{H x H}
    std::vector<double> tail_fraction;
    std::vector<double> strichartz_running;

    std::vector<double> snapshot_times;
    std::vector<PhasePoint> snapshots;

    RunStatus status = RunStatus::running;
    double stop_time = 0.0;
    double max_energy_drift = 0.0;

    explicit Trajectory(SpectralGrid g, NonlinearityParams p) : grid(std::move(g)), params(p) {}

    const PhasePoint& final_state() const { return snapshots.back(); }
    double final_time() const { return snapshot_times.back(); }
    double peak_phase_norm() const;
};

/// Phase point in Fourier variables (half-complex spectra of u1, u2, v1, v2).
struct SpectralPhase {
    SpectralGrid grid;
    Spectrum u1, u2, v1, v2;

    static SpectralPhase from(const PhasePoint& phase);
    PhasePoint to_phase() const;
};

void free_evolve_in_place(SpectralPhase& phase, double t);
PhasePoint free_evolve(const PhasePoint& phase, double t);

/// v_i += dt * N_i(u), the nonlinearity projected on the 2/3-rule modes.
PhasePoint nonlinear_kick(const PhasePoint& phase, double dt, const NonlinearityParams& params);

/// (u, v) -> (u, -v): running the flow on this from t gives the state at -t.
PhasePoint time_reversed(const PhasePoint& phase);

/// Called after every step with the current time and state.
using StepObserver = std::function<void(double, const PhasePoint&)>;

/// Strang kick-drift-kick integration on [0, T]. The initial datum is first
/// projected onto the dealiased modes. The final state is always stored as the
/// last snapshot, whatever the stride.
Trajectory evolve(const PhasePoint& initial, double T, const StepPolicy& policy,
                  const NonlinearityParams& params, const StepObserver& observer = {});

/// max over the sample times of ||U(t) - S(t)U(0) - int_0^t S(t - s)(0, N(U(s))) ds||_{H x H}
/// divided by ||U(t)||_{H x H}. The integral uses composite Simpson over the
/// stored snapshots; every sample time must be a snapshot time. Throws
/// std::invalid_argument when snapshots are sparser than `max_spacing` or fewer than 3.
double duhamel_residual(const Trajectory& trajectory, const std::vector<double>& sample_times,
                        double max_spacing = 0.2);

/// Running (int_0^t ||U||^3_{L6 x L6} ds)^{1/3} by the trapezoid rule on the
/// diagnostic series.
std::vector<double> strichartz_accumulator(const Trajectory& trajectory);
/// Same running norm for a free evolution sampled at `times`.
std::vector<double> free_strichartz_series(const PhasePoint& initial, const std::vector<double>& times);

/// Columns t, E, P1..Pd, K0, K2, H1sq, Linf, strichartz_running.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const std::string& comment = {});

} // namespace kgsys
