#pragma once

// Payne-Sattinger region tests below the ground-state level h0, the
// blow-up / global-existence dichotomy run, the pulled-back-datum scattering
// diagnostic and the stability harness for perturbed data.

#include "kgsys/propagator.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kgsys {

enum class Region { PS_plus, PS_minus, above_threshold };
const char* to_string(Region region) noexcept;

struct RegionVerdict {
    Region region = Region::PS_plus;
    double E = 0.0;
    double K0 = 0.0;
    double margin = 0.0; ///< h0 - E
    /// |K0| <= 1e-10 ||pair||^2_{H1xH1}: the sign test is not trustworthy.
    bool borderline = false;
};

inline constexpr double kBorderlineK0 = 1e-10;

RegionVerdict classify(const PhasePoint& phase, const NonlinearityParams& params, double h0);
/// Same test from precomputed values.
RegionVerdict classify_values(double E, double K0, double h1_sq, double h0) noexcept;

enum class DichotomyVerdict { global_bounded, blowup_detected, inconclusive };
const char* to_string(DichotomyVerdict verdict) noexcept;

struct DichotomyConfig {
    double horizon = 30.0;
    StepPolicy policy;
    /// global_bounded requires peak ||U||_{HxH} below this multiple of the initial norm.
    double bounded_factor = 2.0;
};

struct DichotomyReport {
    RegionVerdict initial;
    DichotomyVerdict verdict = DichotomyVerdict::inconclusive;
    RunStatus status = RunStatus::running;
    double horizon = 0.0;
    double stop_time = 0.0;
    std::optional<double> escape_time;
    double initial_norm = 0.0;   ///< ||U(0)||_{HxH}
    double peak_h1 = 0.0;        ///< max_t ||U(t)||_{HxH}
    double strichartz_final = 0.0;
    double energy_drift = 0.0;
    /// Diagnostic steps whose region differs from the initial one (borderline steps excluded).
    int region_flips = 0;
    /// ||U(t) - S(t) S(-T) U(T)||_{HxH} on the snapshot times; empty after blow-up.
    std::vector<double> free_fit_error_series;
    std::vector<double> free_fit_times;
    std::string note;
};

/// Evolves to the horizon and compares the outcome with the region. Throws
/// std::invalid_argument for data at or above h0.
DichotomyReport run_dichotomy(const PhasePoint& phase, const NonlinearityParams& params, double h0,
                              const DichotomyConfig& config);

struct ScatteringReport {
    std::vector<double> window_times;  ///< window boundaries over the final part of the run
    std::vector<double> increments;    ///< ||V(t_{k+1}) - V(t_k)||_{HxH}, V(t) = S(-t) U(t)
    double datum_norm = 0.0;           ///< ||V(T)||_{HxH}
    double final_increment_relative = 0.0;
    bool monotone = false;             ///< increments strictly decreasing
    std::vector<double> free_fit_times;
    std::vector<double> free_fit_error; ///< ||U(t) - S(t) V(T)||_{HxH}
};

/// Pulled-back datum analysis on the snapshots of a completed run. Window
/// boundaries are T, T - window, T - 2 window, ... down to `start`, snapped to
/// the nearest snapshot. std::invalid_argument unless the run completed.
ScatteringReport scattering_diagnostic(const Trajectory& trajectory, double start, double window);

/// L - support_radius: the time a unit-speed front from the data support
/// needs to reach the box boundary.
double wrap_time(const SpectralGrid& grid, double support_radius) noexcept;

struct PerturbationRow {
    double delta = 0.0;
    int direction = 0;
    double sup_distance = 0.0;       ///< sup_t ||U_delta(t) - U(t)||_{HxH} on snapshots
    double strichartz_distance = 0.0; ///< discrete L3_t L6_x distance on snapshots
    RunStatus status = RunStatus::running;
    bool hypothesis_violated = false; ///< perturbed run blew up or left the resolution
};

struct PerturbationReport {
    std::vector<PerturbationRow> rows;
    double exponent_sup = 0.0;        ///< log-log slope of sup_distance vs delta
    double exponent_strichartz = 0.0;
    int violations = 0;
};

/// Runs the base datum and every phase + delta * direction / ||direction||
/// to the horizon. Zero deltas are kept in the table but excluded from the fit.
PerturbationReport perturbation_test(const PhasePoint& phase, const std::vector<double>& deltas,
                                     const std::vector<PhasePoint>& directions, const NonlinearityParams& params,
                                     double horizon, const StepPolicy& policy);

std::string to_json(const RegionVerdict& verdict);
std::string to_json(const DichotomyReport& report);
std::string to_json(const ScatteringReport& report);
std::string to_json(const PerturbationReport& report);

/// One row per datum: index, E, K0, margin, region, verdict, escape_time, final_increment.
struct EnsembleRow {
    DichotomyReport report;
    std::optional<double> final_increment;
};
void write_ensemble_csv(std::ostream& os, const std::vector<EnsembleRow>& rows, const std::string& comment = {});

/// Least-squares slope of log y against log x over the entries with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace kgsys
