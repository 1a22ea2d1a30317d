#pragma once

// YAML-described experiments. A scenario names one of six kinds, the
// nonlinearity, the grid and the step policy, plus one kind-specific section;
// running it writes a manifest, reports, plot-ready CSVs and snapshots into
// its output directory. See docs/config.md for the schema.

#include "kgsys/propagator.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgsys {

/// Invalid configuration; the message carries the line and key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { groundstate_sweep, dichotomy_ensemble, lorentz_check, profile_test, perturbation_study,
                          single_run };
const char* to_string(ScenarioKind kind) noexcept;

struct GridSpec {
    int dim = 1;
    int points = 256;
    double half_length = 16.0;

    SpectralGrid make() const { return SpectralGrid(dim, points, half_length); }
};

/// Initial data. gaussian: u_i = a_i exp(-|x - c_i|^2 / 2 w^2) with centers
/// -/+ separation/2 on axis 1 and v_i = -velocity d_1 u_i. ground_state_ray:
/// scale * (Q1, Q2) at rest. random_bumps: seeded bumps scaled to
/// E = fraction * h0 on the given branch of the amplitude ray.
struct DatumSpec {
    std::string type = "gaussian";
    double amplitude1 = 0.3;
    double amplitude2 = 0.2;
    double width = 1.0;
    double separation = 1.0;
    double velocity = 0.0;
    double scale = 0.5;
    double fraction = 0.5;
    bool minus_branch = false;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::single_run;
    NonlinearityParams params;
    GridSpec grid;
    StepPolicy policy;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "kgsys-out";
    std::string config_text;
    std::string config_hash; ///< SHA-256 of the config text, hex

    DatumSpec datum;
    double horizon = 10.0;

    // groundstate_sweep
    std::vector<double> betas;
    bool radial_solver = true;
    // dichotomy_ensemble
    std::vector<double> rays;
    int bumps = 0;
    double fraction_min = 0.2;
    double fraction_max = 0.9;
    double window = 3.141592653589793;
    // lorentz_check
    double duration = 21.0;
    double stride = 0.05;
    double target_time = 10.0;
    std::vector<double> lambdas{-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3};
    int axis = 1;
    // profile_test
    int bubble_count = 2;
    int members = 16;
    double noise = 0.0;
    double nu_floor = 0.05;
    // perturbation_study
    std::vector<double> deltas{1e-4, 1e-3, 1e-2};
    int directions = 2;
    // single_run checks
    std::optional<double> max_energy_drift;
    std::optional<RunStatus> expect_status;
};

/// Throws ConfigError for syntax errors, unknown keys and invalid values.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioOutcome {
    bool checks_passed = true;
    std::vector<std::string> failures;
    std::vector<std::filesystem::path> files;
};

/// Runs the scenario into its output directory. A FAILED sentinel is present
/// while the run is in progress and stays behind if it throws.
ScenarioOutcome run_scenario(const Scenario& scenario, std::ostream& log);

/// CLI wrapper: 0 when every declared check passes, 1 on a check failure or
/// runtime error, 2 on a configuration error.
int run_scenario_file(const std::filesystem::path& config, std::ostream& log, std::ostream& err,
                      const std::optional<std::filesystem::path>& output_override = {});

std::string sha256_hex(std::string_view data);

} // namespace kgsys
