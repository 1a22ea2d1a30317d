#pragma once

// Ground states of the coupled system: the scalar radial profile S by
// shooting, the explicit candidate levels built from it, and the
// constrained minimizer (Q1, Q2) by a projected H1 gradient flow, either on a
// Cartesian grid or in the radial reduction w = r u for d = 3.

#include "kgsys/functionals.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kgsys {

/// Positive radial solution of S'' + (d-1)/r S' - S + S^3 = 0 with S'(0) = 0.
struct RadialProfile {
    int dim = 3;
    double r_max = 0.0;
    int nodes = 0;
    double spacing = 0.0;
    std::vector<double> values;      ///< S(r_i), r_i = i * spacing, i = 0..nodes
    std::vector<double> derivatives; ///< S'(r_i)
    double center_value = 0.0;       ///< S(0)
    double decay_rate = 0.0;         ///< fitted rate of S ~ r^{-(d-1)/2} e^{-rate r}
    double bracket_lo = 0.0;         ///< final shooting bracket on S(0)
    double bracket_hi = 0.0;
    double match_radius = 0.0;       ///< beyond this radius the linear tail is used
    double tail_amplitude = 0.0;
    double ode_residual = 0.0;       ///< sup-norm ODE defect on the nodes

    double operator()(double r) const;
    double derivative(double r) const;
    double h1_norm_sq() const;  ///< over R^d
    double quartic() const;     ///< int S^4 over R^d
    double action() const { return 0.5 * h1_norm_sq() - 0.25 * quartic(); }
};

/// Bisection shooting. Throws std::runtime_error naming the scanned interval
/// when no bracket is found, std::invalid_argument when r_max < 15 or nodes < 2000.
RadialProfile scalar_ground_state(double r_max = 20.0, int nodes = 4000, double tol = 1e-6, int dim = 3);

/// Scalar level J[S] for the given dimension (closed form 4/3 in d = 1), cached.
double scalar_level(int dim);
/// S evaluated at radius r in the given dimension (sqrt(2) sech r in d = 1), cached profile.
double scalar_profile(int dim, double r);

struct CandidateLevels {
    double semitrivial = 0.0;
    /// Level of (alpha S, gamma S) with both alpha^2, gamma^2 > 0; empty when no such pair exists.
    std::optional<double> synchronized;
    double alpha_sq = 0.0;
    double gamma_sq = 0.0;

    double best() const { return synchronized ? std::min(semitrivial, *synchronized) : semitrivial; }
};

CandidateLevels candidate_levels(const NonlinearityParams& params, int dim = 3);

enum class CandidateKind { first_component, second_component, synchronized };
/// The candidate pair sampled on a grid (centered at the origin).
FieldPair candidate_pair(const NonlinearityParams& params, const SpectralGrid& grid, CandidateKind kind);

enum class GroundStateKind { semitrivial, symmetric, coupled_asymmetric };
const char* to_string(GroundStateKind kind) noexcept;
GroundStateKind classify_components(double norm1, double norm2) noexcept;

struct GroundState {
    FieldPair pair;
    double level = 0.0;
    NonlinearityParams params;
    double el_residual = 0.0;  ///< sup-norm Euler-Lagrange defect
    double k0_relative = 0.0;  ///< |K0| / ||pair||^2
    GroundStateKind kind = GroundStateKind::semitrivial;
    bool converged = false;
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iterations = 4000;
    double step = 0.9;
    int random_seeds = 5;
    std::uint64_t seed = 20240611;
};

/// a^2 / (4 b) with a = ||pair||^2, b the quartic integral: the value of J
/// (and of G0) after projecting the pair onto K0 = 0.
double projected_level(const FieldPair& pair, const NonlinearityParams& params);
/// H1 gradient of projected_level, the direction used by the descent.
FieldPair projected_level_gradient(const FieldPair& pair, const NonlinearityParams& params);
/// -Lap u_i + u_i - N_i(u) on the grid.
FieldPair euler_lagrange_defect(const FieldPair& pair, const NonlinearityParams& params);

/// Projected gradient flow on the grid from the candidate seeds and
/// `random_seeds` random bump seeds; returns the lowest limit. An
/// unconverged result is flagged, never thrown.
GroundState solve_ground_state(const NonlinearityParams& params, const SpectralGrid& grid,
                               const SolverOptions& options = {});

/// Radially symmetric d = 3 minimizer stored as w = r u on a symmetric line grid.
struct RadialGroundState {
    SpectralGrid line;
    ScalarField w1, w2;
    double level = 0.0;
    NonlinearityParams params;
    double el_residual = 0.0;
    double k0_relative = 0.0;
    GroundStateKind kind = GroundStateKind::semitrivial;
    bool converged = false;
    int iterations = 0;
    /// u_i on the nodes r >= 0 (index 0 is the origin).
    std::vector<double> u1_nodes, u2_nodes;

    /// u_i(r) by local interpolation of w_i / r.
    double profile(int component, double r) const;
    FieldPair sample(const SpectralGrid& grid) const;
    double h1_norm_sq() const;
};

RadialGroundState solve_radial_ground_state(const NonlinearityParams& params, int points = 2048,
                                            double half_length = 24.0, const SolverOptions& options = {});

/// h0 at reference resolution in dimension `dim`: min(candidate levels, solver
/// level). Results are cached per (dim, params); safe for concurrent callers.
double h0(const NonlinearityParams& params, int dim = 3);
void clear_h0_cache();
/// Loads cached levels; a missing or unreadable file leaves the cache empty
/// and returns false.
bool load_h0_cache(const std::filesystem::path& path);
void save_h0_cache(const std::filesystem::path& path);

struct GroundStateRow {
    NonlinearityParams params;
    double level = 0.0;
    GroundStateKind kind = GroundStateKind::semitrivial;
    double residual = 0.0;
};

/// JSON array of {beta, mu1, mu2, level, kind, residual}.
std::string ground_state_table_json(const std::vector<GroundStateRow>& rows);

} // namespace kgsys
