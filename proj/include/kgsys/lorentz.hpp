#pragma once

// Lorentz boosts of stored space-time solution data,
//   (L U)(x0, x) = U(x0 cosh l + x_j sinh l, ..., x0 sinh l + x_j cosh l, ...),
// evaluated by Fourier interpolation in space and quintic Lagrange
// interpolation in time, together with the kinematic checks built on them.

#include "kgsys/propagator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kgsys {

/// Snapshots of one solution at t_start + k * stride, k = 0..count-1.
struct SpacetimeBlock {
    SpectralGrid grid;
    NonlinearityParams params;
    double t_start = 0.0;
    double stride = 0.0;
    std::vector<PhasePoint> slices;

    double t_end() const noexcept { return t_start + stride * static_cast<double>(slices.size() - 1); }

    /// Uses the snapshots of `trajectory` inside [t_a, t_b]; std::invalid_argument
    /// when they are not uniformly spaced or fewer than 6.
    static SpacetimeBlock from_trajectory(const Trajectory& trajectory, double t_a, double t_b);
    /// Integrates `initial` with steps of stride / substeps and keeps every substeps-th state.
    static SpacetimeBlock record(const PhasePoint& initial, const NonlinearityParams& params, double duration,
                                 double stride, int substeps = 5);

    /// Stride-halving estimate of the quintic time-interpolation error at
    /// this stride, relative to the sup of the stored fields.
    double interpolation_error_estimate() const;
    /// Largest |u_i| over |x_axis| >= radius across all slices, relative to the overall sup.
    double outer_amplitude(int axis, double radius) const;
};

struct BoostParams {
    double lambda = 0.0;
    int axis = 1; ///< 1..dim

    void validate(int dim) const;
};

inline constexpr double kMaxRapidity = 0.5;
inline constexpr double kOuterFraction = 0.1;
inline constexpr double kOuterAmplitude = 1e-8;

/// std::domain_error when the block's fields exceed kOuterAmplitude (relative)
/// in the outer kOuterFraction of the box along `axis`.
void require_interior(const SpacetimeBlock& block, int axis);

/// Time range [lo, hi] that a boost to `target_time` reads from.
std::pair<double, double> required_slab(const SpectralGrid& grid, const BoostParams& boost, double target_time);

/// Boosted phase point at time `target_time`. std::out_of_range naming the
/// required interval when the block does not cover the slab.
PhasePoint boost(const SpacetimeBlock& block, const BoostParams& params, double target_time);

/// Boosted solution sampled at target_start + k * stride, k = 0..count-1.
SpacetimeBlock boost_block(const SpacetimeBlock& block, const BoostParams& params, double target_start,
                           double stride, int count);

struct RotationRow {
    double lambda = 0.0;
    double E_boosted = 0.0;
    double P_boosted = 0.0;
    double E_predicted = 0.0; ///< E cosh l + P_j sinh l
    double P_predicted = 0.0; ///< E sinh l + P_j cosh l
    double rel_err = 0.0;     ///< max deviation of the pair divided by |E|
};

struct RotationReport {
    int axis = 1;
    double target_time = 0.0;
    double E = 0.0;
    double P = 0.0;
    std::vector<RotationRow> rows;
    double max_rel_err = 0.0;
};

RotationReport energy_momentum_rotation_check(const SpacetimeBlock& block, int axis,
                                              const std::vector<double>& lambdas, double target_time);

struct DerivativeCheck {
    double dE_dlambda = 0.0; ///< centered difference at l = 0
    double dP_dlambda = 0.0;
    double E = 0.0;
    double P = 0.0;
    double dep_rel_err = 0.0; ///< |dE/dl - P_j| / scale
    double dpe_rel_err = 0.0; ///< |dP_j/dl - E| / scale
};

/// Centered differences of E and P_j along the boost family at l = 0. The
/// scale is max(|P_j|, 1e-2 |E|) for the first relation and |E| for the second.
DerivativeCheck boost_derivative_check(const SpacetimeBlock& block, int axis, double target_time, double h = 1e-2);

/// Sup-norm defect of the boosted field in the equation at `target_time`,
/// relative to the sup of the boosted field: spectral second derivatives in
/// space, fourth-order differences in time with step `time_step`.
double boosted_residual(const SpacetimeBlock& block, const BoostParams& params, double target_time,
                        double time_step = 0.05);

/// Columns lambda, E_boosted, P_boosted, E_predicted, P_predicted, rel_err.
void write_rotation_csv(std::ostream& os, const RotationReport& report, const std::string& comment = {});

} // namespace kgsys
