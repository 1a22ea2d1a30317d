#pragma once

// Seeded random test data: sums of Gaussian bumps with an analytic
// description, so amplitude scalings and dilations are exact and can be
// resampled on any grid.

#include "kgsys/functionals.hpp"

#include <array>
#include <optional>
#include <random>
#include <vector>

namespace kgsys {

struct GaussianBump {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;
    double amplitude = 1.0;

    double operator()(const std::array<double, 3>& x, int dim) const noexcept;
};

struct BumpPair {
    int dim = 3;
    std::vector<GaussianBump> first;
    std::vector<GaussianBump> second;

    FieldPair sample(const SpectralGrid& grid) const;
    BumpPair amplitude_scaled(double factor) const;
    /// e^{d lambda/2} u(e^lambda x), the L2-preserving dilation.
    BumpPair dilated(double lambda) const;
    BumpPair translated(std::span<const double> shift) const;
};

struct BumpOptions {
    int min_bumps = 1;
    int max_bumps = 4;
    double width_min = 0.8;
    double width_max = 1.6;
    double center_radius = 2.0;
    double amplitude_min = 0.2;
    double amplitude_max = 1.0;
    /// Probability that a component is left empty (never both).
    double empty_component_probability = 0.1;
};

BumpPair random_bump_pair(std::mt19937_64& rng, int dim, const BumpOptions& options = {});

/// Amplitude factor s with J[s * pair] = target. `beyond_peak` selects the
/// root past the maximum of s -> J[s * pair] (where K0 < 0). Empty when the
/// target exceeds the peak of the ray.
std::optional<double> action_scaling(const PairMeasures& measures, double target, bool beyond_peak);

} // namespace kgsys
