#include "kgsys/bumps.hpp"

#include <cmath>

namespace kgsys {

double GaussianBump::operator()(const std::array<double, 3>& x, int dim) const noexcept {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double d = x[a] - center[a];
        r2 += d * d;
    }
    return amplitude * std::exp(-0.5 * r2 / (width * width));
}

FieldPair BumpPair::sample(const SpectralGrid& grid) const {
    auto eval = [&](const std::vector<GaussianBump>& bumps) {
        return ScalarField::from_function(grid, [&](const std::array<double, 3>& x) {
            double s = 0.0;
            for (const auto& b : bumps) s += b(x, dim);
            return s;
        });
    };
    return {eval(first), eval(second)};
}

BumpPair BumpPair::amplitude_scaled(double factor) const {
    BumpPair out = *this;
    for (auto* list : {&out.first, &out.second})
        for (auto& b : *list) b.amplitude *= factor;
    return out;
}

BumpPair BumpPair::dilated(double lambda) const {
    BumpPair out = *this;
    const double s = std::exp(-lambda);
    const double amp = std::exp(0.5 * dim * lambda);
    for (auto* list : {&out.first, &out.second})
        for (auto& b : *list) {
            for (auto& c : b.center) c *= s;
            b.width *= s;
            b.amplitude *= amp;
        }
    return out;
}

BumpPair BumpPair::translated(std::span<const double> shift) const {
    BumpPair out = *this;
    for (auto* list : {&out.first, &out.second})
        for (auto& b : *list)
            for (int a = 0; a < dim && a < static_cast<int>(shift.size()); ++a) b.center[a] += shift[a];
    return out;
}

BumpPair random_bump_pair(std::mt19937_64& rng, int dim, const BumpOptions& o) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(o.min_bumps, o.max_bumps);
    auto draw = [&] {
        GaussianBump b;
        for (int a = 0; a < dim; ++a) b.center[a] = o.center_radius * (2.0 * unit(rng) - 1.0);
        b.width = o.width_min + (o.width_max - o.width_min) * unit(rng);
        b.amplitude = o.amplitude_min + (o.amplitude_max - o.amplitude_min) * unit(rng);
        return b;
    };
    BumpPair p;
    p.dim = dim;
    const double r = unit(rng);
    const bool drop_first = r < 0.5 * o.empty_component_probability;
    const bool drop_second = !drop_first && r < o.empty_component_probability;
    if (!drop_first)
        for (int i = count(rng); i > 0; --i) p.first.push_back(draw());
    if (!drop_second)
        for (int i = count(rng); i > 0; --i) p.second.push_back(draw());
    return p;
}

std::optional<double> action_scaling(const PairMeasures& m, double target, bool beyond_peak) {
    // J(s) = a s^2 / 2 - b s^4 / 4 with a = ||pair||^2, b = quartic.
    const double a = m.h1_sq;
    const double b = m.quartic;
    if (!(a > 0.0)) return std::nullopt;
    if (b <= 0.0) {
        if (beyond_peak || target < 0.0) return std::nullopt;
        return std::sqrt(2.0 * target / a);
    }
    const double disc = a * a - 4.0 * b * target;
    if (disc < 0.0) return std::nullopt;
    const double y = (a + (beyond_peak ? 1.0 : -1.0) * std::sqrt(disc)) / b;
    if (!(y >= 0.0)) return std::nullopt;
    return std::sqrt(y);
}

} // namespace kgsys
