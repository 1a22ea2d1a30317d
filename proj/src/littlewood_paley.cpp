#include "kgsys/littlewood_paley.hpp"

#include <cmath>
#include <stdexcept>

namespace kgsys {

namespace {

double smooth_zero(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

} // namespace

double lp_bump(double r) noexcept {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double t = r - 1.0;
    const double a = smooth_zero(1.0 - t);
    return a / (a + smooth_zero(t));
}

double lp_symbol(LPBlockIndex block, double k) noexcept {
    if (block.j <= 0) return lp_bump(k);
    return lp_bump(std::ldexp(k, -block.j)) - lp_bump(std::ldexp(k, -block.j + 1));
}

int lp_block_count(const SpectralGrid& grid) noexcept {
    // psi_j vanishes for |k| <= 2^(j-1); the last block that can see the
    // corner of the Fourier cube is the first j with 2^j >= kmax.
    const double kmax = grid.max_wavenumber();
    int j = 0;
    while (std::ldexp(1.0, j) < kmax) ++j;
    return j + 1;
}

namespace {

ScalarField project_spectrum(const SpectralGrid& grid, const Spectrum& s, LPBlockIndex block) {
    const auto ksq = grid.wavenumber_sq();
    Spectrum out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] * lp_symbol(block, std::sqrt(ksq[i]));
    return from_spectrum(grid, out);
}

} // namespace

ScalarField lp_project(const ScalarField& field, LPBlockIndex block) {
    if (block.j < 0) throw std::invalid_argument("Littlewood-Paley block index must be >= 0");
    return project_spectrum(field.grid(), to_spectrum(field), block);
}

std::vector<ScalarField> lp_decompose(const ScalarField& field) {
    const auto& g = field.grid();
    const auto s = to_spectrum(field);
    std::vector<ScalarField> blocks;
    const int count = lp_block_count(g);
    blocks.reserve(count);
    for (int j = 0; j < count; ++j) blocks.push_back(project_spectrum(g, s, {j}));
    return blocks;
}

double besov_norm(const ScalarField& field, double sigma, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("Besov exponent p must be >= 2");
    const auto blocks = lp_decompose(field);
    double high = 0.0;
    for (std::size_t j = 1; j < blocks.size(); ++j) {
        const double n = lebesgue_norm(blocks[j], p);
        high += std::exp2(2.0 * sigma * static_cast<double>(j)) * n * n;
    }
    return lebesgue_norm(blocks[0], p) + std::sqrt(high);
}

} // namespace kgsys
