#pragma once

// Littlewood-Paley projectors on a spectral grid and the Besov norms built
// from them. The partition is generated by one fixed C-infinity bump phi with
// phi = 1 on |k| <= 1 and phi = 0 on |k| >= 2; psi_j(k) = phi(k/2^j) - phi(k/2^(j-1)).

#include "kgsys/spectral.hpp"

#include <vector>

namespace kgsys {

struct LPBlockIndex {
    int j = 0; ///< j = 0 is the low-frequency ball
};

/// Radial profile phi(r) of the low-frequency cutoff.
double lp_bump(double r) noexcept;
/// Symbol of P_j at wavenumber magnitude k.
double lp_symbol(LPBlockIndex block, double k) noexcept;
/// Number of blocks that can be nonzero on the grid; blocks j >= count vanish.
int lp_block_count(const SpectralGrid& grid) noexcept;

ScalarField lp_project(const ScalarField& field, LPBlockIndex block);
/// All representable blocks at once, sharing one forward transform.
std::vector<ScalarField> lp_decompose(const ScalarField& field);

/// ||P_0 f||_p + (sum_{j>=1} 2^{2 sigma j} ||P_j f||_p^2)^{1/2}, p >= 2.
double besov_norm(const ScalarField& field, double sigma, double p);

} // namespace kgsys
