#pragma once

// Variational and conserved quantities of the coupled cubic Klein-Gordon
// system
//   u1_tt - Lap u1 + u1 = mu1 u1^3 + beta u2^2 u1
//   u2_tt - Lap u2 + u2 = mu2 u2^3 + beta u1^2 u2
// evaluated by spectral quadrature on a SpectralGrid.

#include "kgsys/spectral.hpp"

#include <string>
#include <vector>

namespace kgsys {

struct NonlinearityParams {
    double beta = 0.0;
    double mu1 = 1.0;
    double mu2 = 1.0;

    /// Rejects beta < 0 and negative or non-finite weights. mu = 0 is allowed so
    /// that the linear flow can be run through the same code path.
    void validate() const;
    /// Throws unless mu1, mu2 > 0 and beta >= 0 (the regime with a positive
    /// mountain-pass level).
    void require_focusing() const;
    bool is_linear() const noexcept { return beta == 0.0 && mu1 == 0.0 && mu2 == 0.0; }

    static NonlinearityParams linear() noexcept { return {0.0, 0.0, 0.0}; }
    friend bool operator==(const NonlinearityParams&, const NonlinearityParams&) = default;
};

struct FieldPair {
    ScalarField u1;
    ScalarField u2;

    static FieldPair zeros(const SpectralGrid& grid) { return {ScalarField(grid), ScalarField(grid)}; }
    const SpectralGrid& grid() const noexcept { return u1.grid(); }
    FieldPair scaled(double factor) const;
    bool is_finite() const noexcept { return u1.is_finite() && u2.is_finite(); }
};

/// ((u1, d_t u1), (u2, d_t u2)).
struct PhasePoint {
    FieldPair pair;
    ScalarField v1;
    ScalarField v2;

    static PhasePoint zeros(const SpectralGrid& grid) {
        return {FieldPair::zeros(grid), ScalarField(grid), ScalarField(grid)};
    }
    static PhasePoint at_rest(FieldPair pair) {
        ScalarField z(pair.grid());
        return {std::move(pair), z, z};
    }
    const SpectralGrid& grid() const noexcept { return pair.u1.grid(); }
    bool is_finite() const noexcept { return pair.is_finite() && v1.is_finite() && v2.is_finite(); }

    PhasePoint& add_scaled(double factor, const PhasePoint& other);
    PhasePoint& operator*=(double factor);
};

PhasePoint operator-(PhasePoint a, const PhasePoint& b);
PhasePoint operator+(PhasePoint a, const PhasePoint& b);

/// Quadratic pieces of a pair, from one forward transform per component.
struct PairMeasures {
    double h1_sq = 0.0;       ///< ||(u1,u2)||^2 in H1 x H1
    double gradient_sq = 0.0; ///< sum_j ||grad u_j||^2
    double l2_sq = 0.0;       ///< sum_j ||u_j||^2
    double quartic = 0.0;     ///< int mu1 u1^4 + mu2 u2^4 + 2 beta u1^2 u2^2
};

PairMeasures measure_pair(const FieldPair& pair, const NonlinearityParams& params);
double quartic_integral(const FieldPair& pair, const NonlinearityParams& params);
double pair_h1_norm_sq(const FieldPair& pair);
/// ||U||^2 in (H1 x L2)^2.
double phase_norm_sq(const PhasePoint& phase);
double phase_norm(const PhasePoint& phase);
double kinetic_norm_sq(const PhasePoint& phase);

/// J = 1/2 ||pair||^2_{H1xH1} - 1/4 quartic.
double static_action(const FieldPair& pair, const NonlinearityParams& params);
/// Amplitude-scaling derivative of J: ||pair||^2_{H1xH1} - quartic.
double k0(const FieldPair& pair, const NonlinearityParams& params);
/// Derivative of J along the L2-preserving dilation e^{d lambda/2} u(e^lambda x):
/// sum ||grad u_j||^2 - (d/4) quartic. For d = 3 this is the virial functional.
double k2(const FieldPair& pair, const NonlinearityParams& params);
/// 1/4 ||pair||^2_{H1xH1}, which equals J - K0/4.
double g0(const FieldPair& pair);
/// (1/2 - 1/d) sum ||grad u_j||^2 + 1/2 ||pair||^2_{L2}, which equals J - K2/d.
double g2(const FieldPair& pair);

double energy(const PhasePoint& phase, const NonlinearityParams& params);
/// P_j = <v1, d_j u1> + <v2, d_j u2>, spectral derivatives.
std::vector<double> momentum(const PhasePoint& phase);

struct FunctionalReport {
    double E = 0.0;
    double J = 0.0;
    double K0 = 0.0;
    double K2 = 0.0;
    double G0 = 0.0;
    double G2 = 0.0;
    std::vector<double> P;
    double h1_norm_sq = 0.0;
};

FunctionalReport functional_report(const PhasePoint& phase, const NonlinearityParams& params);
/// Same report from precomputed spectra of u1, u2, v1, v2 and the quartic integral.
FunctionalReport functional_report(const SpectralGrid& grid, const Spectrum& u1, const Spectrum& u2,
                                   const Spectrum& v1, const Spectrum& v2, double quartic);
/// Flat JSON object {E, J, K0, K2, G0, G2, P, H1sq}.
std::string to_json(const FunctionalReport& report);

/// e = 1/2 sum (|grad u_j|^2 + u_j^2 + v_j^2) - 1/4 (mu1 u1^4 + mu2 u2^4 + 2 beta u1^2 u2^2).
ScalarField energy_density(const PhasePoint& phase, const NonlinearityParams& params);

/// chi_R(x - c) with the Littlewood-Paley bump profile: 1 on |x - c| <= R, 0 beyond 2R.
ScalarField virial_cutoff(const SpectralGrid& grid, double radius, std::span<const double> center);
/// X_R = int chi_R(x - c) (x - c) e(x) dx, one entry per axis. Displacements use the
/// minimum image, so 2R may not exceed the box half length (std::invalid_argument).
std::vector<double> localized_virial(const PhasePoint& phase, const NonlinearityParams& params,
                                     double radius, std::span<const double> center);

/// lambda* with K0[e^lambda* pair] = 0, i.e. 1/2 log(a/b) for a = ||pair||^2_{H1xH1}
/// and b the quartic integral. std::domain_error when b <= 0.
double scaling_normalize(const FieldPair& pair, const NonlinearityParams& params);

enum class InequalityStatus { holds, violated, precondition_failed, degenerate };

struct BranchCheck {
    bool negative_branch = false; ///< K < 0: checks -K >= 2 (h0 - J)
    double functional = 0.0;      ///< K0 or K2
    /// For K >= 0: K / min(h0 - J, ||pair||^2), the largest admissible constant.
    /// For K < 0: -K / (2 (h0 - J)), which must be >= 1.
    double ratio = 0.0;
    bool holds = false;
};

struct ConditionalReport {
    InequalityStatus status = InequalityStatus::degenerate;
    double J = 0.0;
    double gap = 0.0; ///< h0 - J
    double h1_sq = 0.0;
    BranchCheck k0;
    BranchCheck k2;
};

/// Evaluates both conditional inequalities (amplitude and dilation versions)
/// for a pair below the mountain-pass level h0. Precondition failures and the
/// zero pair are reported through `status`, never thrown.
ConditionalReport conditional_inequality_check(const FieldPair& pair, const NonlinearityParams& params,
                                               double h0);

const char* to_string(InequalityStatus status) noexcept;

} // namespace kgsys
