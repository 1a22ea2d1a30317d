#pragma once

// Finite-n linear profile decomposition of sequences of free Klein-Gordon
// data: synthesis of sequences with planted space-time shifted bubbles and
// the greedy extraction loop driven by the Besov-type detection level
//   nu = max_j 2^{-d j / 2} sup_t ||P_j S(t) gamma||_inf.

#include "kgsys/propagator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kgsys {

struct Shift {
    double t = 0.0;
    std::vector<double> x; ///< one entry per axis
};

struct BubbleSpec {
    PhasePoint datum;          ///< V(0)
    std::vector<Shift> shifts; ///< (t_n, x_n) per sequence member
};

/// tau_x S(-t) V: the bubble as it appears in member data, concentrated at time t of the free flow.
PhasePoint place_bubble(const PhasePoint& datum, const Shift& shift);
/// Spectral translation u(. - shift); exact for band-limited fields.
PhasePoint translate(const PhasePoint& phase, std::span<const double> shift);

/// U_n = sum_j tau_{x_n^j} S(-t_n^j) V^j + noise with ||noise_n||_{HxH} = noise_amplitude.
/// std::invalid_argument when a placed bubble reaches the outer tenth of the box.
std::vector<PhasePoint> synthesize_sequence(const SpectralGrid& grid, const std::vector<BubbleSpec>& bubbles,
                                            double noise_amplitude, int n_count, std::uint64_t seed = 1);

struct ExtractionOptions {
    int max_bubbles = 4;
    double nu_floor = 1e-2;
    double t_min = -4.0;   ///< detection time window
    double t_max = 4.0;
    double t_step = 0.1;
    double tail_fraction = 0.5;       ///< members used for profile averaging
    int filter_margin = 2;            ///< blocks kept around the detection block
    double localization_radius = 8.0; ///< smooth spatial window around the detected center
};

struct Detection {
    double nu = 0.0;
    int block = 0;
    double t = 0.0;
    std::vector<double> x;
};

/// Detection level of one member over the time window; `only_block` >= 0
/// restricts the search. Ties within 1e-12 go to the smallest block, then the
/// earliest t, then the lexicographically smallest x.
Detection detect(const PhasePoint& member, const ExtractionOptions& options, int only_block = -1);

struct Decomposition {
    std::vector<BubbleSpec> bubbles;
    std::vector<PhasePoint> remainders;
    std::vector<double> nu_series;  ///< detection level of each extracted bubble
    std::vector<int> block_levels;  ///< detection block of each extracted bubble
    double final_nu = 0.0;          ///< level that stopped the loop
    bool complete = true;           ///< false when max_bubbles ran out above the floor
};

Decomposition extract_profiles(const std::vector<PhasePoint>& sequence, const ExtractionOptions& options);

struct OrthogonalityReport {
    std::vector<double> defects; ///< per-n Pythagorean defect, relative to ||U_n||^2
    bool nonincreasing_tail = true; ///< defects nonincreasing over the final half
    double remainder_l3 = 0.0;   ///< sup_t ||S(t) gamma_N||_{L3 x L3}, last member
    double remainder_l4 = 0.0;
    /// Per n: max over bubbles of the L2 norm of the low-frequency (blocks 0..3)
    /// part of the remainder pulled back by that bubble's shift.
    std::vector<double> weak_limit_proxy;
    std::vector<double> detection_ratios; ///< nu_j / ||V_j||_{L2 x L2}
    double detection_constant = 0.0;      ///< max of the ratios
};

OrthogonalityReport orthogonality_check(const Decomposition& decomposition, const std::vector<PhasePoint>& sequence,
                                        const ExtractionOptions& options);

/// ||phase||^2_{HxH}, the free energy used for bubble energies.
double free_energy(const PhasePoint& phase);

/// Manifest with bubbles (shifts, energies, levels) and per-n defects; writes
/// each profile as <dir>/profile_<j>.kgdu when `directory` is not empty.
std::string decomposition_json(const Decomposition& d, const OrthogonalityReport& report,
                               const std::filesystem::path& directory = {});

} // namespace kgsys
