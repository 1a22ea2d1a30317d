#pragma once

// Periodic Fourier discretization of the box [-L, L)^dim and the multiplier
// calculus built on it: <grad> = sqrt(1 - Laplacian), derivatives, the 2/3
// dealiasing projector, and the Lebesgue/Sobolev norms used as diagnostics.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace kgsys {

using Complex = std::complex<double>;

/// Half-complex (r2c) spectrum of a real field, unnormalized FFTW layout.
using Spectrum = std::vector<Complex>;

namespace detail {
struct GridTables;
}

class SpectralGrid {
public:
    /// Throws std::invalid_argument for dim outside {1,2,3}, points that are
    /// not of the form 2^a 3^b with a >= 1 (or below 8), or a nonpositive half length.
    SpectralGrid(int dim, int points_per_axis, double box_half_length);

    int dim() const noexcept;
    int points() const noexcept;
    double half_length() const noexcept;
    double spacing() const noexcept;
    double cell_volume() const noexcept;
    double box_volume() const noexcept;

    /// Number of physical samples, points^dim.
    std::size_t size() const noexcept;
    /// Number of stored half-complex modes.
    std::size_t spectral_size() const noexcept;

    double coordinate(int axis_index) const noexcept;
    /// Physical coordinates of a flat (row-major) sample index.
    std::array<double, 3> point(std::size_t flat_index) const noexcept;
    std::array<int, 3> multi_index(std::size_t flat_index) const noexcept;

    /// Per-axis wavenumbers k = pi*m/L in FFT order, m = 0..N/2-1, -N/2..-1.
    std::span<const double> axis_wavenumbers() const noexcept;
    /// Largest representable |k| (corner of the Fourier cube).
    double max_wavenumber() const noexcept;
    double nyquist_wavenumber() const noexcept;

    // Per-mode tables over the half-complex layout.
    std::span<const double> wavenumber_sq() const noexcept;
    std::span<const double> bessel_symbol() const noexcept;
    /// Component of the wavevector along `axis`; zero on that axis' Nyquist
    /// plane so odd-order derivatives stay real.
    std::span<const double> wavevector_component(int axis) const noexcept;
    /// Parseval multiplicity of each stored mode (1 or 2).
    std::span<const double> mode_weight() const noexcept;
    /// 1 inside the 2/3-rule retained cube, 0 outside.
    std::span<const double> dealias_mask() const noexcept;
    /// Largest |m|/(N/2) over the axes, used for spectral-tail monitoring.
    std::span<const double> relative_mode_radius() const noexcept;

    /// Unnormalized forward transform of a real sample array.
    Spectrum forward(std::span<const double> values) const;
    /// Inverse transform including the 1/size normalization.
    void inverse(const Spectrum& spectrum, std::span<double> out) const;

    bool operator==(const SpectralGrid& other) const noexcept;

private:
    std::shared_ptr<const detail::GridTables> tables_;
};

class ScalarField {
public:
    explicit ScalarField(SpectralGrid grid);
    ScalarField(SpectralGrid grid, std::vector<double> values);

    template <class F>
    static ScalarField from_function(const SpectralGrid& grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
        return out;
    }

    const SpectralGrid& grid() const noexcept { return grid_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    bool is_finite() const noexcept;
    double max_abs() const noexcept;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double factor) noexcept;
    /// this += factor * other
    ScalarField& add_scaled(double factor, const ScalarField& other);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

private:
    SpectralGrid grid_;
    std::vector<double> values_;
};

Spectrum to_spectrum(const ScalarField& field);
ScalarField from_spectrum(const SpectralGrid& grid, const Spectrum& spectrum);

/// Multiplies the Fourier coefficients by <k>^s.
ScalarField apply_bessel(const ScalarField& field, double exponent);
ScalarField partial_derivative(const ScalarField& field, int axis);
ScalarField laplacian(const ScalarField& field);
/// Orthogonal projection onto the 2/3-rule retained modes.
ScalarField dealias(const ScalarField& field);
void dealias_in_place(Spectrum& spectrum, const SpectralGrid& grid);

/// Rectangle-rule integral over the box.
double integrate(const ScalarField& field);
double inner_product(const ScalarField& a, const ScalarField& b);

/// Plancherel evaluation of  int f * m(D) f dx  from a half-complex spectrum.
double spectral_quadratic_form(const SpectralGrid& grid, const Spectrum& spectrum,
                               std::span<const double> symbol);
/// Same with the unit symbol: the squared L2 norm computed in Fourier space.
double spectral_l2_norm_sq(const SpectralGrid& grid, const Spectrum& spectrum);
/// int f * m(D) g dx for two real fields given by their spectra.
double spectral_bilinear_form(const SpectralGrid& grid, const Spectrum& f, const Spectrum& g,
                              std::span<const double> symbol);

/// p in [1, inf]; pass std::numeric_limits<double>::infinity() for the sup norm.
double lebesgue_norm(const ScalarField& field, double p);
double sobolev_h1_norm(const ScalarField& field);
double h1_norm_sq(const Spectrum& spectrum, const SpectralGrid& grid);
double gradient_norm_sq(const Spectrum& spectrum, const SpectralGrid& grid);

/// Fraction of the spectral energy (weighted by <k>^2) carried by modes whose
/// relative radius exceeds `threshold` (fraction of the Nyquist index).
double spectral_tail_fraction(const SpectralGrid& grid, const Spectrum& spectrum,
                              double threshold);

/// Displacement x - center folded into the box (minimum image).
double periodic_displacement(double x, double center, double half_length) noexcept;

} // namespace kgsys
