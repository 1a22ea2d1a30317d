#include "kgsys/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kgsys {

namespace {

// FFTW's planner is not reentrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Even and 3-smooth: 2^a 3^b with a >= 1.
bool is_fft_size(int n) {
    if (n <= 0 || n % 2) return false;
    while (n % 2 == 0) n /= 2;
    while (n % 3 == 0) n /= 3;
    return n == 1;
}

} // namespace

namespace detail {

struct GridTables {
    int dim = 1;
    int n = 8;
    double half_length = 1.0;
    double dx = 0.0;
    std::size_t size = 0;
    std::size_t spectral_size = 0;
    std::vector<double> axis_k;
    std::vector<double> ksq;
    std::vector<double> bessel;
    std::array<std::vector<double>, 3> kcomp;
    std::vector<double> weight;
    std::vector<double> dealias;
    std::vector<double> radius;
    double kmax = 0.0;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    GridTables() = default;
    GridTables(const GridTables&) = delete;
    GridTables& operator=(const GridTables&) = delete;
    ~GridTables() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

} // namespace detail

SpectralGrid::SpectralGrid(int dim, int points_per_axis, double box_half_length) {
    if (dim < 1 || dim > 3)
        throw std::invalid_argument("grid dimension must be 1, 2 or 3 (got " +
                                    std::to_string(dim) + ")");
    if (points_per_axis < 8 || !is_fft_size(points_per_axis))
        throw std::invalid_argument("points per axis must be >= 8 and of the form 2^a 3^b (got " +
                                    std::to_string(points_per_axis) + ")");
    if (!(box_half_length > 0.0) || !std::isfinite(box_half_length))
        throw std::invalid_argument("box half length must be positive");

    auto t = std::make_shared<detail::GridTables>();
    const int n = points_per_axis;
    const int nh = n / 2 + 1;
    t->dim = dim;
    t->n = n;
    t->half_length = box_half_length;
    t->dx = 2.0 * box_half_length / n;
    t->size = 1;
    for (int a = 0; a < dim; ++a) t->size *= static_cast<std::size_t>(n);
    t->spectral_size = t->size / n * nh;

    const double k0 = std::numbers::pi / box_half_length;
    t->axis_k.resize(n);
    for (int i = 0; i < n; ++i) t->axis_k[i] = k0 * (i < n / 2 ? i : i - n);

    t->ksq.resize(t->spectral_size);
    t->bessel.resize(t->spectral_size);
    t->weight.resize(t->spectral_size);
    t->dealias.resize(t->spectral_size);
    t->radius.resize(t->spectral_size);
    for (int a = 0; a < dim; ++a) t->kcomp[a].resize(t->spectral_size);

    // Half-complex layout: the last axis stores m = 0..N/2.
    std::array<int, 3> extent{1, 1, 1};
    for (int a = 0; a < dim; ++a) extent[a] = (a == dim - 1) ? nh : n;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < extent[0]; ++i0)
        for (int i1 = 0; i1 < extent[1]; ++i1)
            for (int i2 = 0; i2 < extent[2]; ++i2, ++idx) {
                const std::array<int, 3> ii{i0, i1, i2};
                double ksq = 0.0;
                double rad = 0.0;
                bool keep = true;
                for (int a = 0; a < dim; ++a) {
                    const int m = (a == dim - 1) ? ii[a] : (ii[a] < n / 2 ? ii[a] : ii[a] - n);
                    const int am = std::abs(m);
                    const double k = k0 * m;
                    ksq += k * k;
                    t->kcomp[a][idx] = (am == n / 2) ? 0.0 : k;
                    rad = std::max(rad, am / (0.5 * n));
                    if (3 * am > n) keep = false;
                }
                t->ksq[idx] = ksq;
                t->bessel[idx] = std::sqrt(1.0 + ksq);
                const int last = ii[dim - 1];
                t->weight[idx] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
                t->dealias[idx] = keep ? 1.0 : 0.0;
                t->radius[idx] = rad;
            }
    t->kmax = k0 * (n / 2) * std::sqrt(static_cast<double>(dim));

    {
        std::lock_guard lock(planner_mutex());
        std::vector<double> rbuf(t->size);
        std::vector<Complex> cbuf(t->spectral_size);
        auto* r = rbuf.data();
        auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::array<int, 3> dims{n, n, n};
        t->forward = fftw_plan_dft_r2c(dim, dims.data(), r, c, flags);
        t->backward = fftw_plan_dft_c2r(dim, dims.data(), c, r, flags);
    }
    if (!t->forward || !t->backward) throw std::runtime_error("FFTW plan creation failed");
    tables_ = std::move(t);
}

int SpectralGrid::dim() const noexcept { return tables_->dim; }
int SpectralGrid::points() const noexcept { return tables_->n; }
double SpectralGrid::half_length() const noexcept { return tables_->half_length; }
double SpectralGrid::spacing() const noexcept { return tables_->dx; }
double SpectralGrid::cell_volume() const noexcept { return std::pow(tables_->dx, tables_->dim); }
double SpectralGrid::box_volume() const noexcept {
    return std::pow(2.0 * tables_->half_length, tables_->dim);
}
std::size_t SpectralGrid::size() const noexcept { return tables_->size; }
std::size_t SpectralGrid::spectral_size() const noexcept { return tables_->spectral_size; }

double SpectralGrid::coordinate(int i) const noexcept {
    return -tables_->half_length + i * tables_->dx;
}

std::array<int, 3> SpectralGrid::multi_index(std::size_t flat) const noexcept {
    std::array<int, 3> out{0, 0, 0};
    const auto n = static_cast<std::size_t>(tables_->n);
    for (int a = tables_->dim - 1; a >= 0; --a) {
        out[a] = static_cast<int>(flat % n);
        flat /= n;
    }
    return out;
}

std::array<double, 3> SpectralGrid::point(std::size_t flat) const noexcept {
    const auto mi = multi_index(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < tables_->dim; ++a) x[a] = coordinate(mi[a]);
    return x;
}

std::span<const double> SpectralGrid::axis_wavenumbers() const noexcept { return tables_->axis_k; }
double SpectralGrid::max_wavenumber() const noexcept { return tables_->kmax; }
double SpectralGrid::nyquist_wavenumber() const noexcept {
    return std::numbers::pi / tables_->half_length * (tables_->n / 2);
}
std::span<const double> SpectralGrid::wavenumber_sq() const noexcept { return tables_->ksq; }
std::span<const double> SpectralGrid::bessel_symbol() const noexcept { return tables_->bessel; }
std::span<const double> SpectralGrid::wavevector_component(int axis) const noexcept {
    return tables_->kcomp[axis];
}
std::span<const double> SpectralGrid::mode_weight() const noexcept { return tables_->weight; }
std::span<const double> SpectralGrid::dealias_mask() const noexcept { return tables_->dealias; }
std::span<const double> SpectralGrid::relative_mode_radius() const noexcept {
    return tables_->radius;
}

Spectrum SpectralGrid::forward(std::span<const double> values) const {
    if (values.size() != tables_->size) throw std::invalid_argument("field size does not match grid");
    Spectrum out(tables_->spectral_size);
    // r2c leaves its input intact for the out-of-place transform.
    fftw_execute_dft_r2c(tables_->forward, const_cast<double*>(values.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

void SpectralGrid::inverse(const Spectrum& spectrum, std::span<double> out) const {
    if (spectrum.size() != tables_->spectral_size || out.size() != tables_->size)
        throw std::invalid_argument("spectrum size does not match grid");
    Spectrum scratch = spectrum; // c2r destroys its input
    fftw_execute_dft_c2r(tables_->backward, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
    const double norm = 1.0 / static_cast<double>(tables_->size);
    for (auto& v : out) v *= norm;
}

bool SpectralGrid::operator==(const SpectralGrid& other) const noexcept {
    if (tables_ == other.tables_) return true;
    return dim() == other.dim() && points() == other.points() &&
           half_length() == other.half_length();
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(SpectralGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(SpectralGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("value array does not match grid size");
}

bool ScalarField::is_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) { return add_scaled(1.0, other); }
ScalarField& ScalarField::operator-=(const ScalarField& other) { return add_scaled(-1.0, other); }

ScalarField& ScalarField::operator*=(double factor) noexcept {
    for (auto& v : values_) v *= factor;
    return *this;
}

ScalarField& ScalarField::add_scaled(double factor, const ScalarField& other) {
    if (!(grid_ == other.grid_)) throw std::invalid_argument("fields live on different grids");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += factor * other.values_[i];
    return *this;
}

// ---------------------------------------------------------------------------

Spectrum to_spectrum(const ScalarField& field) { return field.grid().forward(field.values()); }

ScalarField from_spectrum(const SpectralGrid& grid, const Spectrum& spectrum) {
    ScalarField out(grid);
    grid.inverse(spectrum, out.values());
    return out;
}

ScalarField apply_bessel(const ScalarField& field, double exponent) {
    const auto& g = field.grid();
    auto s = to_spectrum(field);
    const auto sym = g.bessel_symbol();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::pow(sym[i], exponent);
    return from_spectrum(g, s);
}

ScalarField partial_derivative(const ScalarField& field, int axis) {
    const auto& g = field.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative axis out of range");
    auto s = to_spectrum(field);
    const auto k = g.wavevector_component(axis);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= Complex(0.0, k[i]);
    return from_spectrum(g, s);
}

ScalarField laplacian(const ScalarField& field) {
    const auto& g = field.grid();
    auto s = to_spectrum(field);
    const auto ksq = g.wavenumber_sq();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= -ksq[i];
    return from_spectrum(g, s);
}

void dealias_in_place(Spectrum& spectrum, const SpectralGrid& grid) {
    const auto mask = grid.dealias_mask();
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= mask[i];
}

ScalarField dealias(const ScalarField& field) {
    auto s = to_spectrum(field);
    dealias_in_place(s, field.grid());
    return from_spectrum(field.grid(), s);
}

double integrate(const ScalarField& field) {
    double sum = 0.0;
    for (double v : field.values()) sum += v;
    return sum * field.grid().cell_volume();
}

double inner_product(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
    double sum = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) sum += av[i] * bv[i];
    return sum * a.grid().cell_volume();
}

double spectral_bilinear_form(const SpectralGrid& grid, const Spectrum& f, const Spectrum& g,
                              std::span<const double> symbol) {
    const auto w = grid.mode_weight();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double re = f[i].real() * g[i].real() + f[i].imag() * g[i].imag();
        sum += w[i] * symbol[i] * re;
    }
    const double n = static_cast<double>(grid.size());
    return sum * grid.cell_volume() / n;
}

double spectral_quadratic_form(const SpectralGrid& grid, const Spectrum& spectrum,
                               std::span<const double> symbol) {
    const auto w = grid.mode_weight();
    double sum = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) sum += w[i] * symbol[i] * std::norm(spectrum[i]);
    const double n = static_cast<double>(grid.size());
    return sum * grid.cell_volume() / n;
}

double spectral_l2_norm_sq(const SpectralGrid& grid, const Spectrum& spectrum) {
    const auto w = grid.mode_weight();
    double sum = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) sum += w[i] * std::norm(spectrum[i]);
    const double n = static_cast<double>(grid.size());
    return sum * grid.cell_volume() / n;
}

double h1_norm_sq(const Spectrum& spectrum, const SpectralGrid& grid) {
    const auto w = grid.mode_weight();
    const auto ksq = grid.wavenumber_sq();
    double sum = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        sum += w[i] * (1.0 + ksq[i]) * std::norm(spectrum[i]);
    return sum * grid.cell_volume() / static_cast<double>(grid.size());
}

double gradient_norm_sq(const Spectrum& spectrum, const SpectralGrid& grid) {
    return spectral_quadratic_form(grid, spectrum, grid.wavenumber_sq());
}

double lebesgue_norm(const ScalarField& field, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
    if (std::isinf(p)) return field.max_abs();
    double sum = 0.0;
    if (p == 2.0) {
        for (double v : field.values()) sum += v * v;
        return std::sqrt(sum * field.grid().cell_volume());
    }
    for (double v : field.values()) sum += std::pow(std::abs(v), p);
    return std::pow(sum * field.grid().cell_volume(), 1.0 / p);
}

double sobolev_h1_norm(const ScalarField& field) {
    return std::sqrt(h1_norm_sq(to_spectrum(field), field.grid()));
}

double spectral_tail_fraction(const SpectralGrid& grid, const Spectrum& spectrum,
                              double threshold) {
    const auto w = grid.mode_weight();
    const auto r = grid.relative_mode_radius();
    const auto ksq = grid.wavenumber_sq();
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double e = w[i] * (1.0 + ksq[i]) * std::norm(spectrum[i]);
        total += e;
        if (r[i] > threshold) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double periodic_displacement(double x, double center, double half_length) noexcept {
    const double period = 2.0 * half_length;
    double d = std::fmod(x - center + half_length, period);
    if (d < 0) d += period;
    return d - half_length;
}

} // namespace kgsys
