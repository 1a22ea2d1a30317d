#include "kgsys/profiles.hpp"

#include "kgsys/field_io.hpp"
#include "kgsys/littlewood_paley.hpp"
#include "kgsys/report_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace kgsys {

namespace {

void multiply(Spectrum& s, std::span<const double> symbol) {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= symbol[i];
}

void multiply(SpectralPhase& p, std::span<const double> symbol) {
    for (auto* s : {&p.u1, &p.u2, &p.v1, &p.v2}) multiply(*s, symbol);
}

std::vector<double> block_symbol(const SpectralGrid& g, int lo, int hi) {
    const auto ksq = g.wavenumber_sq();
    std::vector<double> out(ksq.size(), 0.0);
    for (std::size_t i = 0; i < ksq.size(); ++i) {
        const double k = std::sqrt(ksq[i]);
        for (int j = std::max(lo, 0); j <= hi; ++j) out[i] += lp_symbol({j}, k);
    }
    return out;
}

double l2_sq(const SpectralPhase& p) {
    const auto& g = p.grid;
    return spectral_l2_norm_sq(g, p.u1) + spectral_l2_norm_sq(g, p.u2) + spectral_l2_norm_sq(g, p.v1) +
           spectral_l2_norm_sq(g, p.v2);
}

// u components of S(t) applied to a spectral phase.
std::pair<Spectrum, Spectrum> free_positions(const SpectralPhase& s, double t) {
    const auto omega = s.grid.bessel_symbol();
    Spectrum a(s.u1.size()), b(s.u2.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double c = std::cos(omega[i] * t);
        const double sn = std::sin(omega[i] * t) / omega[i];
        a[i] = c * s.u1[i] + sn * s.v1[i];
        b[i] = c * s.u2[i] + sn * s.v2[i];
    }
    return {std::move(a), std::move(b)};
}

std::vector<double> time_samples(const ExtractionOptions& o) {
    if (!(o.t_step > 0.0) || o.t_max < o.t_min) throw std::invalid_argument("invalid detection time window");
    std::vector<double> ts;
    const int count = static_cast<int>(std::floor((o.t_max - o.t_min) / o.t_step + 1e-9));
    for (int k = 0; k <= count; ++k) ts.push_back(o.t_min + o.t_step * k);
    return ts;
}

double outer_fraction(const PhasePoint& p) {
    const auto& g = p.grid();
    const double edge = 0.9 * g.half_length();
    double outer = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.point(i);
        bool out = false;
        for (int a = 0; a < g.dim(); ++a) out = out || std::abs(x[a]) >= edge;
        if (out) outer = std::max({outer, std::abs(p.pair.u1[i]), std::abs(p.pair.u2[i]), std::abs(p.v1[i]), std::abs(p.v2[i])});
    }
    const double scale = std::max({p.pair.u1.max_abs(), p.pair.u2.max_abs(), p.v1.max_abs(), p.v2.max_abs()});
    return scale > 0.0 ? outer / scale : 0.0;
}

PhasePoint seeded_noise(const SpectralGrid& g, double amplitude, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    auto draw = [&] {
        ScalarField f(g);
        for (std::size_t i = 0; i < g.size(); ++i) f[i] = normal(rng);
        return f;
    };
    PhasePoint p{{draw(), draw()}, draw(), draw()};
    auto s = SpectralPhase::from(p);
    multiply(s, block_symbol(g, 0, 1));
    p = s.to_phase();
    const double n = phase_norm(p);
    if (n > 0.0) p *= amplitude / n;
    return p;
}

PhasePoint pull_back(const PhasePoint& member, const Shift& shift) {
    std::vector<double> back(shift.x.size());
    for (std::size_t a = 0; a < back.size(); ++a) back[a] = -shift.x[a];
    return free_evolve(translate(member, back), shift.t);
}

} // namespace

double free_energy(const PhasePoint& phase) { return phase_norm_sq(phase); }

PhasePoint translate(const PhasePoint& phase, std::span<const double> shift) {
    const auto& g = phase.grid();
    bool zero = true;
    for (double s : shift) zero = zero && s == 0.0;
    if (zero) return phase;
    auto s = SpectralPhase::from(phase);
    const std::size_t m = g.spectral_size();
    std::vector<double> arg(m, 0.0);
    for (int a = 0; a < g.dim() && a < static_cast<int>(shift.size()); ++a) {
        const auto k = g.wavevector_component(a);
        for (std::size_t i = 0; i < m; ++i) arg[i] -= k[i] * shift[a];
    }
    for (std::size_t i = 0; i < m; ++i) {
        const Complex e = std::polar(1.0, arg[i]);
        s.u1[i] *= e;
        s.u2[i] *= e;
        s.v1[i] *= e;
        s.v2[i] *= e;
    }
    return s.to_phase();
}

PhasePoint place_bubble(const PhasePoint& datum, const Shift& shift) {
    return translate(free_evolve(datum, -shift.t), shift.x);
}

std::vector<PhasePoint> synthesize_sequence(const SpectralGrid& grid, const std::vector<BubbleSpec>& bubbles,
                                            double noise_amplitude, int n_count, std::uint64_t seed) {
    if (n_count < 1) throw std::invalid_argument("sequence needs at least one member");
    if (noise_amplitude < 0.0) throw std::invalid_argument("noise amplitude must be >= 0");
    for (std::size_t j = 0; j < bubbles.size(); ++j) {
        if (!(bubbles[j].datum.grid() == grid)) throw std::invalid_argument("bubble " + std::to_string(j) + " is on another grid");
        if (static_cast<int>(bubbles[j].shifts.size()) != n_count)
            throw std::invalid_argument("bubble " + std::to_string(j) + " needs one shift per member");
    }
    std::mt19937_64 rng(seed);
    std::vector<PhasePoint> seq;
    seq.reserve(n_count);
    for (int n = 0; n < n_count; ++n) {
        PhasePoint u = PhasePoint::zeros(grid);
        for (std::size_t j = 0; j < bubbles.size(); ++j) {
            const auto placed = place_bubble(bubbles[j].datum, bubbles[j].shifts[n]);
            if (outer_fraction(placed) > 1e-6)
                throw std::invalid_argument("bubble " + std::to_string(j) + " leaves the box at member " + std::to_string(n));
            u.add_scaled(1.0, placed);
        }
        if (noise_amplitude > 0.0) u.add_scaled(1.0, seeded_noise(grid, noise_amplitude, rng));
        seq.push_back(std::move(u));
    }
    return seq;
}

Detection detect(const PhasePoint& member, const ExtractionOptions& o, int only_block) {
    const auto& g = member.grid();
    const auto s = SpectralPhase::from(member);
    const auto ts = time_samples(o);
    const int blocks = lp_block_count(g);
    const int lo = only_block >= 0 ? only_block : 0;
    const int hi = only_block >= 0 ? only_block : blocks - 1;

    std::vector<std::vector<double>> symbols;
    for (int j = lo; j <= hi; ++j) symbols.push_back(block_symbol(g, j, j));

    Detection best;
    best.nu = -1.0;
    std::vector<double> buf(g.size());
    for (int j = lo; j <= hi; ++j) {
        const double weight = std::pow(2.0, -0.5 * g.dim() * j);
        for (double t : ts) {
            const auto [a, b] = free_positions(s, t);
            for (const Spectrum* src : {&a, &b}) {
                Spectrum p = *src;
                multiply(p, symbols[j - lo]);
                g.inverse(p, buf);
                std::size_t arg = 0;
                double peak = -1.0;
                for (std::size_t i = 0; i < buf.size(); ++i)
                    if (std::abs(buf[i]) > peak + 1e-12 * std::max(1.0, peak)) {
                        peak = std::abs(buf[i]);
                        arg = i;
                    }
                const double nu = weight * peak;
                if (nu > best.nu + 1e-12) {
                    best.nu = nu;
                    best.block = j;
                    best.t = t;
                    const auto x = g.point(arg);
                    best.x.assign(x.begin(), x.begin() + g.dim());
                }
            }
        }
    }
    best.nu = std::max(best.nu, 0.0);
    return best;
}

Decomposition extract_profiles(const std::vector<PhasePoint>& sequence, const ExtractionOptions& o) {
    if (sequence.empty()) throw std::invalid_argument("empty sequence");
    const auto& g = sequence.front().grid();
    for (const auto& u : sequence)
        if (!(u.grid() == g)) throw std::invalid_argument("sequence members must share one grid");
    if (o.max_bubbles < 0 || !(o.tail_fraction > 0.0 && o.tail_fraction <= 1.0))
        throw std::invalid_argument("invalid extraction options");

    Decomposition d;
    d.remainders = sequence;
    const int count = static_cast<int>(sequence.size());
    const int tail_start = std::min(count - 1, static_cast<int>(std::floor(count * (1.0 - o.tail_fraction))));

    const auto window = ScalarField::from_function(g, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += x[a] * x[a];
        return lp_bump(std::sqrt(r2) / o.localization_radius);
    });

    while (true) {
        const auto top = detect(d.remainders.back(), o);
        d.final_nu = top.nu;
        if (top.nu < o.nu_floor) break;
        if (static_cast<int>(d.bubbles.size()) == o.max_bubbles) {
            d.complete = false;
            break;
        }

        BubbleSpec bubble{PhasePoint::zeros(g), {}};
        for (int n = 0; n < count; ++n) {
            const auto det = n == count - 1 ? top : detect(d.remainders[n], o, top.block);
            bubble.shifts.push_back({det.t, det.x});
        }

        auto avg = SpectralPhase::from(PhasePoint::zeros(g));
        for (int n = tail_start; n < count; ++n) {
            const auto w = SpectralPhase::from(pull_back(d.remainders[n], bubble.shifts[n]));
            for (auto [dst, src] : {std::pair{&avg.u1, &w.u1}, std::pair{&avg.u2, &w.u2}, std::pair{&avg.v1, &w.v1},
                                    std::pair{&avg.v2, &w.v2}})
                for (std::size_t i = 0; i < dst->size(); ++i) (*dst)[i] += (*src)[i] / static_cast<double>(count - tail_start);
        }
        multiply(avg, block_symbol(g, top.block - o.filter_margin, top.block + o.filter_margin));
        PhasePoint profile = avg.to_phase();
        for (auto* f : {&profile.pair.u1, &profile.pair.u2, &profile.v1, &profile.v2})
            for (std::size_t i = 0; i < f->size(); ++i) (*f)[i] *= window[i];
        bubble.datum = profile;

        for (int n = 0; n < count; ++n) d.remainders[n].add_scaled(-1.0, place_bubble(profile, bubble.shifts[n]));
        d.nu_series.push_back(top.nu);
        d.block_levels.push_back(top.block);
        d.bubbles.push_back(std::move(bubble));
    }
    return d;
}

OrthogonalityReport orthogonality_check(const Decomposition& d, const std::vector<PhasePoint>& sequence,
                                        const ExtractionOptions& o) {
    if (d.remainders.size() != sequence.size()) throw std::invalid_argument("decomposition does not match the sequence");
    OrthogonalityReport r;
    const auto& g = sequence.front().grid();
    double bubble_sum = 0.0;
    for (const auto& b : d.bubbles) bubble_sum += free_energy(b.datum);
    for (std::size_t n = 0; n < sequence.size(); ++n) {
        const double total = free_energy(sequence[n]);
        const double defect = std::abs(total - bubble_sum - free_energy(d.remainders[n]));
        r.defects.push_back(total > 0.0 ? defect / total : defect);
    }
    const std::size_t half = sequence.size() / 2;
    for (std::size_t n = half + 1; n < r.defects.size(); ++n)
        if (r.defects[n] > r.defects[n - 1] + 1e-9) r.nonincreasing_tail = false;

    const auto low = block_symbol(g, 0, 3);
    for (std::size_t n = 0; n < sequence.size(); ++n) {
        double worst = 0.0;
        for (const auto& b : d.bubbles) {
            auto w = SpectralPhase::from(pull_back(d.remainders[n], b.shifts[n]));
            multiply(w, low);
            worst = std::max(worst, std::sqrt(l2_sq(w)));
        }
        r.weak_limit_proxy.push_back(worst);
    }

    const auto last = SpectralPhase::from(d.remainders.back());
    for (double t : time_samples(o)) {
        const auto [a, b] = free_positions(last, t);
        const auto fa = from_spectrum(g, a), fb = from_spectrum(g, b);
        r.remainder_l3 = std::max(r.remainder_l3, std::hypot(lebesgue_norm(fa, 3.0), lebesgue_norm(fb, 3.0)));
        r.remainder_l4 = std::max(r.remainder_l4, std::hypot(lebesgue_norm(fa, 4.0), lebesgue_norm(fb, 4.0)));
    }

    for (std::size_t j = 0; j < d.bubbles.size(); ++j) {
        const double n = std::sqrt(l2_sq(SpectralPhase::from(d.bubbles[j].datum)));
        const double ratio = n > 0.0 ? d.nu_series[j] / n : 0.0;
        r.detection_ratios.push_back(ratio);
        r.detection_constant = std::max(r.detection_constant, ratio);
    }
    return r;
}

std::string decomposition_json(const Decomposition& d, const OrthogonalityReport& r,
                               const std::filesystem::path& dir) {
    nlohmann::json bubbles = nlohmann::json::array();
    for (std::size_t j = 0; j < d.bubbles.size(); ++j) {
        const auto& b = d.bubbles[j];
        nlohmann::json shifts = nlohmann::json::array();
        for (const auto& s : b.shifts) shifts.push_back({{"t", s.t}, {"x", s.x}});
        nlohmann::json entry = {{"energy", free_energy(b.datum)},
                                {"nu", d.nu_series[j]},
                                {"block", d.block_levels[j]},
                                {"shifts", shifts}};
        if (!dir.empty()) {
            const auto path = dir / ("profile_" + std::to_string(j) + ".kgdu");
            const std::vector<ScalarField> fields{b.datum.pair.u1, b.datum.pair.u2, b.datum.v1, b.datum.v2};
            write_field_snapshot(path, fields);
            entry["snapshot"] = path.filename().string();
        }
        bubbles.push_back(entry);
    }
    return nlohmann::json{{"bubbles", bubbles},
                          {"complete", d.complete},
                          {"final_nu", d.final_nu},
                          {"defects", r.defects},
                          {"nonincreasing_tail", r.nonincreasing_tail},
                          {"remainder_l3", r.remainder_l3},
                          {"remainder_l4", r.remainder_l4},
                          {"weak_limit_proxy", r.weak_limit_proxy},
                          {"detection_constant", r.detection_constant}}
        .dump(2);
}

} // namespace kgsys
