#include "kgsys/classify.hpp"

#include "kgsys/report_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace kgsys {

const char* to_string(Region r) noexcept {
    switch (r) {
    case Region::PS_plus: return "PS_plus";
    case Region::PS_minus: return "PS_minus";
    case Region::above_threshold: return "above_threshold";
    }
    return "unknown";
}

const char* to_string(DichotomyVerdict v) noexcept {
    switch (v) {
    case DichotomyVerdict::global_bounded: return "global_bounded";
    case DichotomyVerdict::blowup_detected: return "blowup_detected";
    case DichotomyVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

RegionVerdict classify_values(double E, double K0, double h1_sq, double h0) noexcept {
    RegionVerdict v;
    v.E = E;
    v.K0 = K0;
    v.margin = h0 - E;
    v.borderline = std::abs(K0) <= kBorderlineK0 * h1_sq;
    if (!(E < h0))
        v.region = Region::above_threshold;
    else
        v.region = K0 >= 0.0 ? Region::PS_plus : Region::PS_minus;
    return v;
}

RegionVerdict classify(const PhasePoint& phase, const NonlinearityParams& params, double h0) {
    const auto m = measure_pair(phase.pair, params);
    const double e = 0.5 * (m.h1_sq + kinetic_norm_sq(phase)) - 0.25 * m.quartic;
    return classify_values(e, m.h1_sq - m.quartic, m.h1_sq, h0);
}

namespace {

double spectral_norm_sq(const SpectralPhase& s) {
    const auto& g = s.grid;
    return h1_norm_sq(s.u1, g) + h1_norm_sq(s.u2, g) + spectral_l2_norm_sq(g, s.v1) + spectral_l2_norm_sq(g, s.v2);
}

SpectralPhase difference(SpectralPhase a, const SpectralPhase& b) {
    for (std::size_t i = 0; i < a.u1.size(); ++i) {
        a.u1[i] -= b.u1[i];
        a.u2[i] -= b.u2[i];
        a.v1[i] -= b.v1[i];
        a.v2[i] -= b.v2[i];
    }
    return a;
}

std::vector<SpectralPhase> pulled_back(const Trajectory& traj) {
    std::vector<SpectralPhase> out;
    out.reserve(traj.snapshots.size());
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        auto s = SpectralPhase::from(traj.snapshots[i]);
        free_evolve_in_place(s, -traj.snapshot_times[i]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> free_fit_errors(const std::vector<SpectralPhase>& pulled) {
    std::vector<double> out;
    out.reserve(pulled.size());
    for (const auto& p : pulled) out.push_back(std::sqrt(spectral_norm_sq(difference(p, pulled.back()))));
    return out;
}

double pair_l6(const PhasePoint& p) {
    const double a = lebesgue_norm(p.pair.u1, 6.0);
    const double b = lebesgue_norm(p.pair.u2, 6.0);
    return std::sqrt(a * a + b * b);
}

} // namespace

DichotomyReport run_dichotomy(const PhasePoint& phase, const NonlinearityParams& params, double h0,
                              const DichotomyConfig& cfg) {
    DichotomyReport rep;
    rep.initial = classify(phase, params, h0);
    if (rep.initial.region == Region::above_threshold)
        throw std::invalid_argument("datum has E = " + format_number(rep.initial.E) + " >= h0 = " +
                                    format_number(h0) + "; no dichotomy applies");
    rep.horizon = cfg.horizon;

    const auto traj = evolve(phase, cfg.horizon, cfg.policy, params);
    rep.status = traj.status;
    rep.stop_time = traj.stop_time;
    rep.initial_norm = traj.phase_norm.front();
    rep.peak_h1 = 0.0;
    for (double n : traj.phase_norm)
        if (std::isfinite(n)) rep.peak_h1 = std::max(rep.peak_h1, n);
    rep.strichartz_final = traj.strichartz_running.back();
    rep.energy_drift = traj.max_energy_drift;

    // The step that triggered blow-up detection is excluded from the region check.
    std::size_t checked = traj.series.size();
    if (traj.status == RunStatus::blowup_detected && checked > 0) --checked;
    for (std::size_t i = 0; i < checked; ++i) {
        const auto& r = traj.series[i];
        const auto v = classify_values(r.E, r.K0, r.h1_norm_sq, h0);
        if (!v.borderline && v.region != rep.initial.region) ++rep.region_flips;
    }

    const bool expect_blowup = rep.initial.region == Region::PS_minus;
    switch (traj.status) {
    case RunStatus::blowup_detected:
        rep.escape_time = traj.stop_time;
        rep.verdict = DichotomyVerdict::blowup_detected;
        if (!expect_blowup) {
            rep.verdict = DichotomyVerdict::inconclusive;
            rep.note = "blow-up detected for a PS_plus datum";
        }
        break;
    case RunStatus::resolution_exhausted:
        rep.verdict = DichotomyVerdict::inconclusive;
        rep.note = "resolution exhausted at t = " + format_number(traj.stop_time);
        break;
    default:
        rep.free_fit_error_series = free_fit_errors(pulled_back(traj));
        rep.free_fit_times = traj.snapshot_times;
        if (rep.peak_h1 < cfg.bounded_factor * rep.initial_norm || rep.initial_norm == 0.0) {
            rep.verdict = DichotomyVerdict::global_bounded;
            if (expect_blowup) {
                rep.verdict = DichotomyVerdict::inconclusive;
                rep.note = "PS_minus datum reached the horizon without blow-up";
            }
        } else {
            rep.verdict = DichotomyVerdict::inconclusive;
            rep.note = "norm grew beyond the bounded factor without escaping";
        }
    }
    if (rep.region_flips > 0 && rep.note.empty())
        rep.note = std::to_string(rep.region_flips) + " diagnostic steps changed region";
    return rep;
}

double wrap_time(const SpectralGrid& grid, double support_radius) noexcept {
    return std::max(0.0, grid.half_length() - support_radius);
}

ScatteringReport scattering_diagnostic(const Trajectory& traj, double start, double window) {
    if (traj.status != RunStatus::completed)
        throw std::invalid_argument(std::string("scattering diagnostic needs a completed run (status ") +
                                    to_string(traj.status) + ")");
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
    const auto pulled = pulled_back(traj);
    const auto& ts = traj.snapshot_times;

    ScatteringReport rep;
    rep.free_fit_times = ts;
    rep.free_fit_error = free_fit_errors(pulled);
    rep.datum_norm = std::sqrt(spectral_norm_sq(pulled.back()));

    auto nearest = [&](double t) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < ts.size(); ++i)
            if (std::abs(ts[i] - t) < std::abs(ts[best] - t)) best = i;
        return best;
    };
    std::vector<std::size_t> idx;
    for (double t = ts.back(); t >= start - 1e-9; t -= window) idx.push_back(nearest(t));
    std::reverse(idx.begin(), idx.end());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        rep.window_times.push_back(ts[idx[k]]);
        if (k > 0) rep.increments.push_back(std::sqrt(spectral_norm_sq(difference(pulled[idx[k]], pulled[idx[k - 1]]))));
    }
    rep.monotone = !rep.increments.empty();
    for (std::size_t k = 1; k < rep.increments.size(); ++k)
        if (!(rep.increments[k] < rep.increments[k - 1])) rep.monotone = false;
    if (!rep.increments.empty())
        rep.final_increment_relative =
            rep.datum_norm > 0.0 ? rep.increments.back() / rep.datum_norm : rep.increments.back();
    return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

PerturbationReport perturbation_test(const PhasePoint& phase, const std::vector<double>& deltas,
                                     const std::vector<PhasePoint>& directions, const NonlinearityParams& params,
                                     double horizon, const StepPolicy& policy) {
    const auto base = evolve(phase, horizon, policy, params);
    if (base.status != RunStatus::completed)
        throw std::invalid_argument(std::string("base run did not complete: ") + to_string(base.status));

    PerturbationReport rep;
    for (std::size_t d = 0; d < directions.size(); ++d) {
        const double n = phase_norm(directions[d]);
        if (!(n > 0.0)) throw std::invalid_argument("perturbation direction has zero norm");
        std::vector<double> xs, ys, zs;
        for (double delta : deltas) {
            PerturbationRow row;
            row.delta = delta;
            row.direction = static_cast<int>(d);
            if (delta == 0.0) {
                row.status = RunStatus::completed;
                rep.rows.push_back(row);
                continue;
            }
            PhasePoint p = phase;
            p.add_scaled(delta / n, directions[d]);
            const auto run = evolve(p, horizon, policy, params);
            row.status = run.status;
            row.hypothesis_violated = run.status != RunStatus::completed;
            double acc = 0.0, prev = 0.0, t_prev = 0.0;
            bool first = true;
            for (std::size_t i = 0, j = 0; i < run.snapshots.size(); ++i) {
                while (j < base.snapshots.size() && base.snapshot_times[j] < run.snapshot_times[i] - 1e-9) ++j;
                if (j == base.snapshots.size()) break;
                if (std::abs(base.snapshot_times[j] - run.snapshot_times[i]) > 1e-9) continue;
                const auto diff = run.snapshots[i] - base.snapshots[j];
                row.sup_distance = std::max(row.sup_distance, phase_norm(diff));
                const double l6 = pair_l6(diff);
                const double c = l6 * l6 * l6;
                if (!first) acc += 0.5 * (run.snapshot_times[i] - t_prev) * (c + prev);
                first = false;
                prev = c;
                t_prev = run.snapshot_times[i];
            }
            row.strichartz_distance = std::cbrt(acc);
            if (row.hypothesis_violated) {
                ++rep.violations;
            } else {
                xs.push_back(delta);
                ys.push_back(row.sup_distance);
                zs.push_back(row.strichartz_distance);
            }
            rep.rows.push_back(row);
        }
        // Directions are pooled by fitting each and averaging.
        const double w = 1.0 / static_cast<double>(directions.size());
        rep.exponent_sup += w * loglog_slope(xs, ys);
        rep.exponent_strichartz += w * loglog_slope(xs, zs);
    }
    return rep;
}

namespace {

nlohmann::json verdict_json(const RegionVerdict& v) {
    return {{"region", to_string(v.region)}, {"E", v.E}, {"K0", v.K0}, {"margin", v.margin}, {"borderline", v.borderline}};
}

} // namespace

std::string to_json(const RegionVerdict& v) { return verdict_json(v).dump(2); }

std::string to_json(const DichotomyReport& r) {
    nlohmann::json j = {{"initial", verdict_json(r.initial)},
                        {"verdict", to_string(r.verdict)},
                        {"status", to_string(r.status)},
                        {"horizon", r.horizon},
                        {"stop_time", r.stop_time},
                        {"initial_norm", r.initial_norm},
                        {"peak_h1", r.peak_h1},
                        {"strichartz_final", r.strichartz_final},
                        {"energy_drift", r.energy_drift},
                        {"region_flips", r.region_flips},
                        {"free_fit_error_series", r.free_fit_error_series},
                        {"free_fit_times", r.free_fit_times},
                        {"note", r.note}};
    j["escape_time"] = r.escape_time ? nlohmann::json(*r.escape_time) : nlohmann::json(nullptr);
    return j.dump(2);
}

std::string to_json(const ScatteringReport& r) {
    return nlohmann::json{{"window_times", r.window_times},
                          {"increments", r.increments},
                          {"datum_norm", r.datum_norm},
                          {"final_increment_relative", r.final_increment_relative},
                          {"monotone", r.monotone},
                          {"free_fit_times", r.free_fit_times},
                          {"free_fit_error", r.free_fit_error}}
        .dump(2);
}

std::string to_json(const PerturbationReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"delta", row.delta},
                        {"direction", row.direction},
                        {"sup_distance", row.sup_distance},
                        {"strichartz_distance", row.strichartz_distance},
                        {"status", to_string(row.status)},
                        {"hypothesis_violated", row.hypothesis_violated}});
    return nlohmann::json{{"rows", rows},
                          {"exponent_sup", r.exponent_sup},
                          {"exponent_strichartz", r.exponent_strichartz},
                          {"violations", r.violations}}
        .dump(2);
}

void write_ensemble_csv(std::ostream& os, const std::vector<EnsembleRow>& rows, const std::string& comment) {
    CsvWriter csv(os, {"index", "E", "K0", "margin", "region", "verdict", "escape_time", "final_increment"}, comment);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i].report;
        csv << static_cast<double>(i) << r.initial.E << r.initial.K0 << r.initial.margin << to_string(r.initial.region)
            << to_string(r.verdict);
        if (r.escape_time) csv << *r.escape_time; else csv << "";
        if (rows[i].final_increment) csv << *rows[i].final_increment; else csv << "";
        csv.end_row();
    }
}

} // namespace kgsys
