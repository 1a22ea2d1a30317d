#include "kgsys/scenario.hpp"

#include "kgsys/bumps.hpp"
#include "kgsys/classify.hpp"
#include "kgsys/field_io.hpp"
#include "kgsys/groundstate.hpp"
#include "kgsys/lorentz.hpp"
#include "kgsys/profiles.hpp"
#include "kgsys/report_format.hpp"
#include "kgsys/workers.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace kgsys {

namespace fs = std::filesystem;

const char* to_string(ScenarioKind kind) noexcept {
    switch (kind) {
    case ScenarioKind::groundstate_sweep: return "groundstate_sweep";
    case ScenarioKind::dichotomy_ensemble: return "dichotomy_ensemble";
    case ScenarioKind::lorentz_check: return "lorentz_check";
    case ScenarioKind::profile_test: return "profile_test";
    case ScenarioKind::perturbation_study: return "perturbation_study";
    case ScenarioKind::single_run: return "single_run";
    }
    return "unknown";
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// parsing

std::string where(const YAML::Node& node) {
    const auto m = node.Mark();
    return m.is_null() ? std::string() : "line " + std::to_string(m.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& what) {
    throw ConfigError(where(node) + "key '" + key + "': " + what);
}

class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsMap()) fail(node_, path_, "expected a mapping");
    }

    bool present() const { return node_ && node_.IsMap(); }
    bool has(const std::string& key) const { return present() && node_[key]; }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!present()) return fallback;
        const YAML::Node v = node_[key];
        if (!v) return fallback;
        try {
            return v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, qualified(key), "cannot convert value '" + YAML::Dump(v) + "'");
        }
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(present() ? node_[key] : YAML::Node(), qualified(key));
    }

    YAML::Node raw(const std::string& key) const { return present() ? node_[key] : YAML::Node(); }

    /// Rejects keys that were never read.
    void finish() const {
        if (!present()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto k = it->first.as<std::string>();
            if (!seen_.count(k)) fail(it->first, qualified(k), "unknown key");
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const YAML::Node& node() const { return node_; }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

ScenarioKind parse_kind(const YAML::Node& node) {
    static const std::map<std::string, ScenarioKind> kinds = {
        {"groundstate_sweep", ScenarioKind::groundstate_sweep},
        {"dichotomy_ensemble", ScenarioKind::dichotomy_ensemble},
        {"lorentz_check", ScenarioKind::lorentz_check},
        {"profile_test", ScenarioKind::profile_test},
        {"perturbation_study", ScenarioKind::perturbation_study},
        {"single_run", ScenarioKind::single_run},
    };
    if (!node) throw ConfigError("key 'kind': missing");
    const auto it = kinds.find(node.as<std::string>());
    if (it == kinds.end()) fail(node, "kind", "unknown scenario kind '" + node.as<std::string>() + "'");
    return it->second;
}

template <class Check>
void validated(const YAML::Node& node, const std::string& key, Check&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        fail(node, key, e.what());
    }
}

void parse_datum(Section s, Scenario& sc) {
    auto& d = sc.datum;
    d.type = s.get<std::string>("type", d.type);
    if (d.type != "gaussian" && d.type != "ground_state_ray" && d.type != "random_bumps")
        fail(s.raw("type"), s.qualified("type"), "expected gaussian, ground_state_ray or random_bumps");
    const auto a = s.get<std::vector<double>>("amplitude", {d.amplitude1, d.amplitude2});
    if (a.size() != 2) fail(s.raw("amplitude"), s.qualified("amplitude"), "expected two amplitudes");
    d.amplitude1 = a[0];
    d.amplitude2 = a[1];
    d.width = s.get("width", d.width);
    d.separation = s.get("separation", d.separation);
    d.velocity = s.get("velocity", d.velocity);
    d.scale = s.get("scale", d.scale);
    d.fraction = s.get("fraction", d.fraction);
    const auto branch = s.get<std::string>("branch", "plus");
    if (branch != "plus" && branch != "minus") fail(s.raw("branch"), s.qualified("branch"), "expected plus or minus");
    d.minus_branch = branch == "minus";
    if (!(d.width > 0.0)) fail(s.raw("width"), s.qualified("width"), "must be positive");
    if (d.type == "random_bumps" && !(d.fraction > 0.0 && d.fraction < 1.0))
        fail(s.raw("fraction"), s.qualified("fraction"), "must lie in (0, 1)");
    s.finish();
}

void positive(Section& s, const std::string& key, double value) {
    if (!(value > 0.0)) fail(s.raw(key), s.qualified(key), "must be positive");
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError("config must be a mapping at top level");

    Scenario sc;
    sc.config_text = text;
    sc.config_hash = sha256_hex(text);
    Section top(root, "");
    top.get<std::string>("kind", "");
    sc.kind = parse_kind(root["kind"]);
    sc.seed = top.get<std::uint64_t>("seed", sc.seed);
    sc.output_dir = top.get<std::string>("output_dir", sc.output_dir.string());

    {
        auto s = top.child("params");
        sc.params.beta = s.get("beta", sc.params.beta);
        sc.params.mu1 = s.get("mu1", sc.params.mu1);
        sc.params.mu2 = s.get("mu2", sc.params.mu2);
        s.finish();
        validated(s.node(), "params", [&] { sc.params.validate(); });
    }
    {
        auto s = top.child("grid");
        sc.grid.dim = s.get("dim", sc.grid.dim);
        sc.grid.points = s.get("points", sc.grid.points);
        sc.grid.half_length = s.get("half_length", sc.grid.half_length);
        s.finish();
        validated(s.node(), "grid", [&] { sc.grid.make(); });
    }
    {
        auto s = top.child("policy");
        auto& p = sc.policy;
        p.dt_base = s.get("dt_base", p.dt_base);
        p.dt_min = s.get("dt_min", p.dt_min);
        p.amplitude_guard = s.get("amplitude_guard", p.amplitude_guard);
        p.snapshot_stride = s.get("snapshot_stride", p.snapshot_stride);
        p.escape_factor = s.get("escape_factor", p.escape_factor);
        p.growth_onset = s.get("growth_onset", p.growth_onset);
        s.finish();
        validated(s.node(), "policy", [&] { p.validate(); });
    }

    const bool uses_datum = sc.kind == ScenarioKind::lorentz_check || sc.kind == ScenarioKind::perturbation_study ||
                            sc.kind == ScenarioKind::single_run;
    if (uses_datum) parse_datum(top.child("datum"), sc);

    switch (sc.kind) {
    case ScenarioKind::groundstate_sweep: {
        auto s = top.child("sweep");
        sc.betas = s.get("betas", std::vector<double>{0.0, 1.0, 2.0});
        const auto solver = s.get<std::string>("solver", "radial");
        if (solver != "radial" && solver != "grid") fail(s.raw("solver"), s.qualified("solver"), "expected radial or grid");
        sc.radial_solver = solver == "radial";
        for (double b : sc.betas)
            if (!(b >= 0.0)) fail(s.raw("betas"), s.qualified("betas"), "beta must be >= 0");
        s.finish();
        break;
    }
    case ScenarioKind::dichotomy_ensemble: {
        auto s = top.child("ensemble");
        sc.rays = s.get("rays", sc.rays);
        sc.bumps = s.get("bumps", sc.bumps);
        sc.fraction_min = s.get("fraction_min", sc.fraction_min);
        sc.fraction_max = s.get("fraction_max", sc.fraction_max);
        sc.horizon = s.get("horizon", 30.0);
        sc.window = s.get("window", sc.window);
        if (sc.bumps < 0) fail(s.raw("bumps"), s.qualified("bumps"), "must be >= 0");
        if (!(sc.fraction_min > 0.0 && sc.fraction_min <= sc.fraction_max && sc.fraction_max < 1.0))
            fail(s.raw("fraction_max"), s.qualified("fraction_max"), "need 0 < fraction_min <= fraction_max < 1");
        positive(s, "horizon", sc.horizon);
        positive(s, "window", sc.window);
        s.finish();
        break;
    }
    case ScenarioKind::lorentz_check: {
        auto s = top.child("lorentz");
        sc.duration = s.get("duration", sc.duration);
        sc.stride = s.get("stride", sc.stride);
        sc.target_time = s.get("target", sc.target_time);
        sc.lambdas = s.get("lambdas", sc.lambdas);
        sc.axis = s.get("axis", sc.axis);
        positive(s, "duration", sc.duration);
        positive(s, "stride", sc.stride);
        for (double l : sc.lambdas)
            validated(s.raw("lambdas"), s.qualified("lambdas"), [&] { BoostParams{l, sc.axis}.validate(sc.grid.dim); });
        s.finish();
        break;
    }
    case ScenarioKind::profile_test: {
        auto s = top.child("profiles");
        sc.bubble_count = s.get("bubbles", sc.bubble_count);
        sc.members = s.get("members", sc.members);
        sc.noise = s.get("noise", sc.noise);
        sc.nu_floor = s.get("nu_floor", sc.nu_floor);
        if (sc.bubble_count < 0 || sc.bubble_count > 2)
            fail(s.raw("bubbles"), s.qualified("bubbles"), "planted sequences carry 0, 1 or 2 bubbles");
        if (sc.members < 2) fail(s.raw("members"), s.qualified("members"), "need at least 2 members");
        if (sc.grid.dim != 1) fail(top.raw("grid"), "grid.dim", "profile_test runs on 1D grids");
        positive(s, "nu_floor", sc.nu_floor);
        s.finish();
        break;
    }
    case ScenarioKind::perturbation_study: {
        auto s = top.child("perturbation");
        sc.deltas = s.get("deltas", sc.deltas);
        sc.directions = s.get("directions", sc.directions);
        sc.horizon = s.get("horizon", sc.horizon);
        if (sc.directions < 1) fail(s.raw("directions"), s.qualified("directions"), "need at least one direction");
        for (double d : sc.deltas)
            if (!(d >= 0.0)) fail(s.raw("deltas"), s.qualified("deltas"), "deltas must be >= 0");
        positive(s, "horizon", sc.horizon);
        s.finish();
        break;
    }
    case ScenarioKind::single_run: {
        auto s = top.child("run");
        sc.horizon = s.get("horizon", sc.horizon);
        positive(s, "horizon", sc.horizon);
        if (s.has("max_energy_drift")) sc.max_energy_drift = s.get("max_energy_drift", 0.0);
        else s.get("max_energy_drift", 0.0);
        const auto expect = s.get<std::string>("expect_status", "");
        if (expect == "completed") sc.expect_status = RunStatus::completed;
        else if (expect == "blowup_detected") sc.expect_status = RunStatus::blowup_detected;
        else if (!expect.empty())
            fail(s.raw("expect_status"), s.qualified("expect_status"), "expected completed or blowup_detected");
        s.finish();
        break;
    }
    }
    top.finish();
    return sc;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

// ---------------------------------------------------------------------------
// running

class Output {
public:
    Output(const Scenario& sc, ScenarioOutcome& outcome) : sc_(sc), outcome_(outcome) {}

    fs::path path(const std::string& name) {
        const auto p = sc_.output_dir / name;
        outcome_.files.push_back(p);
        return p;
    }
    void text(const std::string& name, const std::string& body) {
        std::ofstream os(path(name));
        os << body << '\n';
    }
    template <class Writer>
    void csv(const std::string& name, Writer&& writer) {
        std::ofstream os(path(name));
        writer(os, comment());
    }
    std::string comment() const { return "config_sha256=" + sc_.config_hash + " seed=" + std::to_string(sc_.seed); }
    void check(bool ok, const std::string& failure) {
        if (!ok) {
            outcome_.checks_passed = false;
            outcome_.failures.push_back(failure);
        }
    }

private:
    const Scenario& sc_;
    ScenarioOutcome& outcome_;
};

struct Threshold {
    double level = 0.0;
    FieldPair pair;
};

Threshold threshold(const Scenario& sc, const SpectralGrid& g) {
    sc.params.require_focusing();
    if (g.dim() == 3) {
        const auto r = solve_radial_ground_state(sc.params);
        return {h0(sc.params, 3), r.sample(g)};
    }
    const auto gs = solve_ground_state(sc.params, g);
    return {gs.level, gs.pair};
}

PhasePoint make_datum(const Scenario& sc, const SpectralGrid& g, std::mt19937_64& rng) {
    const auto& d = sc.datum;
    if (d.type == "ground_state_ray") return PhasePoint::at_rest(threshold(sc, g).pair.scaled(d.scale));
    if (d.type == "random_bumps") {
        const double level = threshold(sc, g).level;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const auto bp = random_bump_pair(rng, g.dim());
            const auto pair = bp.sample(g);
            if (const auto s = action_scaling(measure_pair(pair, sc.params), d.fraction * level, d.minus_branch))
                return PhasePoint::at_rest(pair.scaled(*s));
        }
        throw std::runtime_error("no random bump pair reaches the requested fraction of h0");
    }
    BumpPair bp;
    bp.dim = g.dim();
    bp.first = {{{-0.5 * d.separation, 0.0, 0.0}, d.width, d.amplitude1}};
    bp.second = {{{0.5 * d.separation, 0.0, 0.0}, d.width, d.amplitude2}};
    auto pair = bp.sample(g);
    ScalarField v1 = -d.velocity * partial_derivative(pair.u1, 0);
    ScalarField v2 = -d.velocity * partial_derivative(pair.u2, 0);
    return {std::move(pair), std::move(v1), std::move(v2)};
}

void write_phase(Output& out, const std::string& name, const PhasePoint& p) {
    const std::vector<ScalarField> fields{p.pair.u1, p.pair.u2, p.v1, p.v2};
    write_field_snapshot(out.path(name), fields);
}

void groundstate_sweep(const Scenario& sc, Output& out, std::ostream& log) {
    std::vector<GroundStateRow> rows(sc.betas.size());
    std::vector<double> k0_rel(rows.size());
    std::vector<bool> converged(rows.size());
    std::vector<std::optional<FieldPair>> pairs(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        NonlinearityParams p = sc.params;
        p.beta = sc.betas[i];
        if (sc.radial_solver) {
            if (sc.grid.dim != 3) throw std::invalid_argument("the radial solver needs grid.dim = 3");
            const auto r = solve_radial_ground_state(p);
            rows[i] = {p, r.level, r.kind, r.el_residual};
            k0_rel[i] = r.k0_relative;
            converged[i] = r.converged;
        } else {
            const auto gs = solve_ground_state(p, sc.grid.make());
            rows[i] = {p, gs.level, gs.kind, gs.el_residual};
            k0_rel[i] = gs.k0_relative;
            converged[i] = gs.converged;
            pairs[i] = gs.pair;
        }
    });
    out.text("groundstates.json", ground_state_table_json(rows));
    out.csv("groundstates.csv", [&](std::ostream& os, const std::string& c) {
        CsvWriter w(os, {"beta", "mu1", "mu2", "level", "kind", "residual", "k0_relative"}, c);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            w << rows[i].params.beta << rows[i].params.mu1 << rows[i].params.mu2 << rows[i].level
              << to_string(rows[i].kind) << rows[i].residual << k0_rel[i];
            w.end_row();
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (pairs[i]) {
            const std::vector<ScalarField> f{pairs[i]->u1, pairs[i]->u2};
            write_field_snapshot(out.path("groundstate_" + std::to_string(i) + ".kgdu"), f);
        }
        log << "beta " << format_number(rows[i].params.beta) << ": h0 = " << format_number(rows[i].level) << " ("
            << to_string(rows[i].kind) << ")\n";
        out.check(converged[i] && k0_rel[i] <= 1e-6,
                  "beta " + format_number(rows[i].params.beta) + ": minimizer unconverged or off the constraint");
    }
}

void dichotomy_ensemble(const Scenario& sc, Output& out, std::ostream& log) {
    const auto g = sc.grid.make();
    std::vector<PhasePoint> data;
    std::vector<std::string> origin;
    double level = 0.0;
    if (!sc.rays.empty() || sc.bumps > 0) {
        const auto th = threshold(sc, g);
        level = th.level;
        for (double s : sc.rays) {
            data.push_back(PhasePoint::at_rest(th.pair.scaled(s)));
            origin.push_back("ray " + format_number(s));
        }
        std::mt19937_64 rng(sc.seed);
        std::uniform_real_distribution<double> frac(sc.fraction_min, sc.fraction_max);
        for (int i = 0, attempts = 0; i < sc.bumps; ++attempts) {
            if (attempts > 100 * sc.bumps) throw std::runtime_error("could not place the requested bump data");
            const auto pair = random_bump_pair(rng, g.dim()).sample(g);
            const double f = frac(rng);
            const auto s = action_scaling(measure_pair(pair, sc.params), f * level, i % 2 == 1);
            if (!s) continue;
            data.push_back(PhasePoint::at_rest(pair.scaled(*s)));
            origin.push_back("bump E/h0 " + format_number(f));
            ++i;
        }
    }
    DichotomyConfig cfg;
    cfg.horizon = sc.horizon;
    cfg.policy = sc.policy;
    std::vector<EnsembleRow> rows(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        rows[i].report = run_dichotomy(data[i], sc.params, level, cfg);
        const auto& r = rows[i].report;
        if (r.verdict == DichotomyVerdict::global_bounded && !r.free_fit_times.empty() && r.initial_norm > 0.0) {
            // ||V(T - window) - V(T)||, relative to ||U(0)||.
            const double t_mark = r.free_fit_times.back() - sc.window;
            std::size_t k = 0;
            while (k + 1 < r.free_fit_times.size() && r.free_fit_times[k + 1] <= t_mark) ++k;
            rows[i].final_increment = r.free_fit_error_series[k] / r.initial_norm;
        }
    });

    int wrong = 0;
    nlohmann::json reports = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i].report;
        const bool expected = r.region_flips == 0 &&
                              ((r.initial.region == Region::PS_minus && r.verdict == DichotomyVerdict::blowup_detected) ||
                               (r.initial.region == Region::PS_plus && r.verdict == DichotomyVerdict::global_bounded));
        if (!expected) ++wrong;
        auto j = nlohmann::json::parse(to_json(r));
        j["origin"] = origin[i];
        reports.push_back(j);
        log << origin[i] << ": " << to_string(r.initial.region) << " -> " << to_string(r.verdict) << '\n';
    }
    out.csv("ensemble.csv", [&](std::ostream& os, const std::string& c) { write_ensemble_csv(os, rows, c); });
    nlohmann::json summary = {{"count", rows.size()}, {"h0", level}, {"misclassified", wrong}, {"reports", reports}};
    out.text("summary.json", summary.dump(2));
    out.check(wrong == 0, std::to_string(wrong) + " data did not match their region's expected outcome");
}

void lorentz_check(const Scenario& sc, Output& out, std::ostream& log) {
    const auto g = sc.grid.make();
    std::mt19937_64 rng(sc.seed);
    const auto datum = make_datum(sc, g, rng);
    const auto blk = SpacetimeBlock::record(datum, sc.params, sc.duration, sc.stride);
    const auto rot = energy_momentum_rotation_check(blk, sc.axis, sc.lambdas, sc.target_time);
    const auto d = boost_derivative_check(blk, sc.axis, sc.target_time);
    nlohmann::json residuals = nlohmann::json::array();
    for (double l : sc.lambdas)
        residuals.push_back({{"lambda", l}, {"residual", boosted_residual(blk, {l, sc.axis}, sc.target_time)}});
    out.csv("rotation.csv", [&](std::ostream& os, const std::string& c) { write_rotation_csv(os, rot, c); });
    const nlohmann::json report = {{"E", rot.E},
                                   {"P", rot.P},
                                   {"max_rotation_rel_err", rot.max_rel_err},
                                   {"dE_dlambda", d.dE_dlambda},
                                   {"dP_dlambda", d.dP_dlambda},
                                   {"dep_rel_err", d.dep_rel_err},
                                   {"dpe_rel_err", d.dpe_rel_err},
                                   {"interpolation_error_estimate", blk.interpolation_error_estimate()},
                                   {"boosted_residual", residuals}};
    out.text("lorentz.json", report.dump(2));
    log << "rotation " << format_number(rot.max_rel_err) << ", DEP " << format_number(d.dep_rel_err) << '\n';
    out.check(rot.max_rel_err <= 2e-3, "rotation law deviation " + format_number(rot.max_rel_err));
    out.check(std::max(d.dep_rel_err, d.dpe_rel_err) <= 1e-3, "derivative relations off");
}

void profile_test(const Scenario& sc, Output& out, std::ostream& log) {
    const auto g = sc.grid.make();
    const double h = g.spacing();
    auto bump = [&](double a, double w) {
        auto u = ScalarField::from_function(g, [&](auto x) { return a * std::exp(-x[0] * x[0] / (2 * w * w)); });
        return PhasePoint::at_rest({u, 0.5 * u});
    };
    std::vector<BubbleSpec> planted;
    if (sc.bubble_count >= 1) planted.push_back({bump(1.0, 1.0), {}});
    if (sc.bubble_count >= 2) planted.push_back({bump(0.6, 1.3), {}});
    for (int n = 0; n < sc.members; ++n) {
        const double x = std::round((8 + 1.5 * n) / h) * h;
        if (sc.bubble_count >= 1) planted[0].shifts.push_back({0.0, {-x}});
        if (sc.bubble_count >= 2) planted[1].shifts.push_back({0.2 * n, {x}});
    }
    const auto seq = synthesize_sequence(g, planted, sc.noise, sc.members, sc.seed);
    ExtractionOptions o;
    o.nu_floor = sc.nu_floor;
    const auto d = extract_profiles(seq, o);
    const auto rep = orthogonality_check(d, seq, o);
    out.text("decomposition.json", decomposition_json(d, rep, sc.output_dir));
    for (std::size_t j = 0; j < d.bubbles.size(); ++j) out.path("profile_" + std::to_string(j) + ".kgdu");
    out.csv("defects.csv", [&](std::ostream& os, const std::string& c) {
        CsvWriter w(os, {"n", "defect", "weak_limit_proxy"}, c);
        for (std::size_t n = 0; n < rep.defects.size(); ++n) {
            w << static_cast<double>(n) << rep.defects[n]
              << (n < rep.weak_limit_proxy.size() ? rep.weak_limit_proxy[n] : 0.0);
            w.end_row();
        }
    });
    const auto again = extract_profiles(d.remainders, o);
    log << d.bubbles.size() << " bubbles extracted, final nu " << format_number(d.final_nu) << '\n';
    out.check(d.bubbles.size() == planted.size(), "extracted " + std::to_string(d.bubbles.size()) + " of " +
                                                     std::to_string(planted.size()) + " planted bubbles");
    out.check(rep.defects.empty() || rep.defects.back() <= 0.03, "Pythagorean defect above 3% at the largest n");
    out.check(again.bubbles.empty(), "re-extraction found more bubbles");
}

void perturbation_study(const Scenario& sc, Output& out, std::ostream& log) {
    const auto g = sc.grid.make();
    std::mt19937_64 rng(sc.seed);
    const auto base = make_datum(sc, g, rng);
    BumpOptions o;
    o.center_radius = 1.0;
    o.width_min = 1.0;
    std::vector<PhasePoint> dirs;
    for (int k = 0; k < sc.directions; ++k) {
        const auto pair = random_bump_pair(rng, g.dim(), o).sample(g);
        dirs.push_back({pair, 0.5 * pair.u2, -0.5 * pair.u1});
    }
    const auto rep = perturbation_test(base, sc.deltas, dirs, sc.params, sc.horizon, sc.policy);
    out.text("perturbation.json", to_json(rep));
    out.csv("perturbation.csv", [&](std::ostream& os, const std::string& c) {
        CsvWriter w(os, {"delta", "direction", "sup_distance", "strichartz_distance", "status"}, c);
        for (const auto& r : rep.rows) {
            w << r.delta << static_cast<double>(r.direction) << r.sup_distance << r.strichartz_distance
              << to_string(r.status);
            w.end_row();
        }
    });
    log << "exponents: sup " << format_number(rep.exponent_sup) << ", strichartz "
        << format_number(rep.exponent_strichartz) << '\n';
    out.check(rep.violations == 0, std::to_string(rep.violations) + " perturbed runs violated the hypothesis");
    for (double e : {rep.exponent_sup, rep.exponent_strichartz})
        out.check(e >= 0.9 && e <= 1.1, "response exponent " + format_number(e) + " outside [0.9, 1.1]");
}

void single_run(const Scenario& sc, Output& out, std::ostream& log) {
    const auto g = sc.grid.make();
    std::mt19937_64 rng(sc.seed);
    const auto datum = make_datum(sc, g, rng);
    const auto traj = evolve(datum, sc.horizon, sc.policy, sc.params);
    out.csv("trajectory.csv", [&](std::ostream& os, const std::string& c) { write_trajectory_csv(os, traj, c); });
    write_phase(out, "initial.kgdu", traj.snapshots.front());
    write_phase(out, "final.kgdu", traj.final_state());
    nlohmann::json report = {{"status", to_string(traj.status)},
                             {"stop_time", traj.stop_time},
                             {"max_energy_drift", traj.max_energy_drift},
                             {"peak_phase_norm", traj.peak_phase_norm()},
                             {"initial", nlohmann::json::parse(to_json(traj.series.front()))},
                             {"final", nlohmann::json::parse(to_json(traj.series.back()))}};
    if (sc.params.mu1 > 0.0 && sc.params.mu2 > 0.0) {
        const double level = threshold(sc, g).level;
        report["h0"] = level;
        report["region"] = nlohmann::json::parse(to_json(classify(traj.snapshots.front(), sc.params, level)));
    }
    out.text("report.json", report.dump(2));
    log << "status " << to_string(traj.status) << " at t = " << format_number(traj.stop_time) << ", energy drift "
        << format_number(traj.max_energy_drift) << '\n';
    if (sc.max_energy_drift)
        out.check(traj.max_energy_drift <= *sc.max_energy_drift,
                  "energy drift " + format_number(traj.max_energy_drift) + " above " +
                      format_number(*sc.max_energy_drift));
    if (sc.expect_status)
        out.check(traj.status == *sc.expect_status,
                  std::string("run ended with ") + to_string(traj.status) + ", expected " + to_string(*sc.expect_status));
}

} // namespace

ScenarioOutcome run_scenario(const Scenario& sc, std::ostream& log) {
    ScenarioOutcome outcome;
    fs::create_directories(sc.output_dir);
    const auto sentinel = sc.output_dir / "FAILED";
    {
        std::ofstream os(sentinel);
        os << "run in progress or aborted\n";
    }
    Output out(sc, outcome);
    const nlohmann::json manifest = {{"kind", to_string(sc.kind)},
                                     {"seed", sc.seed},
                                     {"config_sha256", sc.config_hash},
                                     {"params", {{"beta", sc.params.beta}, {"mu1", sc.params.mu1}, {"mu2", sc.params.mu2}}},
                                     {"grid", {{"dim", sc.grid.dim}, {"points", sc.grid.points},
                                               {"half_length", sc.grid.half_length}}},
                                     {"config", sc.config_text}};
    out.text("manifest.json", manifest.dump(2));
    try {
        switch (sc.kind) {
        case ScenarioKind::groundstate_sweep: groundstate_sweep(sc, out, log); break;
        case ScenarioKind::dichotomy_ensemble: dichotomy_ensemble(sc, out, log); break;
        case ScenarioKind::lorentz_check: lorentz_check(sc, out, log); break;
        case ScenarioKind::profile_test: profile_test(sc, out, log); break;
        case ScenarioKind::perturbation_study: perturbation_study(sc, out, log); break;
        case ScenarioKind::single_run: single_run(sc, out, log); break;
        }
    } catch (const std::exception& e) {
        std::ofstream os(sentinel, std::ios::app);
        os << e.what() << '\n';
        throw;
    }
    const nlohmann::json checks = {{"passed", outcome.checks_passed}, {"failures", outcome.failures}};
    out.text("checks.json", checks.dump(2));
    fs::remove(sentinel);
    return outcome;
}

int run_scenario_file(const fs::path& config, std::ostream& log, std::ostream& err,
                      const std::optional<fs::path>& output_override) {
    Scenario sc;
    try {
        sc = load_scenario(config);
        if (output_override) sc.output_dir = *output_override;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto outcome = run_scenario(sc, log);
        for (const auto& f : outcome.failures) err << "check failed: " << f << '\n';
        return outcome.checks_passed ? 0 : 1;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return 1;
    }
}

} // namespace kgsys
