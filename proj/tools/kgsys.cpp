#include "kgsys/acceptance.hpp"
#include "kgsys/classify.hpp"
#include "kgsys/field_io.hpp"
#include "kgsys/groundstate.hpp"
#include "kgsys/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace kgsys;

namespace {

int cmd_validate(const std::vector<int>& only, std::uint64_t seed, const std::string& json_path,
                 const std::string& cache) {
    SuiteOptions o;
    o.seed = seed;
    o.only = only;
    if (!cache.empty()) o.h0_cache = cache;
    o.on_result = [](const CriterionResult& r) { std::cout << summary_line(r) << std::endl; };
    const auto report = validate_suite(o);
    if (!json_path.empty()) std::ofstream(json_path) << to_json(report) << '\n';
    int passed = 0;
    for (const auto& r : report.results) passed += r.pass;
    std::cout << passed << "/" << report.results.size() << " criteria passed\n";
    return report.all_pass() ? 0 : 1;
}

int cmd_groundstate(NonlinearityParams p, int dim, const std::string& snapshot) {
    p.require_focusing();
    nlohmann::json out = {{"beta", p.beta}, {"mu1", p.mu1}, {"mu2", p.mu2}, {"dim", dim}};
    const auto cand = candidate_levels(p, dim);
    out["candidates"] = {{"semitrivial", cand.semitrivial}};
    if (cand.synchronized) out["candidates"]["symmetric"] = *cand.synchronized;
    FieldPair pair = FieldPair::zeros(SpectralGrid(dim, 8, 1.0));
    if (dim == 3) {
        const auto r = solve_radial_ground_state(p);
        out.update({{"level", h0(p, 3)}, {"solver_level", r.level}, {"kind", to_string(r.kind)},
                    {"residual", r.el_residual}, {"converged", r.converged}});
        if (!snapshot.empty()) pair = r.sample(SpectralGrid(3, 48, 12.0));
    } else {
        const auto gs = solve_ground_state(p, SpectralGrid(dim, dim == 1 ? 512 : 128, dim == 1 ? 32.0 : 16.0));
        out.update({{"level", std::min(gs.level, cand.best())}, {"solver_level", gs.level},
                    {"kind", to_string(gs.kind)}, {"residual", gs.el_residual}, {"converged", gs.converged}});
        pair = gs.pair;
    }
    if (!snapshot.empty()) {
        const std::vector<ScalarField> f{pair.u1, pair.u2};
        write_field_snapshot(snapshot, f);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_classify(const std::string& path, NonlinearityParams p, double level) {
    p.require_focusing();
    const auto snap = read_field_snapshot(path);
    if (snap.fields.size() != 2 && snap.fields.size() != 4)
        throw std::runtime_error("snapshot must hold 2 (u1, u2) or 4 (u1, u2, v1, v2) fields");
    const auto& g = snap.grid;
    PhasePoint phase = snap.fields.size() == 4
                           ? PhasePoint{{snap.fields[0], snap.fields[1]}, snap.fields[2], snap.fields[3]}
                           : PhasePoint::at_rest({snap.fields[0], snap.fields[1]});
    if (!(level > 0.0)) level = g.dim() == 3 ? h0(p, 3) : solve_ground_state(p, g).level;
    nlohmann::json out = nlohmann::json::parse(to_json(classify(phase, p, level)));
    out["h0"] = level;
    out["functionals"] = nlohmann::json::parse(to_json(functional_report(phase, p)));
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled cubic Klein-Gordon experiments"};
    app.require_subcommand(1);

    std::string config, output;
    auto* run = app.add_subcommand("run", "Run a scenario described by a YAML config");
    run->add_option("config", config, "Scenario file")->required();
    run->add_option("-o,--output", output, "Override the output directory");

    std::vector<int> only;
    std::uint64_t seed = SuiteOptions{}.seed;
    std::string json_path, cache;
    auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
    validate->add_option("--only", only, "Criterion ids to run")->delimiter(',')->check(CLI::Range(1, kCriterionCount));
    validate->add_option("--seed", seed, "Suite seed");
    validate->add_option("--json", json_path, "Write the machine-readable report here");
    validate->add_option("--h0-cache", cache, "Ground-state level cache file");

    NonlinearityParams params{0.0, 1.0, 1.0};
    int dim = 3;
    std::string snapshot;
    auto* gs = app.add_subcommand("groundstate", "Ground-state level h0 and minimizer");
    gs->add_option("--beta", params.beta, "Coupling")->default_val(0.0);
    gs->add_option("--mu1", params.mu1, "First self-interaction")->default_val(1.0);
    gs->add_option("--mu2", params.mu2, "Second self-interaction")->default_val(1.0);
    gs->add_option("--dim", dim, "Dimension")->check(CLI::Range(1, 3))->default_val(3);
    gs->add_option("--snapshot", snapshot, "Write (Q1, Q2) in the binary field format");

    std::string phase_file;
    double level = 0.0;
    auto* cl = app.add_subcommand("classify", "PS+/PS- membership of a stored datum");
    cl->add_option("snapshot", phase_file, "Field snapshot")->required()->check(CLI::ExistingFile);
    cl->add_option("--beta", params.beta, "Coupling");
    cl->add_option("--mu1", params.mu1, "First self-interaction");
    cl->add_option("--mu2", params.mu2, "Second self-interaction");
    cl->add_option("--h0", level, "Threshold level (computed when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run)
            return run_scenario_file(config, std::cout, std::cerr,
                                     output.empty() ? std::nullopt : std::optional<std::filesystem::path>(output));
        if (*validate) return cmd_validate(only, seed, json_path, cache);
        if (*gs) return cmd_groundstate(params, dim, snapshot);
        if (*cl) return cmd_classify(phase_file, params, level);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
