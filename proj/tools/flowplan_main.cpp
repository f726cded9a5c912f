#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowplan/report.hpp"
#include "flowplan/scenario.hpp"
#include "flowplan/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace flowplan;

namespace {

struct CommonOpts {
    std::string out_dir = "out";
    long seed = -1;
    std::string lattice;
    int candidates = 0;
    bool plots = false;
    bool oracle_dump = false;
    int max_steps = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-o,--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override the scenario seed");
    cmd->add_option("--lattice", o.lattice,
                    "lattice dims as NSxNDxNT (default 128x64x64)");
    cmd->add_option("--candidates", o.candidates,
                    "number of sampled trajectories");
    cmd->add_flag("--plots", o.plots, "emit SVG plots");
    cmd->add_flag("--oracle-dump", o.oracle_dump,
                  "dump field slices as CSV");
    cmd->add_option("--max-steps", o.max_steps,
                    "cap the number of planner steps");
}

bool apply_overrides(PlannerConfig& cfg, ScenarioSpec& spec,
                     const CommonOpts& o) {
    if (o.seed >= 0) spec.seed = static_cast<std::uint64_t>(o.seed);
    if (!o.lattice.empty()) {
        int ns = 0, nd = 0, nt = 0;
        if (std::sscanf(o.lattice.c_str(), "%dx%dx%d", &ns, &nd, &nt) != 3 ||
            ns < 8 || nd < 8 || nt < 8) {
            std::cerr << "invalid --lattice value '" << o.lattice << "'\n";
            return false;
        }
        cfg.domain.ns = ns;
        cfg.domain.nd = nd;
        cfg.domain.nt = nt;
    }
    if (o.candidates > 0) {
        PerturbationSchedule full = PerturbationSchedule::default_grid();
        PerturbationSchedule trimmed;
        for (int i = 0; i < o.candidates; ++i)
            trimmed.pairs.push_back(
                full.pairs[i % full.pairs.size()]);
        cfg.schedule = trimmed;
    }
    if (o.max_steps > 0)
        spec.duration = std::min(spec.duration, o.max_steps * cfg.sampler.dt);
    return true;
}

int run_one(const std::string& scenario_path, const CommonOpts& opts) {
    ScenarioSpec spec = parse_scenario_file(scenario_path);
    PlannerConfig cfg;
    if (!apply_overrides(cfg, spec, opts)) return 2;

    std::cout << "running scenario '" << spec.name << "' (layout "
              << spec.layout << ", seed " << spec.seed << ")\n";
    RunLog log = run_closed_loop(spec, cfg);

    ReportOptions ro;
    ro.plots = opts.plots;
    ro.oracle_dump = opts.oracle_dump;
    const auto files = emit_reports(log, opts.out_dir, ro);

    std::cout << "  steps: " << log.kpi.steps
              << "  progress: " << log.kpi.progress * 100.0 << "%"
              << "  min speed: " << log.kpi.min_speed << " m/s\n";
    std::cout << "  K_s=" << log.kpi.k_s << " 1/s  K_c=" << log.kpi.k_c_g
              << " g  K_f=" << log.kpi.k_f * 100.0 << "%  |F|="
              << log.kpi.mean_abs_force_kn << " kN\n";
    std::cout << "  mean step " << log.kpi.mean_ms_step
              << " ms (domain " << log.kpi.mean_ms_domain << ", solve "
              << log.kpi.mean_ms_solve << ", sample "
              << log.kpi.mean_ms_sample << ", select "
              << log.kpi.mean_ms_select << "); " << log.kpi.mean_mlups
              << " MLUPS\n";
    if (log.collision)
        std::cout << "  COLLISION at t=" << log.collision_time << " s\n";
    for (const auto& f : files) std::cout << "  wrote " << f << "\n";

    const bool ok = !log.collision && !log.left_road;
    return ok ? 0 : 1;
}

int run_batch(const std::string& dir, const CommonOpts& opts) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".scn") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no .scn files in " << dir << "\n";
        return 2;
    }

    std::vector<BatchEntry> entries;
    bool all_ok = true;
    for (const auto& f : files) {
        CommonOpts per = opts;
        per.out_dir = (fs::path(opts.out_dir) / f.stem()).string();
        ScenarioSpec spec = parse_scenario_file(f.string());
        PlannerConfig cfg;
        if (!apply_overrides(cfg, spec, per)) return 2;
        std::cout << "[" << spec.name << "] running...\n";
        RunLog log = run_closed_loop(spec, cfg);
        ReportOptions ro;
        ro.plots = per.plots;
        ro.oracle_dump = per.oracle_dump;
        emit_reports(log, per.out_dir, ro);
        BatchEntry be;
        be.scenario = spec.name;
        be.kpi = log.kpi;
        be.collision = log.collision;
        be.reached_goal = log.reached_goal;
        entries.push_back(be);
        all_ok = all_ok && !log.collision && !log.left_road;
        std::cout << "[" << spec.name << "] progress "
                  << log.kpi.progress * 100.0 << "%, K_f " << log.kpi.k_f
                  << (log.collision ? ", COLLISION" : "") << "\n";
    }
    for (const auto& f : emit_batch_summary(entries, opts.out_dir))
        std::cout << "wrote " << f << "\n";
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluid-field motion planner and scenario harness"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string batch_dir;
    CommonOpts run_opts, batch_opts;

    CLI::App* run = app.add_subcommand("run", "run one scenario closed-loop");
    run->add_option("scenario", scenario_path, "scenario file (.scn)")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(run, run_opts);

    CLI::App* batch =
        app.add_subcommand("batch", "run every .scn scenario in a directory");
    batch->add_option("dir", batch_dir, "directory of scenario files")
        ->required()
        ->check(CLI::ExistingDirectory);
    add_common(batch, batch_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_one(scenario_path, run_opts);
        if (batch->parsed()) return run_batch(batch_dir, batch_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
