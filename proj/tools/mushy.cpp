// Command-line front end: simulate | limit | converge | validate | config.
// Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
// 4 experiment threshold failure, 1 failed validation property.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "mushy/config.hpp"
#include "mushy/io.hpp"
#include "mushy/manifest.hpp"
#include "mushy/snapshot.hpp"
#include "mushy/validate.hpp"
#include "mushy/version.hpp"

namespace fs = std::filesystem;
using namespace mushy;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("MUSHY_OUT_DIR")) return env;
    return "out";
}

std::string step_name(double t, double dt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "step_%08lld.stfn", std::llround(t / dt));
    return buf;
}

void write_trajectory(const fs::path& dir, const Trajectory& traj, double dt,
                      RunManifest& manifest) {
    fs::create_directories(dir / "snapshots");
    for (size_t i = 0; i < traj.snapshots.size(); ++i) {
        const std::string rel = "snapshots/" + step_name(traj.times[i], dt);
        write_snapshot(dir / rel, traj.snapshots[i]);
        manifest.add_artifact(dir, rel);
    }
}

int run_simulate(const std::string& config_path, const fs::path& out, bool seed_given,
                 std::uint64_t seed) {
    RunConfig rc = load_config_file(config_path);
    if (seed_given) rc.seed = seed;
    SolverConfig cfg = rc.solver_config();
    if (cfg.snapshot_stride == 0) cfg.snapshot_stride = static_cast<int>(cfg.steps());
    const ScalarField x0 = rc.x0.build(cfg.grid);

    fs::create_directories(out);
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config_text = serialize_config(rc);
    manifest.seed = rc.seed;
    manifest.note_noise(rc.noise_N, cfg.noise->family.sup_norm, cfg.noise->mode_count());

    PathResult res = simulate_path(x0, cfg, 0);
    write_trajectory(out, res.trajectory, cfg.dt, manifest);
    write_diagnostics_csv(out / "diagnostics.csv", res.diagnostics, cfg);
    manifest.add_artifact(out, "diagnostics.csv");
    manifest.status.push_back("simulate: ok");
    manifest.write(out);
    std::cout << "simulate: " << res.trajectory.snapshots.size() << " snapshots, "
              << res.diagnostics.times.size() << " diagnostic samples -> " << out.string()
              << "\n";
    return 0;
}

int run_limit(const std::string& config_path, const fs::path& out, bool with_enhancement) {
    RunConfig rc = load_config_file(config_path);
    LimitConfig cfg = rc.limit_config();
    if (cfg.snapshot_stride == 0)
        cfg.snapshot_stride = static_cast<int>(cfg.as_solver().steps());
    const ScalarField x0 = rc.x0.build(cfg.grid);

    fs::create_directories(out);
    RunManifest manifest;
    manifest.command = "limit";
    manifest.config_text = serialize_config(rc);
    manifest.seed = rc.seed;

    PathResult res = solve_limit(x0, cfg);
    write_trajectory(out, res.trajectory, cfg.dt, manifest);
    write_diagnostics_csv(out / "diagnostics.csv", res.diagnostics, cfg.as_solver());
    manifest.add_artifact(out, "diagnostics.csv");
    manifest.status.push_back("limit: ok");
    if (with_enhancement) {
        EnhancementReport rep = melting_enhancement_report(x0, cfg);
        write_enhancement_csv(out / "enhancement.csv", rep);
        manifest.add_artifact(out, "enhancement.csv");
        manifest.status.push_back("enhancement: ok");
    }
    manifest.write(out);
    std::cout << "limit: " << res.trajectory.snapshots.size() << " snapshots -> " << out.string()
              << "\n";
    return 0;
}

int run_converge(const std::string& config_path, const fs::path& out, bool seed_given,
                 std::uint64_t seed, int threads) {
    RunConfig rc = load_config_file(config_path);
    if (seed_given) rc.seed = seed;
    ExperimentPlan plan = rc.plan();

    fs::create_directories(out);
    RunManifest manifest;
    manifest.command = "converge";
    manifest.config_text = serialize_config(rc);
    manifest.seed = rc.seed;

    ConvergenceReport rep = run_convergence(plan, threads);
    write_report_files(out, rep);
    manifest.add_artifact(out, "report.json");
    manifest.add_artifact(out, "report.csv");
    manifest.add_artifact(out, "plotdata.csv");
    manifest.status.push_back("converge: ok");
    manifest.write(out);

    std::cout << "N     c_N        d_N        std_err    martingale\n";
    for (const ConvergenceRow& row : rep.rows)
        std::printf("%-5d %-10.4g %-10.4g %-10.4g %-10.4g\n", row.N, row.c_N, row.mean_distance,
                    row.std_error, row.martingale_stat);
    return 0;
}

int run_validate(bool as_json, int threads) {
    const std::vector<PropertyResult> results = run_validation_suite(64, threads);
    bool all_pass = true;
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const PropertyResult& r : results) {
            j.push_back({{"name", r.name},
                         {"pass", r.pass},
                         {"measured", r.measured},
                         {"tolerance", r.tolerance},
                         {"detail", r.detail}});
            all_pass = all_pass && r.pass;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        for (const PropertyResult& r : results) {
            std::printf("[%s] %-28s measured=%-12.4g tol=%-10.4g %s\n", r.pass ? "PASS" : "FAIL",
                        r.name.c_str(), r.measured, r.tolerance, r.detail.c_str());
            all_pass = all_pass && r.pass;
        }
    }
    if (!all_pass) {
        for (const PropertyResult& r : results)
            if (!r.pass) std::cerr << "failed property: " << r.name << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudospectral solvers for a mushy-region phase-change model with "
                 "divergence-free transport noise on the 2D torus"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = default_out_dir();
    std::uint64_t seed = 0;
    bool with_enhancement = false;
    bool as_json = false;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory (default: $MUSHY_OUT_DIR or ./out)");
        cmd->add_option("--seed", seed, "override the configured seed");
    };

    CLI::App* sim = app.add_subcommand(
        "simulate", "integrate one stochastic path; write snapshots, diagnostics, manifest");
    add_common(sim, true);

    CLI::App* lim = app.add_subcommand(
        "limit", "integrate the deterministic limit equation; optionally compare melting with "
                 "and without the corrector");
    add_common(lim, true);
    lim->add_flag("--with-enhancement", with_enhancement, "emit the enhancement comparison CSV");

    CLI::App* conv = app.add_subcommand(
        "converge", "ensemble experiment across the truncation-radius ladder");
    add_common(conv, true);
    conv->add_option("--threads", threads, "worker threads (does not affect results)");

    CLI::App* val = app.add_subcommand("validate", "run the fast invariant suite");
    val->add_flag("--json", as_json, "machine-readable report");
    val->add_option("--threads", threads, "worker threads (does not affect results)");

    app.add_subcommand("config", "print a documented example configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return run_simulate(config_path, out_dir, sim->count("--seed") > 0, seed);
        if (lim->parsed()) return run_limit(config_path, out_dir, with_enhancement);
        if (conv->parsed())
            return run_converge(config_path, out_dir, conv->count("--seed") > 0, seed, threads);
        if (val->parsed()) return run_validate(as_json, threads);
        std::cout << example_config();
        return 0;
    } catch (const PathAbortError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ExperimentThresholdError& e) {
        std::cerr << "experiment failed: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
