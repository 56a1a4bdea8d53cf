// sledbench: command-line front end
//
//   sledbench run <config.ini> [--output DIR] [--workers N]
//   sledbench report <dir>
//   sledbench noise-check <config.ini> [--trajectories N] [--lags 0,1,5,20]
//   sledbench selftest
//
// SLEDBENCH_WORKERS overrides the default thread count.

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sledbench/config.hpp"
#include "sledbench/diagnostics.hpp"
#include "sledbench/experiment.hpp"
#include "sledbench/report.hpp"
#include "sledbench/version.hpp"

using namespace sledbench;

namespace {

int cmd_run(const std::string& path, const std::string& output, int workers) {
    ExperimentConfig c = load_config(path);
    if (!output.empty()) c.output_dir = output;
    if (workers > 0) c.workers = workers;
    std::cerr << version_string() << ": " << sweep_cells(c).size() << " cells -> " << c.output_dir << "\n";
    const RunSummary s = run_experiment(c, &std::cerr);
    std::cout << "cells " << s.cells << ": computed " << s.computed << ", reused " << s.reused << ", failed "
              << s.failed << "\n";
    return s.failed == 0 ? 0 : 3;
}

int cmd_report(const std::string& dir) {
    const SweepReport r = write_report(dir);
    std::cout << r.text;
    return r.missing.empty() && r.corrupt.empty() ? 0 : 2;
}

int cmd_noise_check(const std::string& path, std::size_t n_traj, const std::vector<int>& lags) {
    const ExperimentConfig c = load_config(path);
    const auto cells = sweep_cells(c);
    bool ok = true;
    std::set<double> seen;
    for (const auto& cell : cells) {
        if (!seen.insert(cell.beta).second) continue;
        const BathSpec bath = cell_bath(c, cell);
        const double dt = std::min(c.dt_max, TimeGrid::max_step(bath, build_hamiltonian(cell_system(c, cell))));
        const TimeGrid grid = TimeGrid::with_max_step(cell_t_max(c, cell), dt, 1);
        const std::size_t n = n_traj ? n_traj : c.n_traj;
        std::printf("beta=%g kappa=%g dt=%g trajectories=%zu\n", cell.beta, cell.kappa, grid.dt(), n);
        std::printf("%6s %10s %14s %12s %14s %14s %8s %8s\n", "lag", "tau", "sample", "std_err", "target",
                    "band_limited", "z", "z_band");
        for (const auto& r : noise_check(bath, grid, n, cell_seed(c, cell), lags)) {
            const bool pass = std::abs(r.z_band) <= 3.0;
            ok = ok && pass;
            std::printf("%6d %10.4g %14.6g %12.3g %14.6g %14.6g %8.2f %8.2f %s\n", r.lag, r.tau, r.sample,
                        r.std_error, r.target, r.band_limited, r.z_target, r.z_band, pass ? "PASS" : "FAIL");
        }
    }
    return ok ? 0 : 1;
}

int cmd_selftest() {
    bool ok = true;
    for (const auto& r : run_selftest()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Born-Markov versus stochastic Liouville benchmark"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path, output, dir;
    int workers = 0;
    auto* run = app.add_subcommand("run", "run or resume a sweep");
    run->add_option("config", config_path, "INI configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--output", output, "override [output] directory");
    run->add_option("--workers", workers, "SLED worker threads")->check(CLI::NonNegativeNumber);

    auto* report = app.add_subcommand("report", "summarize a sweep directory");
    report->add_option("dir", dir, "sweep output directory")->required();

    std::size_t n_traj = 0;
    std::vector<int> lags{0, 1, 5, 20};
    auto* noise = app.add_subcommand("noise-check", "compare synthesized noise statistics with the correlator");
    noise->add_option("config", config_path, "INI configuration")->required()->check(CLI::ExistingFile);
    noise->add_option("--trajectories", n_traj, "number of noise realizations (default: [sled] trajectories)");
    noise->add_option("--lags", lags, "lags in units of dt")->delimiter(',');

    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, output, workers);
        if (*report) return cmd_report(dir);
        if (*noise) return cmd_noise_check(config_path, n_traj, lags);
        if (*selftest) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "sledbench: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
