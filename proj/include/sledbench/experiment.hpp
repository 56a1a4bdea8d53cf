// experiment.hpp: sweep runner behind `sledbench run`
//
// Output directory layout:
//   manifest.json              config hash, canonical config, cell list
//   cell_<id>.json             one finished (or failed) cell; the resume unit
//   cell_<id>_<solver>.csv     Delta(t) curve, columns t,delta      (csv format)
//   sweep.csv                  one row per cell and solver           (csv format)
//   sweep.json                 all cells in one document             (json format)
//
// sweep.csv columns:
//   cell,kappa,beta,g,solver,delta_max,delta_max_se,argmax_t,steady_state_time,
//   converged,delta_max_opt,status
// Missing values are empty fields.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sledbench/config.hpp"
#include "sledbench/metrics.hpp"
#include "sledbench/optimize.hpp"
#include "sledbench/time_grid.hpp"

namespace sledbench {

struct SolverOutcome {
    LiouvillianKind kind{LiouvillianKind::Redfield};
    double steady_state_time{0.0}; // +inf when the Liouvillian does not relax
    bool converged{false};         // steady_state_time <= t_max
    bool has_distance{false};
    double delta_max{0.0};
    double delta_max_se{0.0};
    double argmax_time{0.0};
    DistanceCurve curve;
    std::optional<FitResult> fit;
};

struct CellOutcome {
    SweepCell cell;
    std::string status{"ok"}; // ok | failed
    std::string error;
    TimeGrid grid;
    double relaxation_rate{0.0};
    bool has_sled{false};
    std::size_t n_traj{0};
    std::uint64_t seed{0};
    std::size_t block_size{0};
    double max_trace_drift{0.0};
    double condition_number{0.0};
    std::vector<SolverOutcome> solvers;
    double elapsed_seconds{0.0};
};

// Computes one cell. Never throws for numerical failures: they are recorded
// in status/error. sled_workers = 0 picks the default worker count.
CellOutcome run_cell(const ExperimentConfig& c, const SweepCell& cell, int sled_workers = 0,
                     const std::string& checkpoint_path = "");

std::string cell_to_json(const ExperimentConfig& c, const CellOutcome& out);

struct RunSummary {
    std::size_t cells{0};
    std::size_t computed{0};
    std::size_t reused{0};
    std::size_t failed{0};
};

// Runs (or resumes) the sweep into c.output_dir. Finished cells whose JSON
// carries the same config hash are reused. Throws InvalidArgument if the
// directory belongs to a different configuration.
RunSummary run_experiment(const ExperimentConfig& c, std::ostream* log = nullptr);

// Rebuilds sweep.csv / sweep.json from the cell files in dir.
void write_sweep_tables(const ExperimentConfig& c);

} // namespace sledbench
