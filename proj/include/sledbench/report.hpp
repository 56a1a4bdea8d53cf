// report.hpp: aggregation of a finished sweep directory
//
// Writes contours.csv (columns solver,metric,beta,g,kappa_crossing) with the
// kappa at which Delta_max crosses the threshold along each kappa line, and
// summary.txt with per-solver validity counts.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sledbench {

inline constexpr double kValidityThreshold = 0.1;

// First crossing of `threshold` by y along increasing x, interpolating y
// linearly in log x. nullopt if y stays on one side.
std::optional<double> threshold_crossing(const std::vector<double>& x, const std::vector<double>& y,
                                         double threshold = kValidityThreshold);

struct ContourPoint {
    std::string solver;
    std::string metric; // delta_max | delta_max_opt
    double beta{0.0};
    double g{0.0};
    std::optional<double> kappa_crossing;
};

struct SolverStats {
    std::string solver;
    std::string metric;
    std::size_t cells{0};
    std::size_t valid{0};        // value < threshold
    std::size_t not_converged{0};
    double min{0.0};
    double max{0.0};
};

struct SweepReport {
    std::size_t expected{0};
    std::size_t ok{0};
    std::size_t failed{0};
    std::vector<std::string> missing;
    std::vector<std::string> corrupt;
    std::vector<SolverStats> stats;
    std::vector<ContourPoint> contours;
    std::string text;
};

// Reads dir/manifest.json (or every cell_*.json if the manifest is absent).
// Throws InvalidArgument when no cell is found at all.
SweepReport summarize_sweep(const std::string& dir);

// summarize_sweep plus contours.csv and summary.txt inside dir.
SweepReport write_report(const std::string& dir);

} // namespace sledbench
