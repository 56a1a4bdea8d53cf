// config.hpp: experiment configuration (INI text, schema version 1)
//
//   [meta]      version = 1, name
//   [system]    type = single | two; omega_q; omega_1, omega_2
//   [bath]      omega_c
//   [sweep]     kappa, beta, g: "v1, v2, ..." or "logspace lo hi n"
//   [solvers]   use = redfield, lindblad_global, lindblad_local, sled
//   [grid]      window (t_max in units of 1/kappa_T, default 10) or t_max;
//               points; dt_max
//   [sled]      trajectories, seed, workers, checkpoint_interval
//   [optimize]  enabled, starts, ftol, xtol, max_iter, shift_rates
//   [output]    directory, formats = csv, json; cell_workers
//
// beta is given as the dimensionless beta * omega_ref and kappa, g in units of
// omega_ref (omega_q or omega_1).

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sledbench/bath.hpp"
#include "sledbench/errors.hpp"
#include "sledbench/operators.hpp"
#include "sledbench/powell.hpp"
#include "sledbench/weak_coupling.hpp"

namespace sledbench {

inline constexpr int kConfigVersion = 1;

// Validation failure pointing at a line of the source text (0 if unknown).
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& origin, int line, const std::string& field, const std::string& what);
    int line;
    std::string field;
};

enum class SystemKind { SingleQubit, TwoQubit };

struct ExperimentConfig {
    std::string name{"sweep"};
    SystemKind system{SystemKind::SingleQubit};
    double omega_q{1.0};
    double omega_1{1.0};
    double omega_2{1.0};
    double omega_c{50.0};

    std::vector<double> kappa{0.05};
    std::vector<double> beta{1.0};
    std::vector<double> g{0.1};

    std::vector<LiouvillianKind> solvers{LiouvillianKind::Redfield, LiouvillianKind::GlobalLindblad};
    bool sled{true};

    double window{10.0}; // in units of 1/kappa_T; ignored when t_max > 0
    double t_max{0.0};
    int points{400};
    double dt_max{0.01};

    std::size_t n_traj{1000};
    std::uint64_t seed{1};
    int workers{0};
    double checkpoint_interval{30.0};

    bool optimize{false};
    int starts{9};
    PowellOptions powell{};
    bool shift_rates{true};

    std::string output_dir{"sledbench-out"};
    bool write_csv{true};
    bool write_json{true};
    int cell_workers{1};

    // Canonical text of the parsed settings and its FNV-1a hash.
    std::string canonical;
    std::uint64_t hash{0};

    double omega_ref() const { return system == SystemKind::SingleQubit ? omega_q : omega_1; }
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

// One point of the sweep.
struct SweepCell {
    std::size_t index{0};
    std::string id;
    double kappa{0.0};
    double beta{0.0};
    double g{0.0};
};

// Outer loop over beta, then g (two qubits), then kappa.
std::vector<SweepCell> sweep_cells(const ExperimentConfig& c);

SystemSpec cell_system(const ExperimentConfig& c, const SweepCell& cell);
BathSpec cell_bath(const ExperimentConfig& c, const SweepCell& cell);
// kappa_T of the reference transition; sets the default evaluation window.
double cell_relaxation_rate(const ExperimentConfig& c, const SweepCell& cell);
double cell_t_max(const ExperimentConfig& c, const SweepCell& cell);
std::uint64_t cell_seed(const ExperimentConfig& c, const SweepCell& cell);

// Parses "a, b, c" or "logspace lo hi n".
std::vector<double> parse_value_list(const std::string& s);
std::vector<double> logspace(double lo, double hi, int n);

} // namespace sledbench
