// diagnostics.hpp: invariant self-test and noise statistics check

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sledbench/bath.hpp"
#include "sledbench/time_grid.hpp"

namespace sledbench {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

// Fast invariant suite: vectorization identities, semigroup law, detailed
// balance, trace preservation, Choi/Kraus round trip, ensemble determinism.
std::vector<CheckResult> run_selftest();

struct NoiseCheckRow {
    int lag{0};
    double tau{0.0};
    double sample{0.0};       // ensemble estimate of <zeta(t) zeta(t + tau)>
    double std_error{0.0};
    double target{0.0};       // full quadrature correlator
    double band_limited{0.0}; // same integral truncated at pi/dt
    double z_target{0.0};
    double z_band{0.0};
};

// Sample autocovariance over n_traj synthesized trajectories. Each
// trajectory contributes its time-averaged lag product, so the estimates are
// independent across trajectories and the standard error is the plain one.
std::vector<NoiseCheckRow> noise_check(const BathSpec& bath, const TimeGrid& grid, std::size_t n_traj,
                                       std::uint64_t seed, const std::vector<int>& lags);

} // namespace sledbench
