#pragma once

#include "sledbench/bath.hpp"
#include "sledbench/operators.hpp"

namespace sledbench {

// Uniform integration grid on [0, t_max] with n_steps steps. Results are
// recorded every n_steps / n_out steps, i.e. on n_out + 1 points including t = 0.
struct TimeGrid {
    double t_max{1.0};
    int n_steps{1};
    int n_out{1};

    double dt() const { return t_max / n_steps; }
    int stride() const { return n_steps / n_out; }
    double output_time(int k) const { return t_max * k / n_out; }

    // Shape checks only (positive sizes, n_out divides n_steps).
    void validate_shape() const;
    // Shape checks plus dt * omega_c <= 0.5 and dt * ||H|| <= 0.1.
    void validate(const BathSpec& bath, const Operator& h) const;

    // Smallest grid with dt <= dt_max and n_steps a multiple of n_out.
    static TimeGrid with_max_step(double t_max, double dt_max, int n_out);
    // Largest dt allowed by the invariants for this bath and Hamiltonian.
    static double max_step(const BathSpec& bath, const Operator& h);
};

} // namespace sledbench
