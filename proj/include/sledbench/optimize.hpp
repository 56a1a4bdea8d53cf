// optimize.hpp: fitting Born-Markov parameters to a frozen exact reference
//
// The objective is max_t Delta(t) between the model propagators and the
// reference on the reference's own time grid. kappa and beta are optimized
// through their logarithms so every point of R^n is a valid model.

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sledbench/operators.hpp"
#include "sledbench/powell.hpp"
#include "sledbench/weak_coupling.hpp"

namespace sledbench {

struct SingleQubitParams {
    double kappa{0.05};
    double beta{1.0};
    double omega_q{1.0};
};

// H' = a1 H + a2 H^2 + a3 H^3 replaces H in the commutator and the rates.
struct TwoQubitParams {
    double kappa{0.05};
    double beta{1.0};
    double a1{1.0};
    double a2{0.0};
    double a3{0.0};
};

using FitParams = std::variant<SingleQubitParams, TwoQubitParams>;

struct StartOutcome {
    FitParams start;
    FitParams optimum;
    double delta_max_start{0.0};
    double delta_max_opt{0.0};
    bool converged{false};
};

struct FitResult {
    FitParams params;
    FitParams start;
    double delta_max_start{0.0};
    double delta_max_opt{0.0};
    int iterations{0};
    int evaluations{0};
    bool converged{false};
    // Every multistart run, best first is not guaranteed; order is the start order.
    std::vector<StartOutcome> starts;

    std::string to_json() const;
};

struct FitOptions {
    PowellOptions powell{};
    // Single qubit: move the rate arguments with omega_q as well as the commutator.
    bool shift_rates_with_frequency{true};
    // Two qubits: number of multistart points (1 = start only, max 9).
    int starts{9};
};

// Fixed physical context shared by all candidate models.
struct FitContext {
    double omega_c{50.0};
    double omega_ref{1.0}; // kappa <-> eta conversion uses the bare frequency
};

// Model propagators on a uniform time grid starting at 0.
std::vector<Propagator> model_propagators(const Liouvillian& l, const std::vector<double>& times);

Liouvillian single_qubit_model(const SingleQubitParams& p, LiouvillianKind kind,
                               const FitContext& ctx, bool shift_rates_with_frequency = true);
// spec supplies the bare two-qubit Hamiltonian and coupling.
Liouvillian two_qubit_model(const TwoQubitParams& p, const TwoQubit& spec, LiouvillianKind kind,
                            const FitContext& ctx);

FitResult fit_single_qubit(const std::vector<Propagator>& reference, const SingleQubitParams& start,
                           LiouvillianKind kind, const FitContext& ctx, const FitOptions& opt = {});

FitResult fit_two_qubit(const std::vector<Propagator>& reference, const TwoQubitParams& start,
                        const TwoQubit& spec, LiouvillianKind kind, const FitContext& ctx,
                        const FitOptions& opt = {});

// delta omega_{j,j+1} = a1 dE + a2 d(E^2) + a3 d(E^3) - dE for adjacent levels.
std::vector<double> transition_shifts(const TwoQubitParams& p, const EigenSystem& eig);

} // namespace sledbench
