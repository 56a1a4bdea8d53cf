// weak_coupling.hpp: Born-Markov Liouvillians (Redfield, global and local Lindblad),
// propagators, relaxation-time estimates and closed-form RWA rates.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sledbench/bath.hpp"
#include "sledbench/operators.hpp"

namespace sledbench {

enum class LiouvillianKind { Redfield, GlobalLindblad, LocalLindblad };

const char* to_string(LiouvillianKind k);
LiouvillianKind liouvillian_kind_from_string(const std::string& s);

struct Liouvillian {
    int dim{0};              // Hilbert-space dimension N
    Superoperator matrix;    // N^2 x N^2, acts on vec(rho)
    LiouvillianKind kind{LiouvillianKind::Redfield};
};

struct Propagator {
    Superoperator matrix;
    double t{0.0};
};

// Tolerances (in units of omega_ref).
inline constexpr double kDegeneracyTolerance = 1e-9;

// Ingredients for the Born-Markov generators. The coherent part uses
// `h_coherent`; bath rates are evaluated at the Bohr frequencies of `h_rates`.
// The two coincide except when fitting only the commutator frequency.
struct BornMarkovInputs {
    Operator h_coherent;
    Operator h_rates;
    Operator coupling;
    BathSpec bath;
    // Bare frequency of the bath-coupled qubit (local Lindblad only).
    double local_frequency{1.0};

    static BornMarkovInputs from_spec(const SystemSpec& spec, const BathSpec& bath);
};

Liouvillian redfield_liouvillian(const SystemSpec& spec, const BathSpec& bath);
Liouvillian global_lindblad_liouvillian(const SystemSpec& spec, const BathSpec& bath);
Liouvillian local_lindblad_liouvillian(const SystemSpec& spec, const BathSpec& bath);
Liouvillian build_liouvillian(LiouvillianKind kind, const SystemSpec& spec, const BathSpec& bath);

Liouvillian redfield_liouvillian(const BornMarkovInputs& in);
Liouvillian global_lindblad_liouvillian(const BornMarkovInputs& in);
// Two-qubit local Lindblad (qubit-1 dissipators at local_frequency).
Liouvillian local_lindblad_liouvillian(const BornMarkovInputs& in);
Liouvillian build_liouvillian(LiouvillianKind kind, const BornMarkovInputs& in);

// Pauli-master-equation rates Gamma(m -> n) = |q_nm|^2 S(E_m - E_n) in the
// eigenbasis of h (diagonal entries are zero).
RMatrix transition_rates(const Operator& h, const Operator& coupling, const BathSpec& bath);

// exp(L t) by scaling-and-squaring Pade. Throws on t < 0 or overflow.
Propagator propagator(const Liouvillian& L, double t);

// T(k dt) for k = 0..n_steps, from powers of T(dt).
std::vector<Propagator> propagator_series(const Liouvillian& L, double dt, int n_steps);

// -3 / Re(lambda*) where lambda* is the slowest decaying eigenvalue
// (largest Re among those with Re < -1e-12 ||L||).
double steady_state_time(const Liouvillian& L);

// Eigenvector of L with eigenvalue closest to zero, normalized to unit trace.
DensityMatrix steady_state(const Liouvillian& L);

// Roots of lambda^2 - (i delta + kappa/2) lambda + g^2/4 = 0; the root with the
// larger real part comes first.
std::pair<cplx, cplx> rwa_rates(double kappa, double g, double detuning = 0.0);

// omega_1 s1+s1- + omega_2 s2+s2- + (g/2)(s1+ s2- + s1- s2+).
Operator rwa_two_qubit_hamiltonian(double omega_1, double omega_2, double g);

} // namespace sledbench
