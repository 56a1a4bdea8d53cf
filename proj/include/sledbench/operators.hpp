// operators.hpp: Hilbert-space construction for one and two qubits
//
// Conventions used everywhere in the library:
//   * hbar = k_B = 1; frequencies are in units of the reference qubit frequency.
//   * single qubit basis {|g>, |e>}; two qubits {|gg>, |ge>, |eg>, |ee>} with
//     qubit 1 as the left tensor factor.
//   * sigma^- = |g><e|, sigma^+ = |e><g|, sigma^z = |e><e| - |g><g|.
//   * vectorization is column stacking: vec(rho)[i + N*j] = rho(i, j), so
//     vec(A rho B) = (B^T kron A) vec(rho).

#pragma once

#include <complex>
#include <variant>

#include <Eigen/Dense>

namespace sledbench {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Dense N x N operator on the system Hilbert space.
using Operator = CMatrix;
// Dense N^2 x N^2 map acting on vectorized operators.
using Superoperator = CMatrix;
using DensityMatrix = CMatrix;

struct SingleQubit {
    double omega_q{1.0};
};

struct TwoQubit {
    double omega_1{1.0};
    double omega_2{1.0};
    double g{0.0};
};

class SystemSpec {
public:
    SystemSpec(SingleQubit q); // NOLINT(google-explicit-constructor)
    SystemSpec(TwoQubit q);    // NOLINT(google-explicit-constructor)

    bool is_single() const { return std::holds_alternative<SingleQubit>(v_); }
    bool is_two() const { return std::holds_alternative<TwoQubit>(v_); }
    const SingleQubit& single() const { return std::get<SingleQubit>(v_); }
    const TwoQubit& two() const { return std::get<TwoQubit>(v_); }

    int dim() const { return is_single() ? 2 : 4; }
    // omega_q for one qubit, omega_1 for two; the unit of every rate.
    double reference_frequency() const;
    // Frequency of the qubit attached to the bath.
    double bath_qubit_frequency() const { return reference_frequency(); }

private:
    std::variant<SingleQubit, TwoQubit> v_;
};

struct EigenSystem {
    RVector energies;  // ascending
    CMatrix vectors;   // columns are eigenvectors, phase-fixed
    RMatrix bohr;      // bohr(n, m) = E_m - E_n
};

namespace ops {

Operator identity(int n);
Operator sigma_minus();
Operator sigma_plus();
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
// Single-qubit operator a placed on qubit k (1 or 2) of a two-qubit register.
Operator on_qubit(const Operator& a, int k);
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Projector |psi><psi| for the +1 eigenstate of the given Pauli matrix.
DensityMatrix pauli_plus_state(const Operator& pauli);

} // namespace ops

Operator build_hamiltonian(const SystemSpec& spec);
Operator coupling_operator(const SystemSpec& spec);

// Throws InvalidArgument if H is not Hermitian within 1e-12 relative.
EigenSystem eigensystem(const Operator& H);

CVector vectorize(const CMatrix& rho);
CMatrix devectorize(const CVector& v);

// Superoperators under the column-stacking convention.
Superoperator left_multiply(const Operator& a);             // rho -> a rho
Superoperator right_multiply(const Operator& b);            // rho -> rho b
Superoperator commutator_superop(const Operator& a);        // rho -> [a, rho]
Superoperator anticommutator_superop(const Operator& a);    // rho -> {a, rho}
// rho -> a rho a^dag - {a^dag a, rho}/2
Superoperator lindblad_dissipator(const Operator& a);

bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);

// Gibbs state exp(-beta H)/Z in the computational basis.
DensityMatrix gibbs_state(const Operator& H, double beta);

} // namespace sledbench
