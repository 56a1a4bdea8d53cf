// sled.hpp: stochastic Liouville equation with dissipation
//
//   d rho/dt = -i[H, rho] - (eta/beta)[q,[q,rho]] + (eta/2)[q,{[H,q],rho}] + i zeta(t)[q, rho]
//
// Trajectories are integrated in the orthonormal Pauli-string basis, where
// rho = sum_mu r_mu B_mu with real r and the generator is a real sparse matrix.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sledbench/bath.hpp"
#include "sledbench/noise.hpp"
#include "sledbench/operators.hpp"
#include "sledbench/time_grid.hpp"
#include "sledbench/weak_coupling.hpp"

namespace sledbench {

struct SledModel {
    Operator h;
    Operator q;
    BathSpec bath;

    static SledModel from_spec(const SystemSpec& spec, const BathSpec& bath);
    int dim() const { return static_cast<int>(h.rows()); }
};

// Column-stacked superoperators with d rho/dt = (drift + zeta * noise) vec(rho).
struct SledGenerators {
    Superoperator drift;
    Superoperator noise;
};

SledGenerators sled_generators(const SledModel& m);

// One RK4 step; zeta is linear between zeta_start and zeta_end across the step.
DensityMatrix sled_step(const DensityMatrix& rho, const Operator& h, const Operator& q,
                        const BathSpec& bath, double zeta_start, double zeta_end, double dt);

// Single trajectory with the complex operator-form stepper, recorded at the
// grid's output points. Used as a reference for the fast engine.
std::vector<DensityMatrix> sled_trajectory(const SledModel& m, const DensityMatrix& rho0,
                                           const TimeGrid& grid, const std::vector<double>& zeta);

// Orthonormal Hermitian basis: {I, X, Y, Z}/sqrt(2) for one qubit and the
// 16 tensor products /2 for two. Element 0 is proportional to the identity.
std::vector<Operator> pauli_basis(int dim);
// Columns are vec(B_mu).
CMatrix pauli_basis_matrix(int dim);

// Pure states of the +1 eigenvectors of X, Y, Z and I/2; tensor products of
// these for two qubits (16 states, qubit-1 index major).
std::vector<DensityMatrix> tomography_states(int dim);

struct EnsembleOptions {
    std::size_t n_traj{1000};
    std::uint64_t seed{1};
    int workers{0};                 // 0: SLEDBENCH_WORKERS or hardware concurrency
    std::size_t max_blocks{0};      // 0: automatic
    std::string checkpoint_path;    // empty: no checkpoint
    double checkpoint_interval{30.0}; // seconds between checkpoint writes
};

// Per-block partial sums over trajectories of the Pauli coordinates, laid out
// as [output time][mu][state].
struct BlockSums {
    bool done{false};
    std::size_t count{0};
    std::vector<double> sum;
    std::vector<double> sumsq;
    double trace_drift{0.0};
};

struct EnsembleResult {
    TimeGrid grid;
    int dim{0};
    int n_states{0};
    std::size_t n_traj{0};
    std::uint64_t seed{0};
    std::size_t block_size{0};
    std::vector<double> times;
    // mean[state][k] is the ensemble-averaged density matrix at output time k.
    std::vector<std::vector<DensityMatrix>> mean;
    // std_error[state][k](mu): standard error of the mean of Tr(B_mu rho).
    std::vector<std::vector<RVector>> std_error;
    // Largest |Tr rho(t) - Tr rho(0)| over every trajectory, state and output time.
    double max_trace_drift{0.0};
    std::vector<BlockSums> blocks;
    std::vector<double> total_sum;

    std::size_t n_out_points() const { return times.size(); }
    std::size_t n_blocks() const { return blocks.size(); }
    // Mean Pauli coordinates (D x n_states) at output k, optionally leaving out one block.
    RMatrix mean_coordinates(std::size_t k, std::ptrdiff_t exclude_block = -1) const;
    // Ensemble mean of Tr(op rho) for the given state, with its standard error.
    std::vector<double> expectation(const Operator& op, int state = 0) const;
    std::vector<double> expectation_error(const Operator& op, int state = 0) const;
};

// Trajectories are grouped into fixed blocks, summed in index order inside a
// block and combined across blocks by a fixed pairwise tree, so the result is
// bit-identical for any worker count. Throws TrajectoryFailure on NaN/Inf.
EnsembleResult run_ensemble(const SledModel& m, const std::vector<DensityMatrix>& initial,
                            const TimeGrid& grid, const EnsembleOptions& opt);
EnsembleResult run_ensemble(const SystemSpec& spec, const BathSpec& bath,
                            const DensityMatrix& rho0, const TimeGrid& grid,
                            const EnsembleOptions& opt);

struct SledReference {
    EnsembleResult ensemble;
    std::vector<Propagator> propagators; // one per output time
    double condition_number{1.0};

    // Propagators rebuilt from the ensemble without one block (jackknife).
    std::vector<Propagator> leave_one_out(std::size_t block) const;
};

// T(t) = [vec rho_i(t)] [vec rho_i(0)]^-1 over the tomography states.
// Throws NumericalError if the initial-state matrix has condition > 1e6.
SledReference reconstruct_superoperator(const SledModel& m, const TimeGrid& grid,
                                        const EnsembleOptions& opt);
SledReference reconstruct_superoperator(const SystemSpec& spec, const BathSpec& bath,
                                        const TimeGrid& grid, const EnsembleOptions& opt);

// Worker count used when EnsembleOptions::workers is 0.
int default_worker_count();

} // namespace sledbench
