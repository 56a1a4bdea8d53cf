// metrics.hpp: normalized superoperator distance and complete-positivity checks

#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sledbench/operators.hpp"
#include "sledbench/sled.hpp"
#include "sledbench/weak_coupling.hpp"

namespace sledbench {

// sqrt(sum_ij |A_ij|^2).
double frobenius_norm(const CMatrix& a);

// || A/||A|| - B/||B|| || / 2. Throws InvalidArgument on a zero-norm input.
double distance(const CMatrix& a, const CMatrix& b);

struct DistanceCurve {
    std::vector<double> times;
    std::vector<double> delta;
    double delta_max{0.0};
    double argmax_time{0.0};
    std::size_t argmax_index{0};
    // Free-form provenance: solver pair, parameters, n_traj, seed.
    std::map<std::string, std::string> metadata;

    void write_csv(std::ostream& os) const; // header "t,delta"
    std::string to_json() const;
};

// Pointwise distance on aligned grids. Throws InvalidArgument on mismatch.
DistanceCurve max_distance(const std::vector<Propagator>& bm, const std::vector<Propagator>& exact);

struct DistanceEstimate {
    DistanceCurve curve;
    double std_error{0.0};            // delete-a-block jackknife
    std::vector<double> replicates;   // delta_max without each block
};

DistanceEstimate max_distance_with_error(const std::vector<Propagator>& bm, const SledReference& ref);

// Choi matrix sum_ij |i><j| (x) T(|i><j|), index (i N + a, j N + b).
CMatrix choi_matrix(const Superoperator& t);
double choi_min_eigenvalue(const Superoperator& t);

// Kraus operators from the Choi eigendecomposition; eigenvalues below
// -tol throw NumericalError, those in [-tol, tol] are dropped.
std::vector<Operator> kraus_operators(const Superoperator& t, double tol = 1e-9);
// sum_k conj(K_k) (x) K_k.
Superoperator channel_from_kraus(const std::vector<Operator>& kraus);

} // namespace sledbench
