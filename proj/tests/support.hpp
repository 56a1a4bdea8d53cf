// Shared helpers for the unit tests.

#pragma once

#include <cstdint>
#include <random>

#include "sledbench/operators.hpp"

namespace sledbench::test {

inline CMatrix random_matrix(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(d(rng), d(rng));
    return m;
}

inline CMatrix random_hermitian(int n, std::mt19937_64& rng) {
    const CMatrix a = random_matrix(n, rng);
    return 0.5 * (a + a.adjoint());
}

inline DensityMatrix random_density(int n, std::mt19937_64& rng) {
    const CMatrix a = random_matrix(n, rng);
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace sledbench::test
