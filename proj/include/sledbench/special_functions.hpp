#pragma once

#include <complex>

namespace sledbench::special {

// Digamma function psi(z) of complex argument. Upward recurrence to
// Re z >= 15 followed by the Stirling-type asymptotic series; reflection
// for Re z < 0. Absolute accuracy ~1e-15 away from the poles z = 0, -1, ...
std::complex<double> digamma(std::complex<double> z);

// Real digamma, same algorithm.
double digamma(double x);

} // namespace sledbench::special
