#include "sledbench/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sledbench/errors.hpp"

namespace sledbench::special {

namespace {

using cplx = std::complex<double>;

// B_{2k} / (2k), k = 1..7
constexpr std::array<double, 7> kAsymptotic = {
    1.0 / 12.0,          // B2 / 2
    -1.0 / 120.0,        // B4 / 4
    1.0 / 252.0,         // B6 / 6
    -1.0 / 240.0,        // B8 / 8
    1.0 / 132.0,         // B10 / 10
    -691.0 / 32760.0,    // B12 / 12
    1.0 / 12.0,          // B14 / 14
};

cplx digamma_asymptotic(cplx w) {
    const cplx inv2 = 1.0 / (w * w);
    cplx term = inv2;
    cplx series = 0.0;
    for (double c : kAsymptotic) {
        series += c * term;
        term *= inv2;
    }
    return std::log(w) - 0.5 / w - series;
}

} // namespace

cplx digamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
        throw InvalidArgument("digamma: pole at non-positive integer");
    if (z.real() < 0.0) {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        const cplx piz = std::numbers::pi * z;
        return digamma(1.0 - z) - std::numbers::pi / std::tan(piz);
    }
    cplx acc = 0.0;
    cplx w = z;
    while (w.real() < 15.0) {
        acc += 1.0 / w;
        w += 1.0;
    }
    return digamma_asymptotic(w) - acc;
}

double digamma(double x) { return digamma(cplx(x, 0.0)).real(); }

} // namespace sledbench::special
