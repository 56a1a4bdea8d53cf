#pragma once

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sledbench/errors.hpp"

namespace sledbench {

template <class F, class TailBound>
QuadratureValue integrate_half_line(F&& f, TailBound&& tail_bound, double scale, double rel_tol) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr unsigned kMaxDepth = 30;
    constexpr int kMaxPanels = 80;

    QuadratureValue out;
    double l1_total = 0.0;
    double a = 0.0;
    double b = scale;
    for (int panel = 0; panel < kMaxPanels; ++panel) {
        double err = 0.0;
        double l1 = 0.0;
        const double v =
            gauss_kronrod<double, 61>::integrate(f, a, b, kMaxDepth, 0.1 * rel_tol, &err, &l1);
        out.value += v;
        out.error += err;
        l1_total += l1;
        const double tail = tail_bound(b);
        const double target = rel_tol * std::max(std::abs(out.value), 1e-3 * l1_total);
        if (tail <= 0.1 * target) {
            out.error += tail;
            if (!(out.error <= target) && !(out.error <= 1e-300)) {
                std::ostringstream os;
                os << "quadrature did not converge: value " << out.value << ", error estimate "
                   << out.error << ", requested " << target;
                throw NumericalError(os.str());
            }
            return out;
        }
        a = b;
        b *= 2.0;
    }
    throw NumericalError("quadrature did not converge: tail bound never fell below tolerance");
}

} // namespace sledbench
