#include "sledbench/powell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "sledbench/errors.hpp"

namespace sledbench {

namespace {

constexpr double kGold = 1.618033988749895;
constexpr int kMaxBracket = 60;
constexpr double kTiny = 1e-25;

class Counted {
public:
    explicit Counted(const Objective& f) : f_(f) {}
    double operator()(const std::vector<double>& x) {
        ++count;
        const double v = f_(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "objective returned " << v << " at (";
            for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
            os << ")";
            throw NonFiniteObjective(x, os.str());
        }
        return v;
    }
    int count{0};

private:
    const Objective& f_;
};

std::vector<double> along(const std::vector<double>& x, const std::vector<double>& d, double a) {
    std::vector<double> y(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * d[i];
    return y;
}

// Minimizes f along d from x (where f(x) = fx). Moves x only on a strict
// decrease and returns the new value.
double line_minimize(Counted& f, std::vector<double>& x, double fx, std::vector<double>& d) {
    auto phi = [&](double a) { return f(along(x, d, a)); };
    double a = 0.0, fa = fx;
    double b = 1.0, fb = phi(b);
    if (fb > fa) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = b + kGold * (b - a), fc = phi(c);
    for (int it = 0; it < kMaxBracket && fb > fc; ++it) {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + kGold * (b - a);
        fc = phi(c);
    }
    double best_a = b, best_f = fb;
    if (fc < best_f) {
        best_a = c;
        best_f = fc;
    }
    const double lo = std::min(a, c), hi = std::max(a, c);
    if (hi > lo) {
        std::uintmax_t max_iter = 200;
        const auto r = boost::math::tools::brent_find_minima(
            phi, lo, hi, std::numeric_limits<double>::digits / 2, max_iter);
        if (r.second < best_f) {
            best_a = r.first;
            best_f = r.second;
        }
    }
    if (best_f < fx) {
        for (double& v : d) v *= best_a;
        x = along(x, d, 1.0);
        return best_f;
    }
    for (double& v : d) v *= 0.0;
    return fx;
}

} // namespace

PowellResult powell_minimize(const Objective& objective, const std::vector<double>& x0,
                             const PowellOptions& opt) {
    if (x0.empty()) throw InvalidArgument("powell_minimize: empty starting point");
    Counted f(objective);
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) dirs[i][i] = opt.initial_step;

    PowellResult res;
    res.x0 = x0;
    res.x = x0;
    res.f0 = f(x0);
    double fx = res.f0;

    for (res.iterations = 1; res.iterations <= opt.max_iter; ++res.iterations) {
        const std::vector<double> x_start = res.x;
        const double f_start = fx;
        std::size_t ibig = 0;
        double del = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> d = dirs[i];
            const double before = fx;
            fx = line_minimize(f, res.x, fx, d);
            if (before - fx > del) {
                del = before - fx;
                ibig = i;
            }
        }

        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(res.x[i] - x_start[i]));
        if (2.0 * (f_start - fx) <= opt.ftol * (std::abs(f_start) + std::abs(fx)) + kTiny ||
            step <= opt.xtol) {
            res.converged = true;
            break;
        }

        // Replace the direction of largest decrease by the net displacement
        // when the extrapolated point indicates it is worth it.
        std::vector<double> extrap(n), xi(n);
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = res.x[i] - x_start[i];
            extrap[i] = 2.0 * res.x[i] - x_start[i];
        }
        const double fe = f(extrap);
        if (fe < f_start) {
            const double t = 2.0 * (f_start - 2.0 * fx + fe) * std::pow(f_start - fx - del, 2) -
                             del * std::pow(f_start - fe, 2);
            if (t < 0.0) {
                std::vector<double> d = xi;
                fx = line_minimize(f, res.x, fx, d);
                dirs[ibig] = dirs[n - 1];
                dirs[n - 1] = xi;
            }
        }
    }
    if (res.iterations > opt.max_iter) res.iterations = opt.max_iter;
    res.f = fx;
    res.evaluations = f.count;
    return res;
}

} // namespace sledbench
