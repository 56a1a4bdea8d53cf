#include "sledbench/time_grid.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sledbench/errors.hpp"

namespace sledbench {

namespace {

constexpr double kCutoffBound = 0.5;
constexpr double kHamiltonianBound = 0.1;

double spectral_norm(const Operator& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

void TimeGrid::validate_shape() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("TimeGrid: t_max must be > 0");
    if (n_steps < 1 || n_out < 1) throw InvalidArgument("TimeGrid: n_steps and n_out must be >= 1");
    if (n_steps % n_out != 0) {
        std::ostringstream os;
        os << "TimeGrid: n_out = " << n_out << " does not divide n_steps = " << n_steps;
        throw InvalidArgument(os.str());
    }
}

void TimeGrid::validate(const BathSpec& bath, const Operator& h) const {
    validate_shape();
    const double d = dt();
    if (d * bath.omega_c() > kCutoffBound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "TimeGrid: dt * omega_c = " << d * bath.omega_c() << " exceeds " << kCutoffBound;
        throw InvalidArgument(os.str());
    }
    if (d * spectral_norm(h) > kHamiltonianBound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "TimeGrid: dt * ||H|| = " << d * spectral_norm(h) << " exceeds " << kHamiltonianBound;
        throw InvalidArgument(os.str());
    }
}

TimeGrid TimeGrid::with_max_step(double t_max, double dt_max, int n_out) {
    if (!(dt_max > 0.0)) throw InvalidArgument("TimeGrid: dt_max must be > 0");
    if (n_out < 1) throw InvalidArgument("TimeGrid: n_out must be >= 1");
    TimeGrid g;
    g.t_max = t_max;
    g.n_out = n_out;
    const double per_out = t_max / (n_out * dt_max);
    g.n_steps = n_out * static_cast<int>(std::ceil(per_out * (1.0 - 1e-12)));
    if (g.n_steps < n_out) g.n_steps = n_out;
    g.validate_shape();
    return g;
}

double TimeGrid::max_step(const BathSpec& bath, const Operator& h) {
    double dt = kCutoffBound / bath.omega_c();
    const double hn = spectral_norm(h);
    if (hn > 0.0) dt = std::min(dt, kHamiltonianBound / hn);
    return dt;
}

} // namespace sledbench
