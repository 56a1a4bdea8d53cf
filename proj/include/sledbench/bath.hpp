// bath.hpp: reservoir scalar functions for the ohmic bath with squared Drude cutoff
//
//   J(w) = eta w / (1 + w^2/w_c^2)^2   (extended to w < 0 as an odd function)

#pragma once

#include <complex>

namespace sledbench {

class BathSpec {
public:
    // Dimensionless ohmic strength eta; kappa = 2 eta omega_ref.
    static BathSpec from_eta(double eta, double beta, double omega_c, double omega_ref = 1.0);
    static BathSpec from_kappa(double kappa, double beta, double omega_c, double omega_ref = 1.0);

    double eta() const { return eta_; }
    double kappa() const { return 2.0 * eta_ * omega_ref_; }
    double beta() const { return beta_; }
    double omega_c() const { return omega_c_; }
    double omega_ref() const { return omega_ref_; }

    BathSpec with_beta(double beta) const;
    BathSpec with_kappa(double kappa) const;

private:
    BathSpec(double eta, double beta, double omega_c, double omega_ref);
    double eta_;
    double beta_;
    double omega_c_;
    double omega_ref_;
};

// Result of a quadrature with its error estimate (absolute).
struct QuadratureValue {
    double value{0.0};
    double error{0.0};
};

// Relative tolerance used by every bath quadrature.
inline constexpr double kQuadratureTolerance = 1e-8;

double spectral_density(const BathSpec& b, double omega);

// Cutoff factor [1 + (w/w_c)^2]^-2 so that J(w) = eta w * cutoff_factor.
double cutoff_factor(const BathSpec& b, double omega);

// S(w) = 2 J(w) / (1 - exp(-beta w)); S(0) = 2 eta / beta.
double noise_power(const BathSpec& b, double omega);

// Longitudinal relaxation rate of a two-level transition at omega,
// S(w) + S(-w) = 2 J(w) coth(beta w / 2). Equals kappa coth(beta w/2) times the
// cutoff factor when omega = omega_ref.
double relaxation_rate(const BathSpec& b, double omega);

// Bose-Einstein occupation 1/(exp(beta w) - 1); requires w > 0.
double occupation(const BathSpec& b, double omega);

// L(t) = (1/pi) int_0^inf dw J(w) [coth(beta w/2) cos(w t) - i sin(w t)].
// Throws NumericalError if the adaptive quadrature misses the tolerance.
std::complex<double> bath_correlation(const BathSpec& b, double t);

// chi_R(t) = -2 Theta(t) Im L(t).
double classical_response(const BathSpec& b, double t);

// mu = int chi_R dt = (2/pi) int_0^inf J(w)/w dw  (= eta w_c / 2 in closed form).
QuadratureValue mu(const BathSpec& b);

struct LambShiftInputs {
    double omega_q{1.0};
    double kappa{0.0};
    double beta{1.0};
    double omega_c{50.0};

    double K() const;
    double G() const;
    double omega_eff() const;
};

// Renormalized qubit frequency Omega_q including the bath-induced shift.
// Throws InvalidArgument for K >= 1/2 or a negative radicand.
double lamb_shifted_frequency(const LambShiftInputs& in);

// Generic half-line integral of a real integrand: adaptive Gauss-Kronrod on
// geometrically growing panels starting at `scale`, stopped once the supplied
// analytic bound on the remaining tail falls below the tolerance.
template <class F, class TailBound>
QuadratureValue integrate_half_line(F&& f, TailBound&& tail_bound, double scale,
                                    double rel_tol = kQuadratureTolerance);

} // namespace sledbench

#include "sledbench/detail/half_line_quadrature.hpp"
