#include "sledbench/bath.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sledbench/errors.hpp"
#include "sledbench/special_functions.hpp"

namespace sledbench {

namespace {

constexpr double kPi = std::numbers::pi;

// x coth(x), analytic at x = 0.
double x_coth_x(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) return 1.0 + ax * ax / 3.0;
    return ax / std::tanh(ax);
}

// Bound on int_a^inf J(w) dw / w^p-type tails: J(w) <= eta w_c^4 / w^3.
double j_tail(const BathSpec& b, double a, int extra_power) {
    const double wc4 = std::pow(b.omega_c(), 4);
    const int p = 3 + extra_power; // integrand <= eta wc^4 / w^p
    return b.eta() * wc4 / ((p - 1) * std::pow(a, p - 1));
}

} // namespace

BathSpec::BathSpec(double eta, double beta, double omega_c, double omega_ref)
    : eta_(eta), beta_(beta), omega_c_(omega_c), omega_ref_(omega_ref) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("BathSpec: beta must be > 0");
    if (!(omega_c > 0.0) || !std::isfinite(omega_c))
        throw InvalidArgument("BathSpec: omega_c must be > 0");
    if (!(omega_ref > 0.0) || !std::isfinite(omega_ref))
        throw InvalidArgument("BathSpec: omega_ref must be > 0");
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw InvalidArgument("BathSpec: coupling must be >= 0");
}

BathSpec BathSpec::from_eta(double eta, double beta, double omega_c, double omega_ref) {
    return BathSpec(eta, beta, omega_c, omega_ref);
}

BathSpec BathSpec::from_kappa(double kappa, double beta, double omega_c, double omega_ref) {
    if (!(omega_ref > 0.0)) throw InvalidArgument("BathSpec: omega_ref must be > 0");
    return BathSpec(kappa / (2.0 * omega_ref), beta, omega_c, omega_ref);
}

BathSpec BathSpec::with_beta(double beta) const { return BathSpec(eta_, beta, omega_c_, omega_ref_); }

BathSpec BathSpec::with_kappa(double kappa) const {
    return from_kappa(kappa, beta_, omega_c_, omega_ref_);
}

double cutoff_factor(const BathSpec& b, double omega) {
    const double r = omega / b.omega_c();
    const double d = 1.0 + r * r;
    return 1.0 / (d * d);
}

double spectral_density(const BathSpec& b, double omega) {
    return b.eta() * omega * cutoff_factor(b, omega);
}

double noise_power(const BathSpec& b, double omega) {
    if (omega == 0.0) return 2.0 * b.eta() / b.beta();
    // 2 J / (1 - e^{-beta w}) written with expm1 for small |beta w|.
    return 2.0 * spectral_density(b, omega) / (-std::expm1(-b.beta() * omega));
}

double relaxation_rate(const BathSpec& b, double omega) {
    if (omega == 0.0) return 2.0 * noise_power(b, 0.0);
    return 2.0 * spectral_density(b, std::abs(omega)) / std::tanh(0.5 * b.beta() * std::abs(omega));
}

double occupation(const BathSpec& b, double omega) {
    if (!(omega > 0.0)) throw InvalidArgument("occupation: frequency must be positive");
    return 1.0 / std::expm1(b.beta() * omega);
}

std::complex<double> bath_correlation(const BathSpec& b, double t) {
    if (b.eta() == 0.0) return {0.0, 0.0};
    const double beta = b.beta();
    // J(w) coth(beta w / 2) = eta * cutoff * (2/beta) * x coth x, x = beta w / 2
    auto re_integrand = [&](double w) {
        return b.eta() * cutoff_factor(b, w) * (2.0 / beta) * x_coth_x(0.5 * beta * w) *
               std::cos(w * t);
    };
    auto im_integrand = [&](double w) { return spectral_density(b, w) * std::sin(w * t); };
    // Beyond w_c the integrands are decreasing envelopes times cos or sin, so
    // the tail is also bounded by 2 envelope(a) / |t|.
    const double wc4 = std::pow(b.omega_c(), 4);
    auto oscillating = [&](double a, double plain, double coth) {
        if (t == 0.0) return plain;
        return std::min(plain, 4.0 * b.eta() * wc4 * coth / (a * a * a * std::abs(t)));
    };
    auto re_tail = [&](double a) {
        const double c = 1.0 / std::tanh(0.5 * beta * a);
        return oscillating(a, j_tail(b, a, 0) * c, c);
    };
    auto im_tail = [&](double a) { return oscillating(a, j_tail(b, a, 0), 1.0); };

    const QuadratureValue re = integrate_half_line(re_integrand, re_tail, b.omega_c());
    QuadratureValue im{0.0, 0.0};
    if (t != 0.0) im = integrate_half_line(im_integrand, im_tail, b.omega_c());
    return {re.value / kPi, -im.value / kPi};
}

double classical_response(const BathSpec& b, double t) {
    if (t < 0.0) return 0.0;
    return -2.0 * bath_correlation(b, t).imag();
}

QuadratureValue mu(const BathSpec& b) {
    auto integrand = [&](double w) { return b.eta() * cutoff_factor(b, w); };
    auto tail = [&](double a) { return j_tail(b, a, 1); };
    QuadratureValue q = integrate_half_line(integrand, tail, b.omega_c());
    q.value *= 2.0 / kPi;
    q.error *= 2.0 / kPi;
    return q;
}

double LambShiftInputs::K() const { return kappa / (2.0 * kPi * omega_q); }

double LambShiftInputs::G() const {
    const double k = K();
    return std::pow(std::tgamma(1.0 - 2.0 * k) * std::cos(kPi * k), 1.0 / (2.0 * (1.0 - k)));
}

double LambShiftInputs::omega_eff() const {
    const double k = K();
    return G() * std::pow(omega_q / omega_c, k / (1.0 - k)) * omega_q;
}

double lamb_shifted_frequency(const LambShiftInputs& in) {
    if (!(in.omega_q > 0.0) || !(in.beta > 0.0) || !(in.omega_c > 0.0) || !(in.kappa >= 0.0))
        throw InvalidArgument("lamb_shifted_frequency: invalid parameters");
    const double k = in.K();
    if (!(k < 0.5)) {
        std::ostringstream os;
        os << "lamb_shifted_frequency: K = kappa/(2 pi omega_q) = " << k << " must be < 1/2";
        throw InvalidArgument(os.str());
    }
    const double w_eff = in.omega_eff();
    const double y = in.beta * w_eff / (2.0 * kPi);
    const double bracket = special::digamma(std::complex<double>(0.0, y)).real() - std::log(y);
    const double radicand = 1.0 + 2.0 * k * bracket;
    if (!(radicand > 0.0)) {
        std::ostringstream os;
        os << "lamb_shifted_frequency: negative radicand " << radicand << " (omega_q=" << in.omega_q
           << ", kappa=" << in.kappa << ", beta=" << in.beta << ", omega_c=" << in.omega_c << ")";
        throw InvalidArgument(os.str());
    }
    return w_eff * std::sqrt(radicand);
}

} // namespace sledbench
