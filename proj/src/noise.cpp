#include "sledbench/noise.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include "sledbench/errors.hpp"
#include "sledbench/philox.hpp"

namespace sledbench {

namespace {

constexpr double kPi = std::numbers::pi;
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// coth(x) - 1/x for x >= 0.
double coth_minus_inverse(double x) {
    if (x < 1e-3) return x / 3.0 - x * x * x / 45.0;
    return 1.0 / std::tanh(x) - 1.0 / x;
}

} // namespace

double noise_spectrum(const BathSpec& bath, double omega) {
    const double w = std::abs(omega);
    if (w == 0.0 || bath.eta() == 0.0) return 0.0;
    return spectral_density(bath, w) * coth_minus_inverse(0.5 * bath.beta() * w);
}

QuadratureValue noise_correlation(const BathSpec& bath, double tau) {
    if (bath.eta() == 0.0) return {};
    auto integrand = [&](double w) { return noise_spectrum(bath, w) * std::cos(w * tau); };
    // P(w) <= J(w) <= eta w_c^4 / w^3 and P decreases beyond w_c, so for
    // tau != 0 the oscillating tail is bounded by 2 P(a) / |tau| as well.
    const double wc4 = std::pow(bath.omega_c(), 4);
    auto tail = [&](double a) {
        const double plain = bath.eta() * wc4 / (2.0 * a * a);
        if (tau == 0.0) return plain;
        return std::min(plain, 4.0 * bath.eta() * wc4 / (a * a * a * std::abs(tau)));
    };
    QuadratureValue q = integrate_half_line(integrand, tail, bath.omega_c());
    q.value /= kPi;
    q.error /= kPi;
    return q;
}

struct NoiseSynthesizer::Plan {
    fftw_plan plan{nullptr};
};

NoiseSynthesizer::NoiseSynthesizer(const BathSpec& bath, const TimeGrid& grid)
    : bath_(bath), grid_(grid), plan_(std::make_unique<Plan>()) {
    grid.validate_shape();
    const double dt = grid.dt();
    if (dt * bath.omega_c() > 0.5) {
        std::ostringstream os;
        os << "noise grid too coarse: dt * omega_c = " << dt * bath.omega_c() << " > 0.5";
        throw InvalidArgument(os.str());
    }
    window_ = 2 * grid.n_steps;
    d_omega_ = 2.0 * kPi / (window_ * dt);

    std::vector<fftw_complex> in(window_);
    std::vector<fftw_complex> out(window_);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_->plan = fftw_plan_dft_1d(window_, in.data(), out.data(), FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
    if (plan_->plan == nullptr) throw NumericalError("fftw: could not create plan");
}

NoiseSynthesizer::~NoiseSynthesizer() {
    if (plan_ && plan_->plan) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_->plan);
    }
}

void NoiseSynthesizer::generate(std::uint64_t seed, std::uint64_t trajectory,
                                std::vector<double>& out) const {
    const int bins = window_ / 2;
    const int n = grid_.n_steps + 1;
    if (bath_.eta() == 0.0) {
        out.assign(n, 0.0);
        return;
    }

    const double u = rng::uniform(seed, trajectory, 1, 0);
    std::vector<fftw_complex> spec(window_);
    for (int k = 0; k < bins; ++k) {
        const double sigma = std::sqrt(noise_spectrum(bath_, (k + u) * d_omega_) * d_omega_ / kPi);
        const auto [a, b] = rng::normal_pair(seed, trajectory, 0, static_cast<std::uint32_t>(k));
        spec[k][0] = sigma * a;
        spec[k][1] = -sigma * b;
    }
    for (int k = bins; k < window_; ++k) spec[k][0] = spec[k][1] = 0.0;

    std::vector<fftw_complex> full(window_);
    fftw_execute_dft(plan_->plan, spec.data(), full.data());
    // zeta_j = Re[exp(i u dw t_j) sum_k c_k exp(2 pi i k j / M)]
    const double dphi = u * d_omega_ * grid_.dt();
    out.resize(n);
    for (int j = 0; j < n; ++j) {
        const double phi = dphi * j;
        out[j] = std::cos(phi) * full[j][0] - std::sin(phi) * full[j][1];
    }
}

NoiseTrajectory NoiseSynthesizer::generate(std::uint64_t seed, std::uint64_t trajectory) const {
    NoiseTrajectory t;
    t.seed = seed;
    t.trajectory = trajectory;
    generate(seed, trajectory, t.samples);
    return t;
}

QuadratureValue NoiseSynthesizer::synthesized_covariance(int lag) const {
    using boost::math::quadrature::gauss_kronrod;
    QuadratureValue q;
    if (bath_.eta() == 0.0) return q;
    const double tau = lag * grid_.dt();
    const double top = kPi / grid_.dt();
    auto integrand = [&](double w) { return noise_spectrum(bath_, w) * std::cos(w * tau); };
    // Panels of a few oscillation periods keep each Kronrod rule well resolved.
    const double width = std::min(bath_.omega_c(), tau > 0.0 ? 8.0 * kPi / tau : top);
    for (double a = 0.0; a < top; a += width) {
        const double b = std::min(a + width, top);
        double err = 0.0;
        q.value += gauss_kronrod<double, 61>::integrate(integrand, a, b, 20, 1e-11, &err);
        q.error += err;
    }
    q.value /= kPi;
    q.error /= kPi;
    return q;
}

NoiseTrajectory generate_noise(const BathSpec& bath, const TimeGrid& grid, std::uint64_t seed,
                               std::uint64_t trajectory) {
    NoiseSynthesizer synth(bath, grid);
    return synth.generate(seed, trajectory);
}

} // namespace sledbench
