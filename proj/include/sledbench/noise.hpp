// noise.hpp: the real Gaussian noise zeta(t) driving the stochastic Liouville equation
//
// Target correlator:
//   <zeta(t) zeta(t')> = (1/pi) int_0^inf dw P(w) cos[w (t - t')],
//   P(w) = J(w) [coth(beta w / 2) - 2 / (beta w)].

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "sledbench/bath.hpp"
#include "sledbench/time_grid.hpp"

namespace sledbench {

// Even power spectrum P(w) >= 0 with P(0) = 0.
double noise_spectrum(const BathSpec& bath, double omega);

// The target correlator at lag tau, by adaptive quadrature.
QuadratureValue noise_correlation(const BathSpec& bath, double tau);

struct NoiseTrajectory {
    std::vector<double> samples; // zeta(t_k), k = 0..n_steps
    std::uint64_t seed{0};
    std::uint64_t trajectory{0};
};

// Spectral synthesis on a window of length 2 t_max with bin spacing
// dw = 2 pi / (2 t_max). Each trajectory draws one offset u in (0, 1) and uses
// the shifted lattice w_k = (k + u) dw, k = 0..M/2-1, with two normals per bin
// keyed by (seed, trajectory, k). Averaging over u turns the lattice sum into
// the continuum integral, so the ensemble covariance is exactly the target
// correlator restricted to |w| < pi/dt. A fixed lattice would instead leave an
// O(P(w_q)) error in principal-value sums near the Bohr frequencies, which
// shows up as a spurious frequency shift of the system.
// Power above pi/dt is dropped rather than folded back: folded power would
// land near the Bohr frequencies and drive spurious transitions.
class NoiseSynthesizer {
public:
    NoiseSynthesizer(const BathSpec& bath, const TimeGrid& grid);
    ~NoiseSynthesizer();
    NoiseSynthesizer(const NoiseSynthesizer&) = delete;
    NoiseSynthesizer& operator=(const NoiseSynthesizer&) = delete;

    // Writes n_steps + 1 samples into out. Thread-safe.
    void generate(std::uint64_t seed, std::uint64_t trajectory, std::vector<double>& out) const;
    NoiseTrajectory generate(std::uint64_t seed, std::uint64_t trajectory) const;

    // Ensemble covariance of the synthesized process at lag j*dt:
    // (1/pi) int_0^{pi/dt} P(w) cos(w j dt) dw.
    QuadratureValue synthesized_covariance(int lag) const;
    int window_size() const { return window_; }
    double bin_spacing() const { return d_omega_; }

private:
    struct Plan;
    BathSpec bath_;
    TimeGrid grid_;
    int window_{0};
    double d_omega_{0.0};
    std::unique_ptr<Plan> plan_;
};

NoiseTrajectory generate_noise(const BathSpec& bath, const TimeGrid& grid, std::uint64_t seed,
                               std::uint64_t trajectory);

} // namespace sledbench
