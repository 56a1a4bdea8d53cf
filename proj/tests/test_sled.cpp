#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "sledbench/checkpoint.hpp"
#include "sledbench/errors.hpp"
#include "sledbench/noise.hpp"
#include "sledbench/sled.hpp"
#include "sledbench/weak_coupling.hpp"
#include "support.hpp"

using namespace sledbench;
using doctest::Approx;
using test::max_abs;

namespace {

TimeGrid make_grid(double t_max, int n_steps, int n_out) {
    TimeGrid g;
    g.t_max = t_max;
    g.n_steps = n_steps;
    g.n_out = n_out;
    return g;
}

// (1/pi) int_0^W P(w) cos(w tau) dw on half-unit panels. For W = inf the
// remainder beyond 4000 is added: exp-sinh at tau = 0, otherwise the leading
// integration-by-parts term -P(W) sin(W tau) / tau.
double correlator_oracle(const BathSpec& b, double tau, double w_max = -1.0) {
    auto p = [&](double w) {
        if (w == 0.0) return 0.0;
        const double x = b.beta() * w;
        return spectral_density(b, w) * (1.0 / std::tanh(0.5 * x) - 2.0 / x);
    };
    const bool full = w_max < 0.0;
    const double top = full ? 4000.0 : w_max;
    double acc = 0.0;
    for (double a = 0.0; a < top; a += 0.5)
        acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double w) { return p(w) * std::cos(w * tau); }, a, std::min(a + 0.5, top), 0, 1e-13);
    if (full) {
        if (tau == 0.0) {
            boost::math::quadrature::exp_sinh<double> es;
            acc += es.integrate([&](double u) { return p(top + u); });
        } else {
            acc -= p(top) * std::sin(top * tau) / tau;
        }
    }
    return acc / std::numbers::pi;
}

// exp(-i H t) from the spectral decomposition
CMatrix unitary(const Operator& h, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const CVector phase = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp();
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix rhs_oracle(const CMatrix& r, const Operator& h, const Operator& q, double eta, double beta, double z) {
    auto comm = [](const CMatrix& a, const CMatrix& b) -> CMatrix { return a * b - b * a; };
    auto anti = [](const CMatrix& a, const CMatrix& b) -> CMatrix { return a * b + b * a; };
    const cplx i(0.0, 1.0);
    return -i * comm(h, r) - (eta / beta) * comm(q, comm(q, r)) + 0.5 * eta * comm(q, anti(comm(h, q), r)) +
           i * z * comm(q, r);
}

} // namespace

TEST_CASE("noise spectrum") {
    const BathSpec b = BathSpec::from_eta(0.05, 2.0, 50.0);
    CHECK(noise_spectrum(b, 0.0) == 0.0);
    // coth x - 1/x = x/3 - x^3/45 + ...
    const double w = 1e-3;
    CHECK(noise_spectrum(b, w) == Approx(spectral_density(b, w) * b.beta() * w / 6.0).epsilon(1e-6));
    CHECK(noise_spectrum(b, -0.7) == noise_spectrum(b, 0.7));
    const BathSpec cold = BathSpec::from_eta(0.05, 1e6, 50.0);
    CHECK(noise_spectrum(cold, 2.0) == Approx(spectral_density(cold, 2.0)).epsilon(1e-6));
    for (int i = -4000; i <= 4000; ++i) CHECK(noise_spectrum(b, i * 0.05) >= 0.0);
}

TEST_CASE("noise correlator quadrature") {
    const BathSpec b = BathSpec::from_eta(0.025, 1.0, 50.0);
    for (double tau : {0.0, 0.05, 1.0, 5.0}) {
        const double got = noise_correlation(b, tau).value;
        const double expect = correlator_oracle(b, tau);
        CHECK(std::abs(got - expect) < 1e-6 * std::abs(expect) + 1e-9);
    }
}

TEST_CASE("noise synthesis basics") {
    const TimeGrid grid = make_grid(5.0, 500, 10);
    const BathSpec zero = BathSpec::from_eta(0.0, 1.0, 50.0);
    for (double z : generate_noise(zero, grid, 1, 0).samples) CHECK(z == 0.0);

    const BathSpec b = BathSpec::from_eta(0.05, 1.0, 50.0);
    const NoiseTrajectory a = generate_noise(b, grid, 3, 17), c = generate_noise(b, grid, 3, 17);
    CHECK(a.samples.size() == 501);
    CHECK(a.samples == c.samples);
    CHECK(a.samples != generate_noise(b, grid, 3, 18).samples);
    CHECK(a.samples != generate_noise(b, grid, 4, 17).samples);

    const NoiseSynthesizer synth(b, grid);
    CHECK(synth.window_size() >= 2 * grid.n_steps);
    CHECK_THROWS_AS(NoiseSynthesizer(b, make_grid(5.0, 400, 10)), InvalidArgument); // dt wc = 0.625
}

TEST_CASE("synthesized covariance is the band-limited correlator") {
    const BathSpec b = BathSpec::from_eta(0.025, 1.0, 50.0);
    const TimeGrid grid = make_grid(2.0, 400, 1);
    const NoiseSynthesizer synth(b, grid);
    const double nyquist = std::numbers::pi / grid.dt();
    for (int lag : {0, 3, 40}) {
        const double expect = correlator_oracle(b, lag * grid.dt(), nyquist);
        CHECK(synth.synthesized_covariance(lag).value == Approx(expect).epsilon(1e-7).scale(1e-7));
    }
}

TEST_CASE("noise autocovariance matches the correlator") {
    // dt wc = 0.05 keeps the power above Nyquist below the Monte-Carlo error.
    const BathSpec b = BathSpec::from_eta(0.025, 1.0, 50.0);
    const TimeGrid grid = make_grid(6.0, 6000, 1);
    const NoiseSynthesizer synth(b, grid);
    const std::size_t n = 3000;
    const std::vector<int> lags{0, 1000, 5000};
    std::vector<double> s(lags.size()), s2(lags.size());
    double mean = 0.0, mean2 = 0.0;
    std::vector<double> z;
    for (std::size_t t = 0; t < n; ++t) {
        synth.generate(11, t, z);
        mean += z[0];
        mean2 += z[0] * z[0];
        for (std::size_t i = 0; i < lags.size(); ++i) {
            double acc = 0.0;
            const int count = static_cast<int>(z.size()) - lags[i];
            for (int j = 0; j < count; ++j) acc += z[j] * z[j + lags[i]];
            s[i] += acc / count;
            s2[i] += (acc / count) * (acc / count);
        }
    }
    const double sigma = std::sqrt(mean2 / n);
    CHECK(std::abs(mean / n) < 3.0 * sigma / std::sqrt(double(n)));
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double m = s[i] / n;
        const double se = std::sqrt((s2[i] / n - m * m) / (n - 1));
        const double target = correlator_oracle(b, lags[i] * grid.dt());
        CHECK_MESSAGE(std::abs(m - target) < 3.0 * se, "lag ", lags[i], " sample ", m, " target ", target, " se ", se);
    }
}

TEST_CASE("sled_step is RK4 on the SLED right-hand side") {
    std::mt19937_64 rng(6);
    const SledModel m = SledModel::from_spec(TwoQubit{1.0, 1.2, 0.3}, BathSpec::from_kappa(0.2, 0.5, 50.0));
    const DensityMatrix rho = test::random_density(4, rng);
    const double dt = 0.01, z0 = 0.7, z1 = -0.4, eta = m.bath.eta(), beta = m.bath.beta();
    const CMatrix k1 = rhs_oracle(rho, m.h, m.q, eta, beta, z0);
    const CMatrix k2 = rhs_oracle(rho + 0.5 * dt * k1, m.h, m.q, eta, beta, 0.5 * (z0 + z1));
    const CMatrix k3 = rhs_oracle(rho + 0.5 * dt * k2, m.h, m.q, eta, beta, 0.5 * (z0 + z1));
    const CMatrix k4 = rhs_oracle(rho + dt * k3, m.h, m.q, eta, beta, z1);
    const CMatrix expect = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const DensityMatrix got = sled_step(rho, m.h, m.q, m.bath, z0, z1, dt);
    CHECK(max_abs(got - expect) < 1e-14);
    CHECK(std::abs(got.trace() - rho.trace()) < 1e-12);
    CHECK(max_abs(got - got.adjoint()) < 1e-14);

    // closed system: purity conserved to O(dt^5)
    const BathSpec free = BathSpec::from_eta(0.0, 1.0, 50.0);
    const DensityMatrix pure = ops::pauli_plus_state(ops::sigma_x());
    const DensityMatrix next = sled_step(pure, ops::sigma_z(), ops::sigma_x(), free, 0.0, 0.0, dt);
    CHECK(std::abs((next * next).trace().real() - 1.0) < 1e-10);
}

TEST_CASE("tomography sets") {
    for (int dim : {2, 4}) {
        const auto states = tomography_states(dim);
        CHECK(states.size() == static_cast<std::size_t>(dim * dim));
        CMatrix cols(dim * dim, dim * dim);
        for (std::size_t i = 0; i < states.size(); ++i) {
            CHECK(max_abs(states[i] - states[i].adjoint()) < 1e-15);
            CHECK(std::abs(states[i].trace() - 1.0) < 1e-14);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(states[i]);
            CHECK(es.eigenvalues().minCoeff() > -1e-14);
            cols.col(static_cast<Eigen::Index>(i)) = vectorize(states[i]);
        }
        Eigen::JacobiSVD<CMatrix> svd(cols);
        CHECK(svd.singularValues().minCoeff() > 1e-3);
    }
}

TEST_CASE("closed-system ensemble is unitary") {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec free = BathSpec::from_eta(0.0, 1.0, 50.0);
    const TimeGrid grid = make_grid(10.0, 1000, 10);
    EnsembleOptions opt;
    opt.n_traj = 1;
    opt.workers = 1;
    const DensityMatrix rho0 = ops::pauli_plus_state(ops::sigma_x());
    const EnsembleResult r = run_ensemble(spec, free, rho0, grid, opt);
    const Operator h = build_hamiltonian(spec);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        const CMatrix u = unitary(h, r.times[k]);
        CHECK(max_abs(r.mean[0][k] - u * rho0 * u.adjoint()) < 1e-8);
    }

    const SledReference ref = reconstruct_superoperator(TwoQubit{1.0, 1.1, 0.2}, free, make_grid(5.0, 1000, 5), opt);
    const Operator h2 = build_hamiltonian(TwoQubit{1.0, 1.1, 0.2});
    for (const Propagator& p : ref.propagators) {
        const CMatrix u = unitary(h2, p.t);
        CHECK(max_abs(p.matrix - ops::kron(u.conjugate(), u)) < 1e-8);
    }
}

TEST_CASE("ensemble invariants") {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec bath = BathSpec::from_kappa(0.2, 1.0, 50.0);
    const TimeGrid grid = make_grid(4.0, 400, 20);
    EnsembleOptions opt;
    opt.n_traj = 256;
    opt.seed = 5;
    opt.workers = 1;
    const DensityMatrix rho0 = ops::pauli_plus_state(ops::sigma_z());
    const EnsembleResult a = run_ensemble(spec, bath, rho0, grid, opt);
    CHECK(a.max_trace_drift < 1e-10);
    for (const auto& rho : a.mean[0]) {
        CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
        CHECK(max_abs(rho - rho.adjoint()) < 1e-12);
    }
    for (int workers : {2, 3, 5}) {
        opt.workers = workers;
        CHECK(run_ensemble(spec, bath, rho0, grid, opt).total_sum == a.total_sum);
    }

    // single trajectories stay hermitian with conserved trace
    const SledModel m = SledModel::from_spec(spec, bath);
    const auto rhos = sled_trajectory(m, rho0, grid, generate_noise(bath, grid, 5, 0).samples);
    for (const auto& rho : rhos) {
        CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
        CHECK(max_abs(rho - rho.adjoint()) < 1e-10);
    }

    // doubling the ensemble halves the squared standard error
    opt.workers = 1;
    opt.n_traj = 2048;
    const auto e1 = run_ensemble(spec, bath, rho0, grid, opt).expectation_error(ops::sigma_z());
    opt.n_traj = 4096;
    const auto e2 = run_ensemble(spec, bath, rho0, grid, opt).expectation_error(ops::sigma_z());
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t k = 1; k < e1.size(); ++k) {
        r1 += e1[k] * e1[k];
        r2 += e2[k] * e2[k];
    }
    CHECK(r2 / r1 == Approx(0.5).epsilon(0.25));
}

TEST_CASE("superoperator reconstruction") {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec bath = BathSpec::from_kappa(0.1, 1.0, 50.0);
    const TimeGrid grid = make_grid(3.0, 300, 6);
    EnsembleOptions opt;
    opt.n_traj = 200;
    opt.workers = 1;
    const SledReference ref = reconstruct_superoperator(spec, bath, grid, opt);
    CHECK(ref.propagators.size() == 7);
    CHECK(ref.condition_number < 1e6);
    CHECK(max_abs(ref.propagators[0].matrix - Superoperator::Identity(4, 4)) < 1e-12);
    const auto states = tomography_states(2);
    const CVector id = vectorize(CMatrix::Identity(2, 2));
    for (std::size_t k = 0; k < ref.propagators.size(); ++k) {
        for (std::size_t s = 0; s < states.size(); ++s) {
            const CVector evolved = ref.propagators[k].matrix * vectorize(states[s]);
            CHECK((evolved - vectorize(ref.ensemble.mean[s][k])).norm() < 1e-10);
        }
        CHECK((id.adjoint() * ref.propagators[k].matrix - id.adjoint()).norm() < 1e-10);
    }
}

// Known deviation: the exact populations relax faster than the second-order
// rate by a relative amount proportional to kappa (about 1.6% here), which is
// far outside 3 standard errors at this ensemble size.
TEST_CASE("high-temperature ensemble follows GL populations within 3 SE" * doctest::should_fail()) {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec bath = BathSpec::from_kappa(0.05, 0.1, 50.0);
    const double kt = relaxation_rate(bath, 1.0);
    const TimeGrid grid = TimeGrid::with_max_step(10.0 / kt, 0.01, 20);
    EnsembleOptions opt;
    opt.n_traj = 10000;
    opt.seed = 3;
    const DensityMatrix rho0 = ops::pauli_plus_state(ops::sigma_z());
    const EnsembleResult r = run_ensemble(spec, bath, rho0, grid, opt);
    const auto z = r.expectation(ops::sigma_z());
    const auto se = r.expectation_error(ops::sigma_z());
    const Liouvillian gl = global_lindblad_liouvillian(spec, bath);
    for (std::size_t k = 1; k < z.size(); ++k) {
        const CMatrix rho = devectorize(propagator(gl, r.times[k]).matrix * vectorize(rho0));
        const double expect = (ops::sigma_z() * rho).trace().real();
        CHECK_MESSAGE(std::abs(z[k] - expect) < 3.0 * se[k], "t=", r.times[k], " sled ", z[k], " gl ", expect);
    }
}

TEST_CASE("ensemble populations approach GL as kappa -> 0") {
    // Compare at kappa_T t = 1; the gap should halve with kappa.
    const SystemSpec spec = SingleQubit{1.0};
    const DensityMatrix rho0 = ops::pauli_plus_state(ops::sigma_z());
    std::vector<double> gap, err;
    for (double kappa : {0.05, 0.025}) {
        const BathSpec bath = BathSpec::from_kappa(kappa, 0.1, 50.0);
        const double t = 1.0 / relaxation_rate(bath, 1.0);
        EnsembleOptions opt;
        opt.n_traj = 2000;
        opt.seed = 8;
        const EnsembleResult r = run_ensemble(spec, bath, rho0, TimeGrid::with_max_step(t, 0.01, 1), opt);
        const CMatrix rho = devectorize(propagator(global_lindblad_liouvillian(spec, bath), t).matrix * vectorize(rho0));
        gap.push_back((ops::sigma_z() * rho).trace().real() - r.expectation(ops::sigma_z())[1]);
        err.push_back(r.expectation_error(ops::sigma_z())[1]);
    }
    CHECK(gap[0] > 5.0 * err[0]);
    CHECK(gap[0] < 0.02);
    CHECK(gap[0] / gap[1] == Approx(2.0).epsilon(0.25));
}

TEST_CASE("time grid") {
    const TimeGrid g = TimeGrid::with_max_step(10.0, 0.03, 7);
    CHECK(g.n_steps % g.n_out == 0);
    CHECK(g.dt() <= 0.03);
    CHECK(g.output_time(7) == Approx(10.0));
    CHECK_THROWS_AS(make_grid(1.0, 10, 3).validate_shape(), InvalidArgument);
    const BathSpec b = BathSpec::from_kappa(0.1, 1.0, 50.0);
    CHECK_THROWS_AS(make_grid(1.0, 10, 1).validate(b, ops::sigma_z()), InvalidArgument);
    CHECK_NOTHROW(make_grid(1.0, 100, 1).validate(b, ops::sigma_z()));
    CHECK(TimeGrid::max_step(b, build_hamiltonian(SingleQubit{1.0})) <= 0.01);
}

TEST_CASE("checkpoint resume reuses finished blocks") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "sledbench_test_resume.ckpt";
    fs::remove(path);
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec bath = BathSpec::from_kappa(0.1, 1.0, 50.0);
    const TimeGrid grid = make_grid(1.0, 100, 5);
    EnsembleOptions opt;
    opt.n_traj = 64;
    opt.workers = 1;
    opt.max_blocks = 8;
    const DensityMatrix rho0 = ops::pauli_plus_state(ops::sigma_x());
    const EnsembleResult plain = run_ensemble(spec, bath, rho0, grid, opt);

    opt.checkpoint_path = path.string();
    const EnsembleResult first = run_ensemble(spec, bath, rho0, grid, opt);
    CHECK(first.total_sum == plain.total_sum);
    CHECK(fs::exists(path));

    // header as stored: magic, version, then six 64-bit fields
    CheckpointHeader header;
    {
        std::ifstream in(path, std::ios::binary);
        in.seekg(8 + sizeof(std::uint32_t));
        for (std::uint64_t* f : {&header.fingerprint, &header.seed, &header.n_traj, &header.block_size,
                                 &header.n_blocks, &header.block_length})
            in.read(reinterpret_cast<char*>(f), sizeof(std::uint64_t));
        CHECK(in.good());
    }
    std::vector<BlockSums> stored;
    CHECK(read_checkpoint(path.string(), header, stored));
    CHECK(stored.size() == first.blocks.size());
    for (std::size_t b = 0; b < stored.size(); ++b) CHECK(stored[b].sum == first.blocks[b].sum);

    CheckpointHeader other = header;
    other.seed += 1;
    std::vector<BlockSums> scratch;
    CHECK_THROWS_AS(read_checkpoint(path.string(), other, scratch), InvalidArgument);

    // one block unfinished, another poisoned: the rerun recomputes only the first
    std::vector<BlockSums> blocks = stored;
    blocks[2].done = false;
    blocks[5].sum[0] += 1.0;
    write_checkpoint(path.string(), header, blocks);
    const EnsembleResult again = run_ensemble(spec, bath, rho0, grid, opt);
    CHECK(again.blocks[2].sum == plain.blocks[2].sum);
    CHECK(again.blocks[5].sum[0] == plain.blocks[5].sum[0] + 1.0);
    fs::remove(path);
}
