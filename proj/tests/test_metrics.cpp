#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sledbench/errors.hpp"
#include "sledbench/metrics.hpp"
#include "sledbench/sled.hpp"
#include "sledbench/weak_coupling.hpp"
#include "support.hpp"

using namespace sledbench;
using doctest::Approx;

namespace {

std::vector<Propagator> series_of(const Liouvillian& l, double dt, int n) { return propagator_series(l, dt, n); }

CMatrix random_unitary(int n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<CMatrix> qr(test::random_matrix(n, rng));
    return qr.householderQ() * CMatrix::Identity(n, n);
}

} // namespace

TEST_CASE("frobenius norm") {
    CHECK(frobenius_norm(CMatrix::Identity(4, 4)) == Approx(2.0).epsilon(1e-15));
    CHECK(frobenius_norm(CMatrix::Zero(4, 4)) == 0.0);
    std::mt19937_64 rng(1);
    const CMatrix a = test::random_matrix(16, rng);
    double s = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) s += std::norm(a(i, j));
    CHECK(frobenius_norm(a) == Approx(std::sqrt(s)).epsilon(1e-14));
}

TEST_CASE("normalized distance") {
    std::mt19937_64 rng(2);
    const CMatrix a = test::random_matrix(4, rng);
    CHECK(distance(a, a) == Approx(0.0).scale(1e-15));
    CHECK(distance(a, -a) == Approx(1.0).epsilon(1e-15));
    CHECK(distance(a, 3.7 * a) < 1e-15);
    CHECK_THROWS_AS(distance(a, CMatrix::Zero(4, 4)), InvalidArgument);
    CHECK_THROWS_AS(distance(a, CMatrix::Identity(16, 16)), InvalidArgument);
}

TEST_CASE("distance is a bounded symmetric metric") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const CMatrix a = test::random_matrix(4, rng), b = test::random_matrix(4, rng), c = test::random_matrix(4, rng);
        const double ab = distance(a, b), bc = distance(b, c), ac = distance(a, c);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab == distance(b, a));
        CHECK(ac <= ab + bc + 1e-15);
    }
}

TEST_CASE("distance is unitarily invariant") {
    std::mt19937_64 rng(4);
    for (int n : {2, 4}) {
        const CMatrix u = random_unitary(n, rng);
        const CMatrix w = ops::kron(u.conjugate(), u);
        for (int trial = 0; trial < 10; ++trial) {
            const CMatrix a = test::random_matrix(n * n, rng), b = test::random_matrix(n * n, rng);
            CHECK(std::abs(distance(w * a * w.adjoint(), w * b * w.adjoint()) - distance(a, b)) < 1e-12);
        }
    }
}

TEST_CASE("max distance over a grid") {
    const BathSpec bath = BathSpec::from_kappa(0.1, 1.0, 50.0);
    const auto gl = series_of(global_lindblad_liouvillian(SingleQubit{1.0}, bath), 0.5, 40);
    const DistanceCurve same = max_distance(gl, gl);
    CHECK(same.delta_max == 0.0);
    CHECK(same.times.size() == 41);

    const auto rf = series_of(redfield_liouvillian(SingleQubit{1.0}, bath), 0.5, 40);
    const DistanceCurve c = max_distance(rf, gl);
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t k = 0; k < gl.size(); ++k) {
        const double d = distance(rf[k].matrix, gl[k].matrix);
        CHECK(c.delta[k] == Approx(d).epsilon(1e-15));
        if (d > worst) worst = d, at = k;
    }
    CHECK(c.delta_max == worst);
    CHECK(c.argmax_index == at);
    CHECK(c.argmax_time == Approx(0.5 * at));

    CHECK_THROWS_AS(max_distance(rf, series_of(global_lindblad_liouvillian(SingleQubit{1.0}, bath), 0.5, 30)),
                    InvalidArgument);
    CHECK_THROWS_AS(max_distance(rf, series_of(global_lindblad_liouvillian(SingleQubit{1.0}, bath), 0.25, 40)),
                    InvalidArgument);

    std::ostringstream csv;
    c.write_csv(csv);
    CHECK(csv.str().rfind("t,delta\n", 0) == 0);
    const auto j = nlohmann::json::parse(c.to_json());
    CHECK(j["delta_max"].get<double>() == c.delta_max);
    CHECK(j["delta"].size() == 41);
}

TEST_CASE("closed-system BM and SLED coincide") {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec free = BathSpec::from_eta(0.0, 1.0, 50.0);
    TimeGrid grid;
    grid.t_max = 10.0;
    grid.n_steps = 2000;
    grid.n_out = 20;
    EnsembleOptions opt;
    opt.n_traj = 1;
    opt.workers = 1;
    const SledReference ref = reconstruct_superoperator(spec, free, grid, opt);
    const auto bm = series_of(global_lindblad_liouvillian(spec, free), 0.5, 20);
    CHECK(max_distance(bm, ref.propagators).delta_max < 1e-6);
}

TEST_CASE("jackknife error of the maximum distance") {
    const SystemSpec spec = SingleQubit{1.0};
    const BathSpec bath = BathSpec::from_kappa(0.1, 1.0, 50.0);
    TimeGrid grid;
    grid.t_max = 4.0;
    grid.n_steps = 400;
    grid.n_out = 8;
    EnsembleOptions opt;
    opt.n_traj = 400;
    opt.max_blocks = 20;
    const SledReference ref = reconstruct_superoperator(spec, bath, grid, opt);
    const auto gl = series_of(global_lindblad_liouvillian(spec, bath), 0.5, 8);
    const DistanceEstimate e = max_distance_with_error(gl, ref);
    CHECK(e.replicates.size() == ref.ensemble.n_blocks());
    CHECK(e.std_error > 0.0);
    CHECK(e.std_error < 0.2 * e.curve.delta_max);
    CHECK(e.curve.delta_max == max_distance(gl, ref.propagators).delta_max);
}

TEST_CASE("choi matrix and kraus decomposition") {
    CHECK(choi_min_eigenvalue(Superoperator::Identity(4, 4)) == Approx(0.0).scale(1e-14));
    const CMatrix choi = choi_matrix(Superoperator::Identity(4, 4));
    CHECK(choi.trace().real() == Approx(2.0));

    // CP <=> Kraus reconstruction succeeds
    std::vector<Superoperator> channels;
    for (double kappa : {0.1, 0.3, 0.5})
        for (double beta : {1.0, 5.0}) {
            const BathSpec bath = BathSpec::from_kappa(kappa, beta, 50.0);
            for (double t : {0.2, 1.0, 4.0}) {
                channels.push_back(propagator(global_lindblad_liouvillian(SingleQubit{1.0}, bath), t).matrix);
                channels.push_back(propagator(redfield_liouvillian(SingleQubit{1.0}, bath), t).matrix);
            }
        }
    int cp = 0, not_cp = 0;
    for (const auto& t : channels) {
        const bool positive = choi_min_eigenvalue(t) >= -1e-9;
        bool reconstructs = false;
        try {
            reconstructs = (channel_from_kraus(kraus_operators(t)) - t).norm() < 1e-8;
        } catch (const NumericalError&) {
        }
        CHECK(positive == reconstructs);
        (positive ? cp : not_cp) += 1;
    }
    CHECK(cp > 0);
    CHECK(not_cp > 0);
}
