#include "sledbench/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "sledbench/metrics.hpp"
#include "sledbench/noise.hpp"
#include "sledbench/operators.hpp"
#include "sledbench/sled.hpp"
#include "sledbench/weak_coupling.hpp"

namespace sledbench {

namespace {

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

CheckResult bound_check(const std::string& name, double value, double bound) {
    return {name, value <= bound, "error " + sci(value) + " (bound " + sci(bound) + ")"};
}

// Deterministic complex test matrix with entries in [-1, 1].
CMatrix test_matrix(int n, int salt) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = cplx(std::sin(1.3 * i + 0.7 * j + salt), std::cos(0.4 * i - 1.1 * j + 2.0 * salt));
    return m;
}

} // namespace

std::vector<CheckResult> run_selftest() {
    std::vector<CheckResult> out;
    const SystemSpec one = SingleQubit{1.0};
    const SystemSpec two = TwoQubit{1.0, 1.0, 0.2};
    const BathSpec bath = BathSpec::from_kappa(0.1, 1.0, 50.0);

    {
        const CMatrix a = test_matrix(4, 1), x = test_matrix(4, 2), b = test_matrix(4, 3);
        const CVector lhs = vectorize(a * x * b);
        const CVector rhs = ops::kron(b.transpose(), a) * vectorize(x);
        out.push_back(bound_check("vec(A X B) = (B^T kron A) vec X", (lhs - rhs).norm(), 1e-12));
    }
    {
        const Liouvillian l = global_lindblad_liouvillian(one, bath);
        const CMatrix lhs = propagator(l, 1.7).matrix;
        const CMatrix rhs = propagator(l, 0.5).matrix * propagator(l, 1.2).matrix;
        out.push_back(bound_check("semigroup T(t1+t2) = T(t2) T(t1)", (lhs - rhs).norm(), 1e-8));
    }
    {
        const Operator h = build_hamiltonian(one);
        const RMatrix r = transition_rates(h, coupling_operator(one), bath);
        const double ratio = r(1, 0) / r(0, 1);
        out.push_back(bound_check("detailed balance Gamma_up / Gamma_down = exp(-beta w)",
                                  std::abs(ratio - std::exp(-bath.beta())), 1e-12));
    }
    {
        double worst = 0.0;
        for (auto kind : {LiouvillianKind::Redfield, LiouvillianKind::GlobalLindblad, LiouvillianKind::LocalLindblad}) {
            const Liouvillian l = build_liouvillian(kind, two, bath);
            const CVector id = vectorize(CMatrix::Identity(4, 4));
            worst = std::max(worst, (id.adjoint() * l.matrix).norm());
        }
        out.push_back(bound_check("trace preservation of all Liouvillians", worst, 1e-10));
    }
    {
        const Liouvillian l = global_lindblad_liouvillian(two, bath);
        const DensityMatrix ss = steady_state(l);
        const DensityMatrix gibbs = gibbs_state(build_hamiltonian(two), bath.beta());
        out.push_back(bound_check("global Lindblad steady state is Gibbs", (ss - gibbs).norm(), 1e-7));
    }
    {
        const Superoperator t = propagator(global_lindblad_liouvillian(two, bath), 0.8).matrix;
        const Superoperator back = channel_from_kraus(kraus_operators(t));
        out.push_back(bound_check("Choi -> Kraus -> channel round trip", (back - t).norm(), 1e-9));
        const double lmin = choi_min_eigenvalue(t);
        out.push_back({"global Lindblad Choi matrix is positive", lmin >= -1e-9, "min eigenvalue " + sci(lmin)});
    }
    {
        TimeGrid grid;
        grid.t_max = 1.0;
        grid.n_steps = 100;
        grid.n_out = 10;
        EnsembleOptions opt;
        opt.n_traj = 96;
        opt.seed = 42;
        opt.workers = 1;
        const auto a = run_ensemble(one, bath, ops::pauli_plus_state(ops::sigma_x()), grid, opt);
        opt.workers = 3;
        const auto b = run_ensemble(one, bath, ops::pauli_plus_state(ops::sigma_x()), grid, opt);
        const bool same = a.total_sum == b.total_sum;
        out.push_back({"ensemble bit-identical for 1 and 3 workers", same, same ? "identical" : "sums differ"});
        out.push_back(bound_check("per-trajectory trace drift", a.max_trace_drift, 1e-10));
    }
    return out;
}

std::vector<NoiseCheckRow> noise_check(const BathSpec& bath, const TimeGrid& grid, std::size_t n_traj,
                                       std::uint64_t seed, const std::vector<int>& lags) {
    if (n_traj < 2) throw InvalidArgument("noise_check: need at least two trajectories");
    for (int lag : lags)
        if (lag < 0 || lag >= grid.n_steps) throw InvalidArgument("noise_check: lag outside the grid");
    const NoiseSynthesizer synth(bath, grid);
    std::vector<double> sum(lags.size(), 0.0), sumsq(lags.size(), 0.0);
    std::vector<double> z;
    for (std::size_t t = 0; t < n_traj; ++t) {
        synth.generate(seed, t, z);
        for (std::size_t i = 0; i < lags.size(); ++i) {
            const int lag = lags[i];
            const int count = static_cast<int>(z.size()) - lag;
            double acc = 0.0;
            for (int j = 0; j < count; ++j) acc += z[j] * z[j + lag];
            const double y = acc / count;
            sum[i] += y;
            sumsq[i] += y * y;
        }
    }
    std::vector<NoiseCheckRow> rows;
    const double n = static_cast<double>(n_traj);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        NoiseCheckRow r;
        r.lag = lags[i];
        r.tau = lags[i] * grid.dt();
        r.sample = sum[i] / n;
        const double var = std::max(0.0, (sumsq[i] - n * r.sample * r.sample) / (n - 1.0));
        r.std_error = std::sqrt(var / n);
        r.target = noise_correlation(bath, r.tau).value;
        r.band_limited = synth.synthesized_covariance(lags[i]).value;
        r.z_target = (r.sample - r.target) / r.std_error;
        r.z_band = (r.sample - r.band_limited) / r.std_error;
        rows.push_back(r);
    }
    return rows;
}

} // namespace sledbench
