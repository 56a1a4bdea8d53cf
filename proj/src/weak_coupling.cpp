#include "sledbench/weak_coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "sledbench/errors.hpp"

namespace sledbench {

const char* to_string(LiouvillianKind k) {
    switch (k) {
    case LiouvillianKind::Redfield: return "redfield";
    case LiouvillianKind::GlobalLindblad: return "lindblad_global";
    case LiouvillianKind::LocalLindblad: return "lindblad_local";
    }
    return "unknown";
}

LiouvillianKind liouvillian_kind_from_string(const std::string& s) {
    if (s == "redfield") return LiouvillianKind::Redfield;
    if (s == "lindblad_global") return LiouvillianKind::GlobalLindblad;
    if (s == "lindblad_local") return LiouvillianKind::LocalLindblad;
    throw InvalidArgument("unknown Born-Markov solver '" + s + "'");
}

BornMarkovInputs BornMarkovInputs::from_spec(const SystemSpec& spec, const BathSpec& bath) {
    const Operator h = build_hamiltonian(spec);
    return BornMarkovInputs{h, h, coupling_operator(spec), bath, spec.bath_qubit_frequency()};
}

namespace {

Superoperator coherent_part(const Operator& h) {
    return cplx(0.0, -1.0) * commutator_superop(h);
}

void check_nondegenerate(const EigenSystem& es, double omega_ref) {
    for (Eigen::Index i = 1; i < es.energies.size(); ++i) {
        if (es.energies(i) - es.energies(i - 1) <= kDegeneracyTolerance * omega_ref) {
            std::ostringstream os;
            os << "global Lindblad requires a non-degenerate spectrum; levels " << i - 1 << " and "
               << i << " differ by " << es.energies(i) - es.energies(i - 1);
            throw DegenerateSpectrum(os.str());
        }
    }
}

} // namespace

Liouvillian redfield_liouvillian(const BornMarkovInputs& in) {
    const int n = static_cast<int>(in.h_rates.rows());
    const EigenSystem es = eigensystem(in.h_rates);
    const CMatrix q_eig = es.vectors.adjoint() * in.coupling * es.vectors;

    // Lambda_{nl} = (1/2) q_{nl} S(E_l - E_n); the dissipator is
    // -[q, Lambda rho - rho Lambda^dag], equal to -sum_lm R_jklm rho_lm.
    CMatrix lambda_eig(n, n);
    for (int a = 0; a < n; ++a)
        for (int l = 0; l < n; ++l) lambda_eig(a, l) = 0.5 * q_eig(a, l) * noise_power(in.bath, es.bohr(a, l));
    const CMatrix lambda = es.vectors * lambda_eig * es.vectors.adjoint();
    const CMatrix& q = in.coupling;

    Superoperator diss = -left_multiply(q * lambda) + ops::kron(lambda.conjugate(), q) +
                         ops::kron(q.transpose(), lambda) -
                         right_multiply(lambda.adjoint() * q);
    return Liouvillian{n, coherent_part(in.h_coherent) + diss, LiouvillianKind::Redfield};
}

RMatrix transition_rates(const Operator& h, const Operator& coupling, const BathSpec& bath) {
    const EigenSystem es = eigensystem(h);
    const CMatrix q_eig = es.vectors.adjoint() * coupling * es.vectors;
    const Eigen::Index n = h.rows();
    RMatrix rates = RMatrix::Zero(n, n); // rates(n, m) = Gamma(m -> n)
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index m = 0; m < n; ++m)
            if (a != m) rates(a, m) = std::norm(q_eig(a, m)) * noise_power(bath, es.energies(m) - es.energies(a));
    return rates;
}

Liouvillian global_lindblad_liouvillian(const BornMarkovInputs& in) {
    const int n = static_cast<int>(in.h_rates.rows());
    const EigenSystem es = eigensystem(in.h_rates);
    check_nondegenerate(es, in.bath.omega_ref());
    const CMatrix q_eig = es.vectors.adjoint() * in.coupling * es.vectors;

    // Transitions m -> a release energy w = E_m - E_a. Transitions sharing a
    // Bohr frequency are grouped into one jump operator A(w).
    struct Transition {
        double omega;
        int to;
        int from;
    };
    std::vector<Transition> tr;
    for (int a = 0; a < n; ++a)
        for (int m = 0; m < n; ++m) tr.push_back({es.energies(m) - es.energies(a), a, m});
    std::sort(tr.begin(), tr.end(), [](const Transition& x, const Transition& y) { return x.omega < y.omega; });

    const double tol = kDegeneracyTolerance * in.bath.omega_ref();
    Superoperator diss = Superoperator::Zero(n * n, n * n);
    std::size_t i = 0;
    while (i < tr.size()) {
        std::size_t j = i + 1;
        while (j < tr.size() && tr[j].omega - tr[j - 1].omega <= tol) ++j;
        CMatrix jump_eig = CMatrix::Zero(n, n);
        double omega_sum = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            jump_eig(tr[k].to, tr[k].from) += q_eig(tr[k].to, tr[k].from);
            omega_sum += tr[k].omega;
        }
        const double omega = omega_sum / static_cast<double>(j - i);
        if (jump_eig.norm() > 0.0) {
            const CMatrix jump = es.vectors * jump_eig * es.vectors.adjoint();
            diss += noise_power(in.bath, omega) * lindblad_dissipator(jump);
        }
        i = j;
    }
    return Liouvillian{n, coherent_part(in.h_coherent) + diss, LiouvillianKind::GlobalLindblad};
}

Liouvillian local_lindblad_liouvillian(const BornMarkovInputs& in) {
    const int n = static_cast<int>(in.h_coherent.rows());
    if (n == 2) {
        Liouvillian l = global_lindblad_liouvillian(in);
        l.kind = LiouvillianKind::LocalLindblad;
        return l;
    }
    if (n != 4) throw InvalidArgument("local Lindblad: expected a two-qubit system");
    const double kappa = in.bath.kappa();
    const double n_th = occupation(in.bath, in.local_frequency);
    const Operator down = ops::on_qubit(ops::sigma_minus(), 1);
    const Operator up = ops::on_qubit(ops::sigma_plus(), 1);
    Superoperator diss = kappa * (n_th + 1.0) * lindblad_dissipator(down);
    if (n_th > 0.0) diss += kappa * n_th * lindblad_dissipator(up);
    return Liouvillian{n, coherent_part(in.h_coherent) + diss, LiouvillianKind::LocalLindblad};
}

Liouvillian build_liouvillian(LiouvillianKind kind, const BornMarkovInputs& in) {
    switch (kind) {
    case LiouvillianKind::Redfield: return redfield_liouvillian(in);
    case LiouvillianKind::GlobalLindblad: return global_lindblad_liouvillian(in);
    case LiouvillianKind::LocalLindblad: return local_lindblad_liouvillian(in);
    }
    throw InvalidArgument("build_liouvillian: unknown kind");
}

Liouvillian redfield_liouvillian(const SystemSpec& spec, const BathSpec& bath) {
    return redfield_liouvillian(BornMarkovInputs::from_spec(spec, bath));
}

Liouvillian global_lindblad_liouvillian(const SystemSpec& spec, const BathSpec& bath) {
    return global_lindblad_liouvillian(BornMarkovInputs::from_spec(spec, bath));
}

Liouvillian local_lindblad_liouvillian(const SystemSpec& spec, const BathSpec& bath) {
    return local_lindblad_liouvillian(BornMarkovInputs::from_spec(spec, bath));
}

Liouvillian build_liouvillian(LiouvillianKind kind, const SystemSpec& spec, const BathSpec& bath) {
    return build_liouvillian(kind, BornMarkovInputs::from_spec(spec, bath));
}

Propagator propagator(const Liouvillian& L, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("propagator: t must be >= 0");
    const Eigen::Index d = L.matrix.rows();
    if (t == 0.0) return Propagator{Superoperator::Identity(d, d), 0.0};
    const Superoperator lt = L.matrix * t;
    Superoperator e = lt.exp();
    if (!e.allFinite()) {
        std::ostringstream os;
        os << "propagator: overflow in exp(L t) for t = " << t << ", ||L|| = " << L.matrix.norm();
        throw NumericalError(os.str());
    }
    return Propagator{std::move(e), t};
}

std::vector<Propagator> propagator_series(const Liouvillian& L, double dt, int n_steps) {
    if (n_steps < 0) throw InvalidArgument("propagator_series: n_steps must be >= 0");
    std::vector<Propagator> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    const Eigen::Index d = L.matrix.rows();
    out.push_back(Propagator{Superoperator::Identity(d, d), 0.0});
    if (n_steps == 0) return out;
    const Propagator step = propagator(L, dt);
    for (int k = 1; k <= n_steps; ++k) {
        Superoperator next = step.matrix * out.back().matrix;
        out.push_back(Propagator{std::move(next), k * dt});
    }
    if (!out.back().matrix.allFinite()) throw NumericalError("propagator_series: overflow");
    return out;
}

double steady_state_time(const Liouvillian& L) {
    Eigen::ComplexEigenSolver<CMatrix> es(L.matrix, false);
    if (es.info() != Eigen::Success) throw NumericalError("steady_state_time: eigensolver failed");
    const double eps = 1e-12 * L.matrix.norm();
    double slowest = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double re = es.eigenvalues()(i).real();
        if (re < -eps) slowest = std::max(slowest, re);
    }
    if (!std::isfinite(slowest))
        throw NumericalError("steady_state_time: no decaying eigenvalue (no relaxation)");
    return -3.0 / slowest;
}

DensityMatrix steady_state(const Liouvillian& L) {
    Eigen::ComplexEigenSolver<CMatrix> es(L.matrix, true);
    if (es.info() != Eigen::Success) throw NumericalError("steady_state: eigensolver failed");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best))) best = i;
    CMatrix rho = devectorize(es.eigenvectors().col(best));
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

std::pair<cplx, cplx> rwa_rates(double kappa, double g, double detuning) {
    const cplx b(0.5 * kappa, detuning);
    const cplx disc = std::sqrt(b * b - g * g);
    cplx l1 = 0.5 * (b + disc);
    cplx l2 = 0.5 * (b - disc);
    if (l2.real() > l1.real()) std::swap(l1, l2);
    return {l1, l2};
}

Operator rwa_two_qubit_hamiltonian(double omega_1, double omega_2, double g) {
    using namespace ops;
    const Operator sp1 = on_qubit(sigma_plus(), 1), sm1 = on_qubit(sigma_minus(), 1);
    const Operator sp2 = on_qubit(sigma_plus(), 2), sm2 = on_qubit(sigma_minus(), 2);
    return omega_1 * sp1 * sm1 + omega_2 * sp2 * sm2 + 0.5 * g * (sp1 * sm2 + sm1 * sp2);
}

} // namespace sledbench
