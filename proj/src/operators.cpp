#include "sledbench/operators.hpp"

#include <cmath>
#include <sstream>

#include "sledbench/errors.hpp"

namespace sledbench {

namespace {

void validate(const SingleQubit& q) {
    if (!(q.omega_q > 0.0) || !std::isfinite(q.omega_q))
        throw InvalidArgument("SingleQubit: omega_q must be positive and finite");
}

void validate(const TwoQubit& q) {
    if (!(q.omega_1 > 0.0) || !(q.omega_2 > 0.0) || !std::isfinite(q.omega_1) ||
        !std::isfinite(q.omega_2))
        throw InvalidArgument("TwoQubit: omega_1 and omega_2 must be positive and finite");
    if (!(q.g >= 0.0) || !std::isfinite(q.g))
        throw InvalidArgument("TwoQubit: g must be non-negative and finite");
}

} // namespace

SystemSpec::SystemSpec(SingleQubit q) : v_(q) { validate(q); }
SystemSpec::SystemSpec(TwoQubit q) : v_(q) { validate(q); }

double SystemSpec::reference_frequency() const {
    return is_single() ? single().omega_q : two().omega_1;
}

namespace ops {

Operator identity(int n) { return CMatrix::Identity(n, n); }

Operator sigma_minus() {
    Operator s = Operator::Zero(2, 2);
    s(0, 1) = 1.0; // |g><e|
    return s;
}

Operator sigma_plus() { return sigma_minus().adjoint(); }

Operator sigma_x() { return sigma_plus() + sigma_minus(); }

Operator sigma_y() { return cplx(0.0, -1.0) * (sigma_plus() - sigma_minus()); }

Operator sigma_z() {
    Operator s = Operator::Zero(2, 2);
    s(0, 0) = -1.0;
    s(1, 1) = 1.0;
    return s;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Operator on_qubit(const Operator& a, int k) {
    if (k == 1) return kron(a, identity(2));
    if (k == 2) return kron(identity(2), a);
    throw InvalidArgument("on_qubit: qubit index must be 1 or 2");
}

DensityMatrix pauli_plus_state(const Operator& pauli) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pauli);
    CVector v = es.eigenvectors().col(es.eigenvalues().size() - 1);
    return v * v.adjoint();
}

} // namespace ops

Operator build_hamiltonian(const SystemSpec& spec) {
    using namespace ops;
    if (spec.is_single()) {
        return spec.single().omega_q * sigma_plus() * sigma_minus();
    }
    const auto& p = spec.two();
    const Operator n1 = on_qubit(sigma_plus() * sigma_minus(), 1);
    const Operator n2 = on_qubit(sigma_plus() * sigma_minus(), 2);
    const Operator xx = kron(sigma_x(), sigma_x());
    return p.omega_1 * n1 + p.omega_2 * n2 + 0.5 * p.g * xx;
}

Operator coupling_operator(const SystemSpec& spec) {
    if (spec.is_single()) return ops::sigma_x();
    return ops::on_qubit(ops::sigma_x(), 1);
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.norm());
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

EigenSystem eigensystem(const Operator& H) {
    if (!is_hermitian(H)) throw InvalidArgument("eigensystem: operator is not Hermitian");
    const CMatrix Hs = 0.5 * (H + H.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(Hs);
    if (es.info() != Eigen::Success) throw NumericalError("eigensystem: eigensolver failed");

    EigenSystem out;
    out.energies = es.eigenvalues();
    out.vectors = es.eigenvectors();
    const Eigen::Index n = H.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        // Phase: first component of (near-)maximal magnitude becomes real positive.
        auto col = out.vectors.col(c);
        const double max_abs = col.cwiseAbs().maxCoeff();
        Eigen::Index pivot = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(col(r)) >= max_abs * (1.0 - 1e-10)) {
                pivot = r;
                break;
            }
        }
        const cplx phase = std::conj(col(pivot)) / std::abs(col(pivot));
        col *= phase;
        col(pivot) = std::abs(col(pivot));
    }
    out.bohr.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out.bohr(i, j) = out.energies(j) - out.energies(i);
    return out;
}

CVector vectorize(const CMatrix& rho) {
    return Eigen::Map<const CVector>(rho.data(), rho.size());
}

CMatrix devectorize(const CVector& v) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != v.size()) {
        std::ostringstream os;
        os << "devectorize: length " << v.size() << " is not a perfect square";
        throw InvalidArgument(os.str());
    }
    return Eigen::Map<const CMatrix>(v.data(), n, n);
}

Superoperator left_multiply(const Operator& a) {
    return ops::kron(ops::identity(static_cast<int>(a.rows())), a);
}

Superoperator right_multiply(const Operator& b) {
    return ops::kron(b.transpose(), ops::identity(static_cast<int>(b.rows())));
}

Superoperator commutator_superop(const Operator& a) { return left_multiply(a) - right_multiply(a); }

Superoperator anticommutator_superop(const Operator& a) {
    return left_multiply(a) + right_multiply(a);
}

Superoperator lindblad_dissipator(const Operator& a) {
    const Operator ada = a.adjoint() * a;
    return ops::kron(a.conjugate(), a) - 0.5 * anticommutator_superop(ada);
}

DensityMatrix gibbs_state(const Operator& H, double beta) {
    const EigenSystem es = eigensystem(H);
    const double e0 = es.energies(0);
    RVector w = (-beta * (es.energies.array() - e0)).exp();
    w /= w.sum();
    return es.vectors * w.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

} // namespace sledbench
