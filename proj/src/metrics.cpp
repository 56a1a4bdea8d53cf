#include "sledbench/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>
#include <Eigen/Eigenvalues>

#include "sledbench/errors.hpp"

namespace sledbench {

double frobenius_norm(const CMatrix& a) { return a.norm(); }

double distance(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("distance: shape mismatch");
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw InvalidArgument("distance: zero-norm superoperator");
    return 0.5 * (a / na - b / nb).norm();
}

DistanceCurve max_distance(const std::vector<Propagator>& bm, const std::vector<Propagator>& exact) {
    if (bm.size() != exact.size() || bm.empty()) {
        std::ostringstream os;
        os << "max_distance: grid mismatch (" << bm.size() << " vs " << exact.size() << " points)";
        throw InvalidArgument(os.str());
    }
    DistanceCurve c;
    c.times.reserve(bm.size());
    c.delta.reserve(bm.size());
    for (std::size_t k = 0; k < bm.size(); ++k) {
        if (std::abs(bm[k].t - exact[k].t) > 1e-9 * std::max(1.0, std::abs(exact[k].t))) {
            std::ostringstream os;
            os << "max_distance: time mismatch at point " << k << " (" << bm[k].t << " vs "
               << exact[k].t << ")";
            throw InvalidArgument(os.str());
        }
        const double d = distance(bm[k].matrix, exact[k].matrix);
        c.times.push_back(exact[k].t);
        c.delta.push_back(d);
        if (k == 0 || d > c.delta_max) {
            c.delta_max = d;
            c.argmax_time = exact[k].t;
            c.argmax_index = k;
        }
    }
    return c;
}

DistanceEstimate max_distance_with_error(const std::vector<Propagator>& bm, const SledReference& ref) {
    DistanceEstimate e;
    e.curve = max_distance(bm, ref.propagators);
    const std::size_t nb = ref.ensemble.n_blocks();
    if (nb < 2) return e;
    double avg = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        e.replicates.push_back(max_distance(bm, ref.leave_one_out(b)).delta_max);
        avg += e.replicates.back();
    }
    avg /= static_cast<double>(nb);
    double ss = 0.0;
    for (double r : e.replicates) ss += (r - avg) * (r - avg);
    e.std_error = std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
    return e;
}

void DistanceCurve::write_csv(std::ostream& os) const {
    os << "t,delta\n";
    os.precision(17);
    for (std::size_t k = 0; k < times.size(); ++k) os << times[k] << ',' << delta[k] << '\n';
}

std::string DistanceCurve::to_json() const {
    nlohmann::json j;
    j["times"] = times;
    j["delta"] = delta;
    j["delta_max"] = delta_max;
    j["argmax_time"] = argmax_time;
    j["metadata"] = metadata;
    return j.dump(2);
}

CMatrix choi_matrix(const Superoperator& t) {
    const auto d = t.rows();
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d))));
    if (n * n != d || t.cols() != d) throw InvalidArgument("choi_matrix: not a square superoperator");
    CMatrix c(d, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index a = 0; a < n; ++a)
                for (Eigen::Index b = 0; b < n; ++b) c(i * n + a, j * n + b) = t(a + n * b, i + n * j);
    return c;
}

double choi_min_eigenvalue(const Superoperator& t) {
    const CMatrix c = choi_matrix(t);
    const CMatrix h = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::vector<Operator> kraus_operators(const Superoperator& t, double tol) {
    const CMatrix c = choi_matrix(t);
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(c.rows()))));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c + c.adjoint()));
    std::vector<Operator> out;
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
        const double lambda = es.eigenvalues()(k);
        if (lambda < -tol) {
            std::ostringstream os;
            os << "kraus_operators: Choi eigenvalue " << lambda << " below -" << tol;
            throw NumericalError(os.str());
        }
        if (lambda <= tol) continue;
        Operator kr(n, n);
        const double s = std::sqrt(lambda);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index i = 0; i < n; ++i) kr(a, i) = s * es.eigenvectors()(i * n + a, k);
        out.push_back(kr);
    }
    return out;
}

Superoperator channel_from_kraus(const std::vector<Operator>& kraus) {
    if (kraus.empty()) throw InvalidArgument("channel_from_kraus: empty Kraus set");
    const auto n = kraus.front().rows();
    Superoperator t = Superoperator::Zero(n * n, n * n);
    for (const Operator& k : kraus) t += ops::kron(k.conjugate(), k);
    return t;
}

} // namespace sledbench
