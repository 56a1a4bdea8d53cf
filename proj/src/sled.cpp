#include "sledbench/sled.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/SVD>

#include "sledbench/checkpoint.hpp"
#include "sledbench/errors.hpp"
#include "sledbench/hash.hpp"

namespace sledbench {

SledModel SledModel::from_spec(const SystemSpec& spec, const BathSpec& bath) {
    return SledModel{build_hamiltonian(spec), coupling_operator(spec), bath};
}

SledGenerators sled_generators(const SledModel& m) {
    const double eta = m.bath.eta();
    const double beta = m.bath.beta();
    const Superoperator cq = commutator_superop(m.q);
    const Operator hq = m.h * m.q - m.q * m.h;
    SledGenerators g;
    g.drift = cplx(0.0, -1.0) * commutator_superop(m.h) - (eta / beta) * (cq * cq) +
              (0.5 * eta) * (cq * anticommutator_superop(hq));
    g.noise = cplx(0.0, 1.0) * cq;
    return g;
}

namespace {

CMatrix sled_rhs(const CMatrix& rho, const Operator& h, const Operator& q, const Operator& hq,
                 double eta, double beta, double zeta) {
    const CMatrix qr = q * rho - rho * q;
    const CMatrix anti = hq * rho + rho * hq;
    return cplx(0.0, -1.0) * (h * rho - rho * h) - (eta / beta) * (q * qr - qr * q) +
           (0.5 * eta) * (q * anti - anti * q) + cplx(0.0, zeta) * qr;
}

} // namespace

DensityMatrix sled_step(const DensityMatrix& rho, const Operator& h, const Operator& q,
                        const BathSpec& bath, double zeta_start, double zeta_end, double dt) {
    const Operator hq = h * q - q * h;
    const double eta = bath.eta(), beta = bath.beta();
    const double zeta_mid = 0.5 * (zeta_start + zeta_end);
    const CMatrix k1 = sled_rhs(rho, h, q, hq, eta, beta, zeta_start);
    const CMatrix k2 = sled_rhs(rho + 0.5 * dt * k1, h, q, hq, eta, beta, zeta_mid);
    const CMatrix k3 = sled_rhs(rho + 0.5 * dt * k2, h, q, hq, eta, beta, zeta_mid);
    const CMatrix k4 = sled_rhs(rho + dt * k3, h, q, hq, eta, beta, zeta_end);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<DensityMatrix> sled_trajectory(const SledModel& m, const DensityMatrix& rho0,
                                           const TimeGrid& grid, const std::vector<double>& zeta) {
    grid.validate_shape();
    if (zeta.size() != static_cast<std::size_t>(grid.n_steps) + 1)
        throw InvalidArgument("sled_trajectory: noise length must be n_steps + 1");
    std::vector<DensityMatrix> out;
    out.reserve(grid.n_out + 1);
    DensityMatrix rho = rho0;
    out.push_back(rho);
    const double dt = grid.dt();
    for (int s = 0; s < grid.n_steps; ++s) {
        rho = sled_step(rho, m.h, m.q, m.bath, zeta[s], zeta[s + 1], dt);
        if ((s + 1) % grid.stride() == 0) out.push_back(rho);
    }
    return out;
}

std::vector<Operator> pauli_basis(int dim) {
    const std::vector<Operator> p = {ops::identity(2), ops::sigma_x(), ops::sigma_y(), ops::sigma_z()};
    std::vector<Operator> out;
    if (dim == 2) {
        for (const Operator& a : p) out.push_back(a / std::sqrt(2.0));
    } else if (dim == 4) {
        for (const Operator& a : p)
            for (const Operator& b : p) out.push_back(ops::kron(a, b) / 2.0);
    } else {
        throw InvalidArgument("pauli_basis: dimension must be 2 or 4");
    }
    return out;
}

CMatrix pauli_basis_matrix(int dim) {
    const std::vector<Operator> basis = pauli_basis(dim);
    CMatrix u(dim * dim, dim * dim);
    for (int mu = 0; mu < dim * dim; ++mu) u.col(mu) = vectorize(basis[mu]);
    return u;
}

std::vector<DensityMatrix> tomography_states(int dim) {
    const std::vector<DensityMatrix> single = {
        ops::pauli_plus_state(ops::sigma_x()), ops::pauli_plus_state(ops::sigma_y()),
        ops::pauli_plus_state(ops::sigma_z()), 0.5 * ops::identity(2)};
    if (dim == 2) return single;
    if (dim != 4) throw InvalidArgument("tomography_states: dimension must be 2 or 4");
    std::vector<DensityMatrix> out;
    for (const DensityMatrix& a : single)
        for (const DensityMatrix& b : single) out.push_back(ops::kron(a, b));
    return out;
}

int default_worker_count() {
    if (const char* env = std::getenv("SLEDBENCH_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

struct Entry {
    int row;
    int col;
    double a0;
    double aq;
};

// Real generators in the Pauli basis, stored as one merged sparse pattern.
struct RealGenerator {
    int dim{0};
    RMatrix g0;
    RMatrix gq;
    std::vector<Entry> entries;
};

RealGenerator real_generator(const SledModel& m) {
    const SledGenerators gens = sled_generators(m);
    const int n = m.dim();
    const CMatrix u = pauli_basis_matrix(n);
    const CMatrix c0 = u.adjoint() * gens.drift * u;
    const CMatrix cq = u.adjoint() * gens.noise * u;
    const double scale = std::max({c0.norm(), cq.norm(), 1.0});
    if (c0.imag().cwiseAbs().maxCoeff() > 1e-10 * scale || cq.imag().cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericalError("SLED generator is not Hermiticity preserving");
    RealGenerator g;
    g.dim = n;
    g.g0 = c0.real();
    g.gq = cq.real();
    const double drop = 1e-14 * scale;
    for (Eigen::Index r = 0; r < g.g0.rows(); ++r) {
        for (Eigen::Index c = 0; c < g.g0.cols(); ++c) {
            double a0 = g.g0(r, c), aq = g.gq(r, c);
            if (std::abs(a0) <= drop) a0 = 0.0;
            if (std::abs(aq) <= drop) aq = 0.0;
            g.g0(r, c) = a0;
            g.gq(r, c) = aq;
            if (a0 != 0.0 || aq != 0.0)
                g.entries.push_back({static_cast<int>(r), static_cast<int>(c), a0, aq});
        }
    }
    return g;
}

template <int D, int K>
class Integrator {
public:
    static constexpr int kOptions = (K == 1) ? Eigen::ColMajor : Eigen::RowMajor;
    using State = Eigen::Matrix<double, D, K, kOptions>;

    explicit Integrator(const std::vector<Entry>& entries)
        : e_(entries), c_start_(entries.size()), c_mid_(entries.size()), c_end_(entries.size()) {}

    // Integrates from r0 and writes the state at every output point into
    // out[(k * D + mu) * K + s].
    void run(const double* zeta, const State& r0, int n_steps, int stride, double dt, double* out) {
        State r = r0, k1, k2, k3, k4, tmp;
        Eigen::Map<State> first(out);
        first = r;
        int written = 1;
        for (int s = 0; s < n_steps; ++s) {
            const double z0 = zeta[s], z1 = zeta[s + 1], zm = 0.5 * (z0 + z1);
            for (std::size_t i = 0; i < e_.size(); ++i) {
                c_start_[i] = e_[i].a0 + z0 * e_[i].aq;
                c_mid_[i] = e_[i].a0 + zm * e_[i].aq;
                c_end_[i] = e_[i].a0 + z1 * e_[i].aq;
            }
            apply(c_start_, r, k1);
            tmp = r + (0.5 * dt) * k1;
            apply(c_mid_, tmp, k2);
            tmp = r + (0.5 * dt) * k2;
            apply(c_mid_, tmp, k3);
            tmp = r + dt * k3;
            apply(c_end_, tmp, k4);
            r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if ((s + 1) % stride == 0) {
                Eigen::Map<State> dst(out + static_cast<std::size_t>(written) * D * K);
                dst = r;
                ++written;
            }
        }
    }

private:
    void apply(const std::vector<double>& c, const State& in, State& out) const {
        out.setZero();
        for (std::size_t i = 0; i < e_.size(); ++i) out.row(e_[i].row) += c[i] * in.row(e_[i].col);
    }

    const std::vector<Entry>& e_;
    std::vector<double> c_start_, c_mid_, c_end_;
};

struct RunShape {
    int d{0};
    int k{0};
    int n_points{0};
    std::size_t block_length() const { return static_cast<std::size_t>(n_points) * d * k; }
};

// Type-erased per-trajectory integration for the supported (D, K) pairs.
class TrajectoryRunner {
public:
    TrajectoryRunner(const RealGenerator& g, const RMatrix& r0, const TimeGrid& grid)
        : g_(g), r0_(r0), grid_(grid) {}

    void run(const double* zeta, double* out) const {
        const int d = static_cast<int>(r0_.rows());
        const int k = static_cast<int>(r0_.cols());
        if (d == 4 && k == 1) run_impl<4, 1>(zeta, out);
        else if (d == 4 && k == 4) run_impl<4, 4>(zeta, out);
        else if (d == 16 && k == 1) run_impl<16, 1>(zeta, out);
        else if (d == 16 && k == 16) run_impl<16, 16>(zeta, out);
        else throw InvalidArgument("run_ensemble: unsupported state layout");
    }

private:
    template <int D, int K>
    void run_impl(const double* zeta, double* out) const {
        Integrator<D, K> integ(g_.entries);
        typename Integrator<D, K>::State r0 = r0_;
        integ.run(zeta, r0, grid_.n_steps, grid_.stride(), grid_.dt(), out);
    }

    const RealGenerator& g_;
    const RMatrix& r0_;
    const TimeGrid& grid_;
};

std::vector<double> tree_sum(const std::vector<BlockSums>& blocks, std::size_t lo, std::size_t hi,
                             std::vector<double> BlockSums::*field) {
    if (hi - lo == 1) return blocks[lo].*field;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> a = tree_sum(blocks, lo, mid, field);
    const std::vector<double> b = tree_sum(blocks, mid, hi, field);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

std::uint64_t run_fingerprint(const RealGenerator& g, const RMatrix& r0, const TimeGrid& grid,
                              const BathSpec& bath) {
    Fnv1a h;
    h.add(g.g0.data(), sizeof(double) * g.g0.size());
    h.add(g.gq.data(), sizeof(double) * g.gq.size());
    h.add(r0.data(), sizeof(double) * r0.size());
    h.add_value(grid.t_max);
    h.add_value(grid.n_steps);
    h.add_value(grid.n_out);
    h.add_value(bath.eta());
    h.add_value(bath.beta());
    h.add_value(bath.omega_c());
    return h.value();
}

RMatrix coordinates_of(const std::vector<DensityMatrix>& states, int dim, int k) {
    const CMatrix u = pauli_basis_matrix(dim);
    const int d = dim * dim;
    RMatrix r = RMatrix::Zero(d, k);
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (states[s].rows() != dim || states[s].cols() != dim)
            throw InvalidArgument("run_ensemble: initial state has the wrong dimension");
        if (!is_hermitian(states[s], 1e-10))
            throw InvalidArgument("run_ensemble: initial state must be Hermitian");
        const CVector c = u.adjoint() * vectorize(states[s]);
        r.col(static_cast<Eigen::Index>(s)) = c.real();
    }
    return r;
}

} // namespace

RMatrix EnsembleResult::mean_coordinates(std::size_t k, std::ptrdiff_t exclude_block) const {
    const int d = dim * dim;
    const int kk = static_cast<int>(total_sum.size() / (n_out_points() * d));
    RMatrix out(d, n_states);
    double count = static_cast<double>(n_traj);
    const BlockSums* ex = nullptr;
    if (exclude_block >= 0) {
        ex = &blocks.at(static_cast<std::size_t>(exclude_block));
        count -= static_cast<double>(ex->count);
        if (!(count > 0.0)) throw InvalidArgument("mean_coordinates: no trajectories left");
    }
    const std::size_t base = k * static_cast<std::size_t>(d) * kk;
    for (int mu = 0; mu < d; ++mu) {
        for (int s = 0; s < n_states; ++s) {
            const std::size_t i = base + static_cast<std::size_t>(mu) * kk + s;
            double v = total_sum[i];
            if (ex) v -= ex->sum[i];
            out(mu, s) = v / count;
        }
    }
    return out;
}

std::vector<double> EnsembleResult::expectation(const Operator& op, int state) const {
    std::vector<double> out;
    out.reserve(mean.at(state).size());
    for (const DensityMatrix& rho : mean[state]) out.push_back((op * rho).trace().real());
    return out;
}

std::vector<double> EnsembleResult::expectation_error(const Operator& op, int state) const {
    const std::vector<Operator> basis = pauli_basis(dim);
    RVector c(dim * dim);
    for (int mu = 0; mu < dim * dim; ++mu) c(mu) = (op * basis[mu]).trace().real();
    std::vector<double> out(n_out_points(), 0.0);
    const std::size_t nb = n_blocks();
    for (std::size_t k = 0; k < n_out_points(); ++k) {
        if (nb < 2) {
            double v = 0.0;
            for (int mu = 0; mu < dim * dim; ++mu) v += c(mu) * c(mu) * std::pow(std_error[state][k](mu), 2);
            out[k] = std::sqrt(v);
            continue;
        }
        // Delete-a-block jackknife of the linear observable.
        std::vector<double> theta(nb);
        double avg = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            theta[b] = c.dot(mean_coordinates(k, static_cast<std::ptrdiff_t>(b)).col(state));
            avg += theta[b];
        }
        avg /= static_cast<double>(nb);
        double ss = 0.0;
        for (double t : theta) ss += (t - avg) * (t - avg);
        out[k] = std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
    }
    return out;
}

EnsembleResult run_ensemble(const SledModel& m, const std::vector<DensityMatrix>& initial,
                            const TimeGrid& grid, const EnsembleOptions& opt) {
    const int n = m.dim();
    if (n != 2 && n != 4) throw InvalidArgument("run_ensemble: dimension must be 2 or 4");
    if (initial.empty() || initial.size() > static_cast<std::size_t>(n * n))
        throw InvalidArgument("run_ensemble: need between 1 and N^2 initial states");
    if (opt.n_traj == 0) throw InvalidArgument("run_ensemble: n_traj must be >= 1");
    grid.validate(m.bath, m.h);

    const RealGenerator gen = real_generator(m);
    const int d = n * n;
    const int k = initial.size() == 1 ? 1 : d;
    const RMatrix r0 = coordinates_of(initial, n, k);
    RunShape shape{d, k, grid.n_out + 1};
    const std::size_t len = shape.block_length();

    const std::size_t max_blocks = opt.max_blocks > 0 ? opt.max_blocks : (d * k >= 256 ? 64 : 256);
    const std::size_t block_size =
        std::max<std::size_t>(8, (opt.n_traj + max_blocks - 1) / max_blocks);
    const std::size_t n_blocks = (opt.n_traj + block_size - 1) / block_size;

    std::vector<BlockSums> blocks(n_blocks);
    const CheckpointHeader header{run_fingerprint(gen, r0, grid, m.bath), opt.seed, opt.n_traj,
                                  block_size, n_blocks, len};
    if (!opt.checkpoint_path.empty()) read_checkpoint(opt.checkpoint_path, header, blocks);

    const NoiseSynthesizer synth(m.bath, grid);
    const TrajectoryRunner runner(gen, r0, grid);
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex mu;
    std::exception_ptr failure;
    std::size_t failure_index = std::numeric_limits<std::size_t>::max();
    auto last_write = std::chrono::steady_clock::now();

    auto worker = [&]() {
        std::vector<double> zeta;
        std::vector<double> traj(len);
        while (!abort.load()) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) break;
            if (blocks[b].done) continue;
            BlockSums acc;
            acc.sum.assign(len, 0.0);
            acc.sumsq.assign(len, 0.0);
            const std::size_t first = b * block_size;
            const std::size_t last = std::min(opt.n_traj, first + block_size);
            try {
                for (std::size_t t = first; t < last && !abort.load(); ++t) {
                    synth.generate(opt.seed, t, zeta);
                    runner.run(zeta.data(), traj.data());
                    for (std::size_t i = 0; i < len; ++i) {
                        if (!std::isfinite(traj[i])) {
                            std::ostringstream os;
                            os << "SLED trajectory " << t << " produced a non-finite value";
                            throw TrajectoryFailure(t, os.str());
                        }
                        acc.sum[i] += traj[i];
                        acc.sumsq[i] += traj[i] * traj[i];
                    }
                    for (int p = 1; p < shape.n_points; ++p)
                        for (int s = 0; s < k; ++s) {
                            const double drift =
                                sqrt_n * std::abs(traj[static_cast<std::size_t>(p) * d * k + s] - traj[s]);
                            acc.trace_drift = std::max(acc.trace_drift, drift);
                        }
                    ++acc.count;
                }
            } catch (const TrajectoryFailure& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (e.trajectory_index < failure_index) {
                    failure_index = e.trajectory_index;
                    failure = std::current_exception();
                }
                abort.store(true);
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                abort.store(true);
                return;
            }
            if (abort.load()) return;
            acc.done = true;
            std::lock_guard<std::mutex> lock(mu);
            blocks[b] = std::move(acc);
            if (!opt.checkpoint_path.empty()) {
                const auto now = std::chrono::steady_clock::now();
                if (std::chrono::duration<double>(now - last_write).count() >= opt.checkpoint_interval) {
                    write_checkpoint(opt.checkpoint_path, header, blocks);
                    last_write = now;
                }
            }
        }
    };

    const int workers = std::max(1, opt.workers > 0 ? opt.workers : default_worker_count());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) {
        if (!opt.checkpoint_path.empty()) write_checkpoint(opt.checkpoint_path, header, blocks);
        std::rethrow_exception(failure);
    }
    if (!opt.checkpoint_path.empty()) write_checkpoint(opt.checkpoint_path, header, blocks);

    EnsembleResult res;
    res.grid = grid;
    res.dim = n;
    res.n_states = static_cast<int>(initial.size());
    res.n_traj = opt.n_traj;
    res.seed = opt.seed;
    res.block_size = block_size;
    for (int p = 0; p < shape.n_points; ++p) res.times.push_back(grid.output_time(p));
    res.total_sum = tree_sum(blocks, 0, n_blocks, &BlockSums::sum);
    const std::vector<double> total_sq = tree_sum(blocks, 0, n_blocks, &BlockSums::sumsq);
    for (const BlockSums& b : blocks) res.max_trace_drift = std::max(res.max_trace_drift, b.trace_drift);

    const CMatrix u = pauli_basis_matrix(n);
    const double nt = static_cast<double>(opt.n_traj);
    res.mean.assign(res.n_states, {});
    res.std_error.assign(res.n_states, {});
    for (int s = 0; s < res.n_states; ++s) {
        res.mean[s].reserve(shape.n_points);
        res.std_error[s].reserve(shape.n_points);
        for (int p = 0; p < shape.n_points; ++p) {
            RVector mean_r(d), se(d);
            for (int mu = 0; mu < d; ++mu) {
                const std::size_t i = (static_cast<std::size_t>(p) * d + mu) * k + s;
                const double mean = res.total_sum[i] / nt;
                mean_r(mu) = mean;
                if (opt.n_traj > 1) {
                    const double var = std::max(0.0, (total_sq[i] - nt * mean * mean) / (nt - 1.0));
                    se(mu) = std::sqrt(var / nt);
                } else {
                    se(mu) = 0.0;
                }
            }
            const CVector v = u * mean_r.cast<cplx>();
            res.mean[s].push_back(devectorize(v));
            res.std_error[s].push_back(se);
        }
    }
    res.blocks = std::move(blocks);
    for (BlockSums& b : res.blocks) {
        b.sumsq.clear();
        b.sumsq.shrink_to_fit();
    }
    return res;
}

EnsembleResult run_ensemble(const SystemSpec& spec, const BathSpec& bath,
                            const DensityMatrix& rho0, const TimeGrid& grid,
                            const EnsembleOptions& opt) {
    return run_ensemble(SledModel::from_spec(spec, bath), {rho0}, grid, opt);
}

namespace {

std::vector<Propagator> propagators_from(const EnsembleResult& e, const CMatrix& u,
                                         const RMatrix& r0_inv, std::ptrdiff_t exclude) {
    std::vector<Propagator> out;
    out.reserve(e.n_out_points());
    for (std::size_t k = 0; k < e.n_out_points(); ++k) {
        const RMatrix t_real = e.mean_coordinates(k, exclude) * r0_inv;
        out.push_back(Propagator{u * t_real.cast<cplx>() * u.adjoint(), e.times[k]});
    }
    return out;
}

RMatrix initial_coordinates(int dim) {
    return coordinates_of(tomography_states(dim), dim, dim * dim);
}

} // namespace

std::vector<Propagator> SledReference::leave_one_out(std::size_t block) const {
    const int n = ensemble.dim;
    const RMatrix r0_inv = initial_coordinates(n).inverse();
    return propagators_from(ensemble, pauli_basis_matrix(n), r0_inv, static_cast<std::ptrdiff_t>(block));
}

SledReference reconstruct_superoperator(const SledModel& m, const TimeGrid& grid,
                                        const EnsembleOptions& opt) {
    const int n = m.dim();
    const RMatrix r0 = initial_coordinates(n);
    Eigen::JacobiSVD<RMatrix> svd(r0);
    const double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    if (!(cond <= 1e6)) {
        std::ostringstream os;
        os << "reconstruct_superoperator: initial-state matrix condition " << cond << " exceeds 1e6";
        throw NumericalError(os.str());
    }
    SledReference ref;
    ref.condition_number = cond;
    ref.ensemble = run_ensemble(m, tomography_states(n), grid, opt);
    ref.propagators = propagators_from(ref.ensemble, pauli_basis_matrix(n), r0.inverse(), -1);
    return ref;
}

SledReference reconstruct_superoperator(const SystemSpec& spec, const BathSpec& bath,
                                        const TimeGrid& grid, const EnsembleOptions& opt) {
    return reconstruct_superoperator(SledModel::from_spec(spec, bath), grid, opt);
}

} // namespace sledbench
