#include "sledbench/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "sledbench/errors.hpp"
#include "sledbench/metrics.hpp"

namespace sledbench {

namespace {

// Value of Delta_max returned for parameter points where the model cannot be built.
constexpr double kPenalty = 1.0;

nlohmann::json params_json(const FitParams& p) {
    nlohmann::json j;
    if (const auto* s = std::get_if<SingleQubitParams>(&p)) {
        j = {{"kappa", s->kappa}, {"beta", s->beta}, {"omega_q", s->omega_q}};
    } else {
        const auto& t = std::get<TwoQubitParams>(p);
        j = {{"kappa", t.kappa}, {"beta", t.beta}, {"a1", t.a1}, {"a2", t.a2}, {"a3", t.a3}};
    }
    return j;
}

double uniform_step(const std::vector<double>& times) {
    if (times.size() < 2) throw InvalidArgument("model_propagators: need at least two times");
    if (times.front() != 0.0) throw InvalidArgument("model_propagators: grid must start at 0");
    const double dt = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - k * dt) > 1e-9 * std::max(1.0, times[k]))
            throw InvalidArgument("model_propagators: grid is not uniform");
    return dt;
}

std::vector<double> times_of(const std::vector<Propagator>& ref) {
    std::vector<double> t;
    t.reserve(ref.size());
    for (const Propagator& p : ref) t.push_back(p.t);
    return t;
}

Operator polynomial(const Operator& h, double a1, double a2, double a3) {
    const Operator h2 = h * h;
    return a1 * h + a2 * h2 + a3 * (h2 * h);
}

double safe_objective(const std::vector<Propagator>& reference, const std::vector<double>& times,
                      const std::function<Liouvillian()>& build) {
    try {
        const Liouvillian l = build();
        return max_distance(model_propagators(l, times), reference).delta_max;
    } catch (const DegenerateSpectrum&) {
        return kPenalty;
    } catch (const NumericalError&) {
        return kPenalty;
    } catch (const InvalidArgument&) {
        return kPenalty;
    }
}

} // namespace

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["params"] = params_json(params);
    j["start"] = params_json(start);
    j["delta_max_start"] = delta_max_start;
    j["delta_max_opt"] = delta_max_opt;
    j["iterations"] = iterations;
    j["evaluations"] = evaluations;
    j["converged"] = converged;
    nlohmann::json all = nlohmann::json::array();
    for (const StartOutcome& s : starts) {
        all.push_back({{"start", params_json(s.start)},
                       {"optimum", params_json(s.optimum)},
                       {"delta_max_start", s.delta_max_start},
                       {"delta_max_opt", s.delta_max_opt},
                       {"converged", s.converged}});
    }
    j["starts"] = all;
    return j.dump(2);
}

std::vector<Propagator> model_propagators(const Liouvillian& l, const std::vector<double>& times) {
    const double dt = uniform_step(times);
    std::vector<Propagator> out = propagator_series(l, dt, static_cast<int>(times.size()) - 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].t = times[k];
    return out;
}

Liouvillian single_qubit_model(const SingleQubitParams& p, LiouvillianKind kind,
                               const FitContext& ctx, bool shift_rates_with_frequency) {
    const BathSpec bath = BathSpec::from_kappa(p.kappa, p.beta, ctx.omega_c, ctx.omega_ref);
    const Operator h = build_hamiltonian(SingleQubit{p.omega_q});
    const Operator h_rates = shift_rates_with_frequency ? h : build_hamiltonian(SingleQubit{ctx.omega_ref});
    const BornMarkovInputs in{h, h_rates, coupling_operator(SingleQubit{p.omega_q}), bath, ctx.omega_ref};
    return build_liouvillian(kind, in);
}

Liouvillian two_qubit_model(const TwoQubitParams& p, const TwoQubit& spec, LiouvillianKind kind,
                            const FitContext& ctx) {
    const BathSpec bath = BathSpec::from_kappa(p.kappa, p.beta, ctx.omega_c, ctx.omega_ref);
    const Operator h = build_hamiltonian(spec);
    const Operator hp = polynomial(h, p.a1, p.a2, p.a3);
    const BornMarkovInputs in{hp, hp, coupling_operator(spec), bath, spec.omega_1};
    return build_liouvillian(kind, in);
}

FitResult fit_single_qubit(const std::vector<Propagator>& reference, const SingleQubitParams& start,
                           LiouvillianKind kind, const FitContext& ctx, const FitOptions& opt) {
    if (!(start.kappa > 0.0) || !(start.beta > 0.0) || !(start.omega_q > 0.0))
        throw InvalidArgument("fit_single_qubit: start parameters must be positive");
    const std::vector<double> times = times_of(reference);
    auto unpack = [](const std::vector<double>& x) {
        return SingleQubitParams{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
    };
    auto objective = [&](const std::vector<double>& x) {
        const SingleQubitParams p = unpack(x);
        return safe_objective(reference, times, [&] {
            return single_qubit_model(p, kind, ctx, opt.shift_rates_with_frequency);
        });
    };
    const std::vector<double> x0 = {std::log(start.kappa), std::log(start.beta), std::log(start.omega_q)};
    const PowellResult r = powell_minimize(objective, x0, opt.powell);

    FitResult out;
    out.params = unpack(r.x);
    out.start = start;
    out.delta_max_start = r.f0;
    out.delta_max_opt = r.f;
    out.iterations = r.iterations;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
    out.starts.push_back({out.start, out.params, r.f0, r.f, r.converged});
    return out;
}

FitResult fit_two_qubit(const std::vector<Propagator>& reference, const TwoQubitParams& start,
                        const TwoQubit& spec, LiouvillianKind kind, const FitContext& ctx,
                        const FitOptions& opt) {
    if (!(start.kappa > 0.0) || !(start.beta > 0.0))
        throw InvalidArgument("fit_two_qubit: kappa and beta must be positive");
    const std::vector<double> times = times_of(reference);
    auto unpack = [](const std::vector<double>& x) {
        return TwoQubitParams{std::exp(x[0]), std::exp(x[1]), x[2], x[3], x[4]};
    };
    auto objective = [&](const std::vector<double>& x) {
        const TwoQubitParams p = unpack(x);
        return safe_objective(reference, times, [&] { return two_qubit_model(p, spec, kind, ctx); });
    };

    // Bare point plus every sign pattern of +-10% on (kappa, beta, a1).
    std::vector<TwoQubitParams> starts = {start};
    for (int mask = 0; mask < 8; ++mask) {
        TwoQubitParams p = start;
        p.kappa *= (mask & 1) ? 1.1 : 0.9;
        p.beta *= (mask & 2) ? 1.1 : 0.9;
        p.a1 *= (mask & 4) ? 1.1 : 0.9;
        starts.push_back(p);
    }
    const int n_starts = std::clamp(opt.starts, 1, 9);
    starts.resize(static_cast<std::size_t>(n_starts));

    FitResult out;
    out.start = start;
    bool first = true;
    for (const TwoQubitParams& s : starts) {
        const std::vector<double> x0 = {std::log(s.kappa), std::log(s.beta), s.a1, s.a2, s.a3};
        const PowellResult r = powell_minimize(objective, x0, opt.powell);
        const TwoQubitParams best = unpack(r.x);
        out.starts.push_back({s, best, r.f0, r.f, r.converged});
        out.iterations += r.iterations;
        out.evaluations += r.evaluations;
        if (first) out.delta_max_start = r.f0;
        if (first || r.f < out.delta_max_opt) {
            out.params = best;
            out.delta_max_opt = r.f;
            out.converged = r.converged;
        }
        first = false;
    }
    return out;
}

std::vector<double> transition_shifts(const TwoQubitParams& p, const EigenSystem& eig) {
    std::vector<double> out;
    const auto& e = eig.energies;
    for (Eigen::Index j = 0; j + 1 < e.size(); ++j) {
        const double e0 = e(j), e1 = e(j + 1);
        const double de = e1 - e0;
        out.push_back(p.a1 * de + p.a2 * (e1 * e1 - e0 * e0) + p.a3 * (e1 * e1 * e1 - e0 * e0 * e0) - de);
    }
    return out;
}

} // namespace sledbench
