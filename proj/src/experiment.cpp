#include "sledbench/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sledbench/errors.hpp"
#include "sledbench/sled.hpp"
#include "sledbench/version.hpp"

namespace sledbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string num(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_atomically(const fs::path& path, const std::string& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError("cannot write " + tmp.string());
        out << body;
        if (!out) throw NumericalError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

json grid_json(const TimeGrid& g) {
    return {{"t_max", g.t_max}, {"n_steps", g.n_steps}, {"n_out", g.n_out}, {"dt", g.dt()}};
}

TimeGrid cell_grid(const ExperimentConfig& c, const SweepCell& cell) {
    const SystemSpec spec = cell_system(c, cell);
    const BathSpec bath = cell_bath(c, cell);
    const double dt = std::min(c.dt_max, TimeGrid::max_step(bath, build_hamiltonian(spec)));
    return TimeGrid::with_max_step(cell_t_max(c, cell), dt, c.points);
}

std::vector<double> grid_times(const TimeGrid& g) {
    std::vector<double> t(g.n_out + 1);
    for (int k = 0; k <= g.n_out; ++k) t[k] = g.output_time(k);
    return t;
}

FitResult fit_cell(const ExperimentConfig& c, const SweepCell& cell, LiouvillianKind kind,
                   const std::vector<Propagator>& reference) {
    FitContext ctx;
    ctx.omega_c = c.omega_c;
    ctx.omega_ref = c.omega_ref();
    FitOptions opt;
    opt.powell = c.powell;
    opt.shift_rates_with_frequency = c.shift_rates;
    opt.starts = c.starts;
    const double beta = cell.beta / c.omega_ref();
    if (c.system == SystemKind::SingleQubit)
        return fit_single_qubit(reference, SingleQubitParams{cell.kappa, beta, c.omega_q}, kind, ctx, opt);
    const TwoQubit spec{c.omega_1, c.omega_2, cell.g};
    return fit_two_qubit(reference, TwoQubitParams{cell.kappa, beta, 1.0, 0.0, 0.0}, spec, kind, ctx, opt);
}

std::string curve_path(const ExperimentConfig& c, const std::string& id, LiouvillianKind k) {
    return (fs::path(c.output_dir) / ("cell_" + id + "_" + to_string(k) + ".csv")).string();
}

fs::path cell_path(const ExperimentConfig& c, const SweepCell& cell) {
    return fs::path(c.output_dir) / ("cell_" + cell.id + ".json");
}

// A reusable cell file: parses, same config hash, status ok.
bool reusable(const ExperimentConfig& c, const SweepCell& cell) {
    std::ifstream in(cell_path(c, cell));
    if (!in) return false;
    try {
        const json j = json::parse(in);
        return j.at("provenance").at("config_hash") == hex64(c.hash) && j.at("status") == "ok";
    } catch (const std::exception&) {
        return false;
    }
}

void check_manifest(const ExperimentConfig& c, const std::vector<SweepCell>& cells) {
    const fs::path path = fs::path(c.output_dir) / "manifest.json";
    if (fs::exists(path)) {
        std::ifstream in(path);
        json m;
        try {
            m = json::parse(in);
        } catch (const std::exception& e) {
            throw InvalidArgument("corrupt manifest " + path.string() + ": " + e.what());
        }
        if (m.value("config_hash", "") != hex64(c.hash))
            throw InvalidArgument("output directory " + c.output_dir +
                                  " holds results of a different configuration (hash " +
                                  m.value("config_hash", "?") + ")");
        return;
    }
    json m;
    m["name"] = c.name;
    m["config_hash"] = hex64(c.hash);
    m["config"] = c.canonical;
    m["version"] = version_string();
    m["system"] = c.system == SystemKind::SingleQubit ? "single" : "two";
    json list = json::array();
    for (const auto& cell : cells)
        list.push_back({{"id", cell.id}, {"kappa", cell.kappa}, {"beta", cell.beta}, {"g", cell.g}});
    m["cells"] = list;
    write_atomically(path, m.dump(2) + "\n");
}

} // namespace

CellOutcome run_cell(const ExperimentConfig& c, const SweepCell& cell, int sled_workers,
                     const std::string& checkpoint_path) {
    const auto t0 = std::chrono::steady_clock::now();
    CellOutcome out;
    out.cell = cell;
    try {
        const SystemSpec spec = cell_system(c, cell);
        const BathSpec bath = cell_bath(c, cell);
        out.relaxation_rate = cell_relaxation_rate(c, cell);
        out.grid = cell_grid(c, cell);
        const std::vector<double> times = grid_times(out.grid);

        std::optional<SledReference> ref;
        if (c.sled) {
            EnsembleOptions opt;
            opt.n_traj = c.n_traj;
            opt.seed = cell_seed(c, cell);
            opt.workers = sled_workers;
            opt.checkpoint_path = checkpoint_path;
            opt.checkpoint_interval = c.checkpoint_interval;
            ref = reconstruct_superoperator(spec, bath, out.grid, opt);
            out.has_sled = true;
            out.n_traj = ref->ensemble.n_traj;
            out.seed = opt.seed;
            out.block_size = ref->ensemble.block_size;
            out.max_trace_drift = ref->ensemble.max_trace_drift;
            out.condition_number = ref->condition_number;
        }

        for (LiouvillianKind kind : c.solvers) {
            SolverOutcome s;
            s.kind = kind;
            const Liouvillian l = build_liouvillian(kind, spec, bath);
            try {
                s.steady_state_time = steady_state_time(l);
            } catch (const NumericalError&) {
                s.steady_state_time = std::numeric_limits<double>::infinity();
            }
            s.converged = s.steady_state_time <= out.grid.t_max;
            if (ref) {
                const auto props = model_propagators(l, times);
                DistanceEstimate e = max_distance_with_error(props, *ref);
                s.has_distance = true;
                s.delta_max = e.curve.delta_max;
                s.delta_max_se = e.std_error;
                s.argmax_time = e.curve.argmax_time;
                s.curve = std::move(e.curve);
                s.curve.metadata["solver"] = to_string(kind);
                s.curve.metadata["cell"] = cell.id;
                if (c.optimize) s.fit = fit_cell(c, cell, kind, ref->propagators);
            }
            out.solvers.push_back(std::move(s));
        }
    } catch (const std::exception& e) {
        out.status = "failed";
        out.error = e.what();
    }
    out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string cell_to_json(const ExperimentConfig& c, const CellOutcome& out) {
    json j;
    j["cell"] = out.cell.id;
    j["index"] = out.cell.index;
    j["params"] = {{"kappa", out.cell.kappa}, {"beta", out.cell.beta}, {"g", out.cell.g}};
    j["status"] = out.status;
    if (!out.error.empty()) j["error"] = out.error;
    j["grid"] = grid_json(out.grid);
    j["relaxation_rate"] = out.relaxation_rate;
    if (out.has_sled) {
        j["sled"] = {{"n_traj", out.n_traj},
                     {"seed", out.seed},
                     {"block_size", out.block_size},
                     {"max_trace_drift", out.max_trace_drift},
                     {"condition_number", out.condition_number}};
    }
    json solvers = json::object();
    for (const auto& s : out.solvers) {
        json r;
        if (std::isfinite(s.steady_state_time)) r["steady_state_time"] = s.steady_state_time;
        else r["steady_state_time"] = nullptr;
        r["converged"] = s.converged;
        if (s.has_distance) {
            r["delta_max"] = s.delta_max;
            r["delta_max_se"] = s.delta_max_se;
            r["argmax_time"] = s.argmax_time;
        }
        if (s.fit) r["fit"] = json::parse(s.fit->to_json());
        solvers[to_string(s.kind)] = r;
    }
    j["solvers"] = solvers;
    j["elapsed_seconds"] = out.elapsed_seconds;
    j["provenance"] = {{"seed", c.seed}, {"version", version_string()}, {"config_hash", hex64(c.hash)}};
    return j.dump(2) + "\n";
}

void write_sweep_tables(const ExperimentConfig& c) {
    const auto cells = sweep_cells(c);
    std::ostringstream csv;
    csv << "cell,kappa,beta,g,solver,delta_max,delta_max_se,argmax_t,steady_state_time,converged,"
           "delta_max_opt,status\n";
    json all = json::array();
    for (const auto& cell : cells) {
        std::ifstream in(cell_path(c, cell));
        if (!in) continue;
        json j;
        try {
            j = json::parse(in);
        } catch (const std::exception&) {
            continue;
        }
        all.push_back(j);
        const std::string status = j.value("status", "failed");
        const std::string head = cell.id + "," + num(cell.kappa) + "," + num(cell.beta) + "," + num(cell.g) + ",";
        if (status != "ok" || j["solvers"].empty()) {
            csv << head << ",,,,,,," << status << "\n";
            continue;
        }
        for (LiouvillianKind kind : c.solvers) {
            const json& s = j["solvers"][to_string(kind)];
            csv << head << to_string(kind) << ",";
            if (s.contains("delta_max")) {
                csv << num(s["delta_max"].get<double>()) << "," << num(s["delta_max_se"].get<double>()) << ","
                    << num(s["argmax_time"].get<double>());
            } else {
                csv << ",,";
            }
            csv << ",";
            if (!s["steady_state_time"].is_null()) csv << num(s["steady_state_time"].get<double>());
            else csv << "inf";
            csv << "," << (s["converged"].get<bool>() ? "yes" : "not converged") << ",";
            if (s.contains("fit")) csv << num(s["fit"]["delta_max_opt"].get<double>());
            csv << "," << status << "\n";
        }
    }
    if (c.write_csv) write_atomically(fs::path(c.output_dir) / "sweep.csv", csv.str());
    if (c.write_json) write_atomically(fs::path(c.output_dir) / "sweep.json", all.dump(2) + "\n");
}

RunSummary run_experiment(const ExperimentConfig& c, std::ostream* log) {
    fs::create_directories(c.output_dir);
    const auto cells = sweep_cells(c);
    check_manifest(c, cells);

    RunSummary summary;
    summary.cells = cells.size();
    std::vector<const SweepCell*> todo;
    for (const auto& cell : cells) {
        if (reusable(c, cell)) ++summary.reused;
        else todo.push_back(&cell);
    }

    const int cell_workers = std::max(1, std::min<int>(c.cell_workers, static_cast<int>(todo.size())));
    int sled_workers = c.workers;
    if (sled_workers == 0) sled_workers = std::max(1, default_worker_count() / cell_workers);

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const SweepCell& cell = *todo[i];
            const std::string ckpt = (fs::path(c.output_dir) / ("cell_" + cell.id + ".ckpt")).string();
            CellOutcome out = run_cell(c, cell, sled_workers, c.sled ? ckpt : "");
            if (c.write_csv && out.status == "ok") {
                for (const auto& s : out.solvers) {
                    if (!s.has_distance) continue;
                    std::ostringstream os;
                    s.curve.write_csv(os);
                    write_atomically(curve_path(c, cell.id, s.kind), os.str());
                }
            }
            write_atomically(cell_path(c, cell), cell_to_json(c, out));
            if (out.status == "ok") fs::remove(ckpt);
            std::lock_guard<std::mutex> lock(mu);
            ++summary.computed;
            if (out.status != "ok") ++summary.failed;
            if (log) {
                *log << "cell " << cell.id << " kappa=" << num(cell.kappa) << " beta=" << num(cell.beta);
                if (c.system == SystemKind::TwoQubit) *log << " g=" << num(cell.g);
                if (out.status != "ok") {
                    *log << " FAILED: " << out.error << "\n";
                    continue;
                }
                for (const auto& s : out.solvers) {
                    *log << " " << to_string(s.kind);
                    if (s.has_distance) *log << "=" << num(s.delta_max);
                    if (!s.converged) *log << "(not converged)";
                }
                *log << " [" << num(out.elapsed_seconds) << " s]\n";
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < cell_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    write_sweep_tables(c);
    return summary;
}

} // namespace sledbench
