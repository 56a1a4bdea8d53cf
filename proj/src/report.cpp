#include "sledbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sledbench/errors.hpp"

namespace sledbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct CellRow {
    std::string id;
    double kappa{0.0};
    double beta{0.0};
    double g{0.0};
    json body;
};

} // namespace

std::optional<double> threshold_crossing(const std::vector<double>& x, const std::vector<double>& y,
                                         double threshold) {
    if (x.size() != y.size()) throw InvalidArgument("threshold_crossing: size mismatch");
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = y[i] - threshold, b = y[i + 1] - threshold;
        if (a == 0.0) return x[i];
        if ((a < 0.0) != (b < 0.0) || b == 0.0) {
            if (!(x[i] > 0.0) || !(x[i + 1] > 0.0)) throw InvalidArgument("threshold_crossing: x must be > 0");
            const double s = a / (a - b);
            return std::exp(std::log(x[i]) + s * (std::log(x[i + 1]) - std::log(x[i])));
        }
    }
    return std::nullopt;
}

SweepReport summarize_sweep(const std::string& dir) {
    SweepReport rep;
    std::vector<CellRow> expected;
    const fs::path manifest = fs::path(dir) / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        json m;
        try {
            m = json::parse(in);
        } catch (const std::exception& e) {
            throw InvalidArgument("corrupt manifest " + manifest.string() + ": " + e.what());
        }
        for (const auto& c : m.at("cells"))
            expected.push_back({c.at("id"), c.at("kappa"), c.at("beta"), c.at("g"), {}});
    } else if (fs::is_directory(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            if (name.rfind("cell_", 0) != 0 || e.path().extension() != ".json") continue;
            expected.push_back({name.substr(5, name.size() - 10), 0.0, 0.0, 0.0, {}});
        }
        std::sort(expected.begin(), expected.end(), [](const CellRow& a, const CellRow& b) { return a.id < b.id; });
    }
    if (expected.empty()) throw InvalidArgument("no sweep cells found in " + dir + " (0 cells)");
    rep.expected = expected.size();

    std::vector<CellRow> rows;
    for (auto& cell : expected) {
        const fs::path p = fs::path(dir) / ("cell_" + cell.id + ".json");
        std::ifstream in(p);
        if (!in) {
            rep.missing.push_back(p.filename().string());
            continue;
        }
        try {
            cell.body = json::parse(in);
            const auto& params = cell.body.at("params");
            cell.kappa = params.at("kappa");
            cell.beta = params.at("beta");
            cell.g = params.at("g");
            cell.body.at("solvers");
        } catch (const std::exception&) {
            rep.corrupt.push_back(p.filename().string());
            continue;
        }
        if (cell.body.value("status", "") != "ok") {
            ++rep.failed;
            continue;
        }
        ++rep.ok;
        rows.push_back(cell);
    }

    // (solver, metric) -> (beta, g) -> [(kappa, value)]
    std::map<std::pair<std::string, std::string>, std::map<std::pair<double, double>, std::vector<std::pair<double, double>>>> lines;
    std::map<std::pair<std::string, std::string>, SolverStats> stats;
    for (const auto& r : rows) {
        for (const auto& [solver, s] : r.body["solvers"].items()) {
            for (const char* metric : {"delta_max", "delta_max_opt"}) {
                double v = 0.0;
                if (std::string(metric) == "delta_max") {
                    if (!s.contains("delta_max")) continue;
                    v = s["delta_max"];
                } else {
                    if (!s.contains("fit")) continue;
                    v = s["fit"]["delta_max_opt"];
                }
                auto& st = stats[{solver, metric}];
                if (st.cells == 0) {
                    st.solver = solver;
                    st.metric = metric;
                    st.min = st.max = v;
                }
                ++st.cells;
                st.min = std::min(st.min, v);
                st.max = std::max(st.max, v);
                if (v < kValidityThreshold) ++st.valid;
                if (!s.value("converged", true)) ++st.not_converged;
                lines[{solver, metric}][{r.beta, r.g}].emplace_back(r.kappa, v);
            }
        }
    }
    for (auto& [key, st] : stats) rep.stats.push_back(st);
    for (auto& [key, by_line] : lines) {
        for (auto& [bg, pts] : by_line) {
            std::sort(pts.begin(), pts.end());
            std::vector<double> x, y;
            for (const auto& [k, v] : pts) {
                x.push_back(k);
                y.push_back(v);
            }
            rep.contours.push_back({key.first, key.second, bg.first, bg.second, threshold_crossing(x, y)});
        }
    }

    std::ostringstream t;
    t << "cells: " << rep.expected << " expected, " << rep.ok << " ok, " << rep.failed << " failed, "
      << rep.missing.size() << " missing, " << rep.corrupt.size() << " corrupt\n";
    for (const auto& f : rep.missing) t << "  missing: " << f << "\n";
    for (const auto& f : rep.corrupt) t << "  corrupt: " << f << "\n";
    for (const auto& st : rep.stats) {
        t << st.solver << " " << st.metric << ": " << st.valid << "/" << st.cells << " cells below "
          << num(kValidityThreshold) << ", range [" << num(st.min) << ", " << num(st.max) << "]";
        if (st.not_converged) t << ", " << st.not_converged << " not converged";
        t << "\n";
    }
    for (const auto& c : rep.contours) {
        t << "  " << c.solver << " " << c.metric << " beta=" << num(c.beta);
        if (c.g != 0.0) t << " g=" << num(c.g);
        if (c.kappa_crossing) t << ": crosses " << num(kValidityThreshold) << " at kappa=" << num(*c.kappa_crossing);
        else t << ": no crossing on this line";
        t << "\n";
    }
    rep.text = t.str();
    return rep;
}

SweepReport write_report(const std::string& dir) {
    SweepReport rep = summarize_sweep(dir);
    std::ofstream csv(fs::path(dir) / "contours.csv");
    csv << "solver,metric,beta,g,kappa_crossing\n";
    for (const auto& c : rep.contours) {
        csv << c.solver << "," << c.metric << "," << num(c.beta) << "," << num(c.g) << ",";
        if (c.kappa_crossing) csv << num(*c.kappa_crossing);
        csv << "\n";
    }
    std::ofstream(fs::path(dir) / "summary.txt") << rep.text;
    return rep;
}

} // namespace sledbench
