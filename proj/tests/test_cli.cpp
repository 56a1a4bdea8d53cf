#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sledbench/config.hpp"
#include "sledbench/experiment.hpp"
#include "sledbench/report.hpp"

using namespace sledbench;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(; smoke
[meta]
version = 1
name = smoke

[system]
type = single
omega_q = 1

[sweep]
kappa = 0.05
beta = 1

[solvers]
use = redfield, lindblad_global, sled

[grid]
window = 2
points = 40

[sled]
trajectories = 16
seed = 3
workers = 1

[output]
directory = PLACEHOLDER
)";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sledbench_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string with_dir(std::string text, const fs::path& dir) {
    text.replace(text.find("PLACEHOLDER"), 11, dir.string());
    return text;
}

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

} // namespace

TEST_CASE("defaults of a bare config") {
    const ExperimentConfig c = parse_config("[meta]\nversion = 1\n");
    CHECK(c.system == SystemKind::SingleQubit);
    CHECK(c.omega_q == 1.0);
    CHECK(c.omega_c == 50.0);
    CHECK(c.kappa == std::vector<double>{0.05});
    CHECK(c.g == std::vector<double>{0.0});
    CHECK(c.sled);
    CHECK(c.solvers.size() == 2);
    CHECK(c.window == 10.0);
    CHECK(c.n_traj == 1000);
    CHECK_FALSE(c.optimize);
    CHECK(c.write_csv);
    CHECK(c.write_json);
}

TEST_CASE("config errors carry the offending line") {
    CHECK(error_line("[meta]\nversion = 1\n[grid]\npoints = 10\nwindwo = 3\n") == 5);
    CHECK(error_line("[meta]\nversion = 1\n\n[sweep]\nkappa = 0.1, abc\n") == 5);
    CHECK(error_line("[meta]\nversion = 1\n[sled]\ntrajectories = 1\n") == 4);
    CHECK(error_line("[meta]\nversion = 1\n[system]\ntype = single\nomega_1 = 2\n") > 0);

    try {
        parse_config("[system]\ntype = single\n", "x.ini");
        FAIL("missing version accepted");
    } catch (const ConfigError& e) {
        CHECK(e.field == "meta.version");
        CHECK(std::string(e.what()).find("x.ini") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[meta]\nversion = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[meta]\nversion = 1\n[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[meta]\nversion = 1\n[solvers]\nuse = lindblad_local\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[meta]\nversion = 1\n[sweep]\ng = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[meta]\nversion = 1\n[solvers]\nuse = redfield\n[optimize]\nenabled = true\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/sledbench.ini"), ConfigError);
}

TEST_CASE("value lists and logspace") {
    const auto v = logspace(0.01, 1.0, 3);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == doctest::Approx(0.01));
    CHECK(v[1] == doctest::Approx(0.1));
    CHECK(v[2] == 1.0);
    CHECK(logspace(0.3, 5.0, 1) == std::vector<double>{0.3});
    CHECK(parse_value_list("0.1, 0.2 ,0.4") == std::vector<double>{0.1, 0.2, 0.4});
    CHECK(parse_value_list("logspace 1e-3 1 4").size() == 4);
    CHECK_THROWS(parse_value_list("logspace 1 2"));
    CHECK_THROWS(logspace(-1.0, 1.0, 3));
}

TEST_CASE("cell order, ids and seeds") {
    const ExperimentConfig c = parse_config(
        "[meta]\nversion = 1\n[system]\ntype = two\n[sweep]\nkappa = 0.1, 0.2\nbeta = 1, 10\ng = 0.05\n");
    const auto cells = sweep_cells(c);
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].id == "b00_g00_k00");
    CHECK(cells[1].id == "b00_g00_k01");
    CHECK(cells[2].id == "b01_g00_k00");
    CHECK(cells[1].kappa == 0.2);
    CHECK(cells[2].beta == 10.0);
    CHECK(cells[3].g == 0.05);
    CHECK(cell_seed(c, cells[0]) != cell_seed(c, cells[1]));
    CHECK(cell_seed(c, cells[2]) == cell_seed(c, sweep_cells(c)[2]));

    const ExperimentConfig s = parse_config("[meta]\nversion = 1\n[sweep]\nkappa = 0.1\n");
    CHECK(sweep_cells(s)[0].id == "b00_k00");
}

TEST_CASE("config hash tracks numerical settings only") {
    const std::string base = "[meta]\nversion = 1\n[sweep]\nkappa = 0.1\n[output]\ndirectory = a\n";
    const ExperimentConfig a = parse_config(base);
    CHECK(a.hash == parse_config(base).hash);
    CHECK(a.hash == parse_config("; comment\n" + base + "[sled]\nworkers = 4\n").hash);
    CHECK(a.hash == parse_config("[meta]\nversion = 1\nname = other\n[sweep]\nkappa = 0.1\n[output]\ndirectory = b\n").hash);
    CHECK(a.hash != parse_config("[meta]\nversion = 1\n[sweep]\nkappa = 0.11\n").hash);
    CHECK(a.hash != parse_config(base + "[sled]\nseed = 2\n").hash);
}

TEST_CASE("run writes the documented files and is reproducible") {
    const fs::path d1 = scratch("run1"), d2 = scratch("run2");
    ExperimentConfig c = parse_config(with_dir(kMinimal, d1));
    const RunSummary s = run_experiment(c);
    CHECK(s.cells == 1);
    CHECK(s.computed == 1);
    CHECK(s.failed == 0);
    for (const char* f : {"manifest.json", "cell_b00_k00.json", "cell_b00_k00_redfield.csv",
                          "cell_b00_k00_lindblad_global.csv", "sweep.csv", "sweep.json"})
        CHECK_MESSAGE(fs::exists(d1 / f), f);
    CHECK_FALSE(fs::exists(d1 / "cell_b00_k00.ckpt"));

    const std::string csv = slurp(d1 / "sweep.csv");
    CHECK(csv.rfind("cell,kappa,beta,g,solver,delta_max,delta_max_se,argmax_t,steady_state_time,converged,"
                    "delta_max_opt,status\n", 0) == 0);

    c.output_dir = d2.string();
    run_experiment(c);
    CHECK(slurp(d2 / "sweep.csv") == csv);

    // Two workers must not change the numbers.
    const fs::path d3 = scratch("run3");
    ExperimentConfig w = parse_config(with_dir(kMinimal, d3));
    w.workers = 2;
    run_experiment(w);
    CHECK(slurp(d3 / "sweep.csv") == csv);

    const auto j = nlohmann::json::parse(slurp(d1 / "cell_b00_k00.json"));
    CHECK(j["status"] == "ok");
    CHECK(j["sled"]["n_traj"] == 16);
    CHECK(j["solvers"]["redfield"]["delta_max"].get<double>() >= 0.0);
    CHECK(j["provenance"].contains("config_hash"));
    for (const auto& p : {d1, d2, d3}) fs::remove_all(p);
}

TEST_CASE("resume reuses finished cells and refuses a foreign directory") {
    const fs::path d = scratch("resume");
    std::string text = with_dir(kMinimal, d);
    text.replace(text.find("kappa = 0.05"), 12, "kappa = 0.05, 0.1");
    const ExperimentConfig c = parse_config(text);
    CHECK(run_experiment(c).computed == 2);

    const std::string kept = slurp(d / "cell_b00_k00.json");
    fs::remove(d / "cell_b00_k01.json");
    const RunSummary again = run_experiment(c);
    CHECK(again.reused == 1);
    CHECK(again.computed == 1);
    CHECK(slurp(d / "cell_b00_k00.json") == kept);

    const RunSummary third = run_experiment(c);
    CHECK(third.reused == 2);
    CHECK(third.computed == 0);

    ExperimentConfig other = c;
    other.hash ^= 1;
    CHECK_THROWS_AS(run_experiment(other), InvalidArgument);
    fs::remove_all(d);
}

TEST_CASE("short windows are marked not converged") {
    const fs::path d = scratch("window");
    std::string text = with_dir(kMinimal, d);
    text.replace(text.find("window = 2"), 10, "t_max = 5");
    const ExperimentConfig c = parse_config(text);
    run_experiment(c);
    const std::string csv = slurp(d / "sweep.csv");
    CHECK(csv.find("not converged") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(d / "cell_b00_k00.json"));
    CHECK_FALSE(j["solvers"]["lindblad_global"]["converged"].get<bool>());
    CHECK(j["solvers"]["lindblad_global"]["steady_state_time"].get<double>() > 5.0);
    fs::remove_all(d);
}

TEST_CASE("a failing cell does not stop the sweep") {
    const fs::path d = scratch("failed");
    const std::string text = "[meta]\nversion = 1\n[system]\ntype = two\nomega_1 = 1\nomega_2 = 1\n"
                             "[sweep]\nkappa = 0.05\ng = 0, 0.1\n[solvers]\nuse = lindblad_global\n"
                             "[output]\ndirectory = " + d.string() + "\n";
    const ExperimentConfig c = parse_config(text);
    const RunSummary s = run_experiment(c);
    CHECK(s.cells == 2);
    CHECK(s.failed == 1);
    const auto bad = nlohmann::json::parse(slurp(d / "cell_b00_g00_k00.json"));
    CHECK(bad["status"] == "failed");
    CHECK(bad["error"].get<std::string>().find("degenerate") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(d / "cell_b00_g01_k00.json"))["status"] == "ok");

    // Failed cells are retried on resume.
    CHECK(run_experiment(c).computed == 1);

    const SweepReport r = summarize_sweep(d.string());
    CHECK(r.expected == 2);
    CHECK(r.ok == 1);
    CHECK(r.failed == 1);
    fs::remove_all(d);
}

TEST_CASE("report") {
    const fs::path empty = scratch("empty");
    fs::create_directories(empty);
    try {
        summarize_sweep(empty.string());
        FAIL("empty directory accepted");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("0 cells") != std::string::npos);
    }
    fs::remove_all(empty);

    const fs::path d = scratch("report");
    const ExperimentConfig c = parse_config(with_dir(kMinimal, d));
    run_experiment(c);
    const SweepReport r = write_report(d.string());
    CHECK(r.ok == 1);
    CHECK(r.missing.empty());
    const auto j = nlohmann::json::parse(slurp(d / "cell_b00_k00.json"));
    bool seen = false;
    for (const auto& st : r.stats) {
        if (st.solver != "redfield" || st.metric != "delta_max") continue;
        seen = true;
        CHECK(st.cells == 1);
        CHECK(st.min == j["solvers"]["redfield"]["delta_max"].get<double>());
        CHECK(st.max == st.min);
    }
    CHECK(seen);
    CHECK(fs::exists(d / "contours.csv"));
    CHECK(fs::exists(d / "summary.txt"));

    fs::remove(d / "cell_b00_k00.json");
    CHECK(summarize_sweep(d.string()).missing.size() == 1);
    std::ofstream(d / "cell_b00_k00.json") << "{ not json";
    CHECK(summarize_sweep(d.string()).corrupt.size() == 1);
    fs::remove_all(d);
}

TEST_CASE("threshold crossing interpolates in log kappa") {
    const std::vector<double> k{0.01, 0.03, 0.1, 0.3, 1.0};
    CHECK(*threshold_crossing(k, k) == doctest::Approx(0.1).epsilon(1e-12));
    const auto x = threshold_crossing({0.01, 1.0}, {0.0, 0.2});
    REQUIRE(x.has_value());
    CHECK(*x == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(threshold_crossing({0.1, 0.2}, {0.01, 0.02}).has_value());
    CHECK(*threshold_crossing({0.1, 0.2}, {0.1, 0.3}) == 0.1);
    CHECK_THROWS(threshold_crossing({0.1}, {0.1, 0.2}));
}
