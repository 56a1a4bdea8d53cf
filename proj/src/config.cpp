#include "sledbench/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sledbench/hash.hpp"

namespace sledbench {

namespace pt = boost::property_tree;

namespace {

std::string format_error(const std::string& origin, int line, const std::string& field,
                         const std::string& what) {
    std::ostringstream os;
    os << origin;
    if (line > 0) os << ":" << line;
    if (!field.empty()) os << ": [" << field << "]";
    os << ": " << what;
    return os.str();
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"meta", {"version", "name"}},
        {"system", {"type", "omega_q", "omega_1", "omega_2"}},
        {"bath", {"omega_c"}},
        {"sweep", {"kappa", "beta", "g"}},
        {"solvers", {"use"}},
        {"grid", {"window", "t_max", "points", "dt_max"}},
        {"sled", {"trajectories", "seed", "workers", "checkpoint_interval"}},
        {"optimize", {"enabled", "starts", "ftol", "xtol", "max_iter", "shift_rates"}},
        {"output", {"directory", "formats", "cell_workers"}},
    };
    return s;
}

// "section.key" -> line number, from a plain scan of the text.
std::map<std::string, int> key_lines(const std::string& text) {
    std::map<std::string, int> out;
    std::istringstream in(text);
    std::string line, section;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string t = boost::trim_copy(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = boost::trim_copy(t.substr(1, t.size() - 2));
            out.emplace(section, n);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        out.emplace(section + "." + boost::trim_copy(t.substr(0, eq)), n);
    }
    return out;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::string origin, std::map<std::string, int> lines)
        : tree_(tree), origin_(std::move(origin)), lines_(std::move(lines)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        auto it = lines_.find(field);
        throw ConfigError(origin_, it == lines_.end() ? 0 : it->second, field, what);
    }

    bool has(const std::string& field) const { return tree_.get_optional<std::string>(field).has_value(); }

    std::string str(const std::string& field, const std::string& fallback) const {
        return boost::trim_copy(tree_.get<std::string>(field, fallback));
    }

    double number(const std::string& field, double fallback) const {
        if (!has(field)) return fallback;
        const std::string s = str(field, "");
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(field, "expected a number, got '" + s + "'");
        }
    }

    double positive(const std::string& field, double fallback) const {
        const double v = number(field, fallback);
        if (!(v > 0.0)) fail(field, "must be > 0");
        return v;
    }

    long long integer(const std::string& field, long long fallback, long long lo) const {
        if (!has(field)) return fallback;
        const std::string s = str(field, "");
        long long v = 0;
        try {
            std::size_t pos = 0;
            v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            fail(field, "expected an integer, got '" + s + "'");
        }
        if (v < lo) fail(field, "must be >= " + std::to_string(lo));
        return v;
    }

    bool boolean(const std::string& field, bool fallback) const {
        if (!has(field)) return fallback;
        const std::string s = boost::to_lower_copy(str(field, ""));
        if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
        if (s == "false" || s == "no" || s == "off" || s == "0") return false;
        fail(field, "expected true or false, got '" + s + "'");
    }

    std::vector<double> values(const std::string& field, const std::vector<double>& fallback,
                               bool allow_zero = false) const {
        if (!has(field)) return fallback;
        std::vector<double> v;
        try {
            v = parse_value_list(str(field, ""));
        } catch (const std::exception& e) {
            fail(field, e.what());
        }
        if (v.empty()) fail(field, "sweep list is empty");
        for (double x : v) {
            if (allow_zero && x == 0.0) continue;
            if (!(x > 0.0)) fail(field, allow_zero ? "sweep values must be >= 0" : "sweep values must be > 0");
        }
        return v;
    }

    std::vector<std::string> words(const std::string& field) const {
        std::vector<std::string> out;
        std::string s = str(field, "");
        boost::split(out, s, boost::is_any_of(", "), boost::token_compress_on);
        std::erase_if(out, [](const std::string& w) { return w.empty(); });
        return out;
    }

private:
    const pt::ptree& tree_;
    std::string origin_;
    std::map<std::string, int> lines_;
};

void write_list(std::ostream& os, const char* key, const std::vector<double>& v) {
    os << key << " =";
    for (double x : v) os << ' ' << x;
    os << '\n';
}

} // namespace

ConfigError::ConfigError(const std::string& origin, int line_, const std::string& field_,
                         const std::string& what)
    : InvalidArgument(format_error(origin, line_, field_, what)), line(line_), field(field_) {}

std::vector<double> logspace(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw InvalidArgument("logspace: bounds must be > 0");
    if (n < 1) throw InvalidArgument("logspace: need at least one point");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i) v[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> parse_value_list(const std::string& s) {
    std::vector<std::string> parts;
    const std::string t = boost::trim_copy(s);
    if (boost::starts_with(t, "logspace")) {
        boost::split(parts, t.substr(8), boost::is_any_of(" \t,"), boost::token_compress_on);
        std::erase_if(parts, [](const std::string& w) { return w.empty(); });
        if (parts.size() != 3) throw InvalidArgument("logspace needs three arguments: lo hi n");
        return logspace(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
    }
    boost::split(parts, t, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (p.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(p, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != p.size()) throw InvalidArgument("not a number: '" + p + "'");
        out.push_back(v);
    }
    return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    {
        std::istringstream in(text);
        try {
            pt::ini_parser::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(origin, static_cast<int>(e.line()), "", e.message());
        }
    }
    const auto lines = key_lines(text);
    Reader r(tree, origin, lines);

    for (const auto& [section, body] : tree) {
        auto s = schema().find(section);
        if (s == schema().end()) r.fail(section, "unknown section");
        if (body.empty() && !body.data().empty()) r.fail(section, "key outside any section");
        for (const auto& [key, value] : body) {
            if (!s->second.count(key)) r.fail(section + "." + key, "unknown key");
            if (!value.empty()) r.fail(section + "." + key, "nested keys are not supported");
        }
    }

    ExperimentConfig c;
    const long long version = r.integer("meta.version", -1, 0);
    if (version == -1) r.fail("meta.version", "missing schema version (expected 1)");
    if (version != kConfigVersion) r.fail("meta.version", "unsupported schema version " + std::to_string(version));
    c.name = r.str("meta.name", c.name);

    const std::string type = r.str("system.type", "single");
    if (type == "single") {
        c.system = SystemKind::SingleQubit;
        if (r.has("system.omega_1") || r.has("system.omega_2")) r.fail("system.omega_1", "omega_1/omega_2 need type = two");
    } else if (type == "two") {
        c.system = SystemKind::TwoQubit;
        if (r.has("system.omega_q")) r.fail("system.omega_q", "omega_q needs type = single");
    } else {
        r.fail("system.type", "expected 'single' or 'two', got '" + type + "'");
    }
    c.omega_q = r.positive("system.omega_q", c.omega_q);
    c.omega_1 = r.positive("system.omega_1", c.omega_1);
    c.omega_2 = r.positive("system.omega_2", c.omega_2);
    c.omega_c = r.positive("bath.omega_c", c.omega_c);

    c.kappa = r.values("sweep.kappa", c.kappa);
    c.beta = r.values("sweep.beta", c.beta);
    if (c.system == SystemKind::TwoQubit) {
        c.g = r.values("sweep.g", c.g, true);
    } else {
        if (r.has("sweep.g")) r.fail("sweep.g", "g is only valid for type = two");
        c.g = {0.0};
    }

    if (r.has("solvers.use")) {
        c.solvers.clear();
        c.sled = false;
        for (const auto& w : r.words("solvers.use")) {
            if (w == "sled") {
                c.sled = true;
                continue;
            }
            LiouvillianKind k{};
            try {
                k = liouvillian_kind_from_string(w);
            } catch (const std::exception&) {
                r.fail("solvers.use", "unknown solver '" + w + "'");
            }
            if (k == LiouvillianKind::LocalLindblad && c.system == SystemKind::SingleQubit)
                r.fail("solvers.use", "lindblad_local needs a two-qubit system");
            if (std::find(c.solvers.begin(), c.solvers.end(), k) == c.solvers.end()) c.solvers.push_back(k);
        }
        if (c.solvers.empty() && !c.sled) r.fail("solvers.use", "no solver selected");
    }

    c.window = r.positive("grid.window", c.window);
    if (r.has("grid.t_max")) c.t_max = r.positive("grid.t_max", 1.0);
    c.points = static_cast<int>(r.integer("grid.points", c.points, 2));
    c.dt_max = r.positive("grid.dt_max", c.dt_max);

    c.n_traj = static_cast<std::size_t>(r.integer("sled.trajectories", static_cast<long long>(c.n_traj), 2));
    c.seed = static_cast<std::uint64_t>(r.integer("sled.seed", static_cast<long long>(c.seed), 0));
    c.workers = static_cast<int>(r.integer("sled.workers", c.workers, 0));
    c.checkpoint_interval = r.positive("sled.checkpoint_interval", c.checkpoint_interval);

    c.optimize = r.boolean("optimize.enabled", c.optimize);
    c.starts = static_cast<int>(r.integer("optimize.starts", c.starts, 1));
    if (c.starts > 9) r.fail("optimize.starts", "at most 9 starts are supported");
    c.powell.ftol = r.positive("optimize.ftol", c.powell.ftol);
    c.powell.xtol = r.positive("optimize.xtol", c.powell.xtol);
    c.powell.max_iter = static_cast<int>(r.integer("optimize.max_iter", c.powell.max_iter, 1));
    c.shift_rates = r.boolean("optimize.shift_rates", c.shift_rates);
    if (c.optimize && !c.sled) r.fail("optimize.enabled", "optimization needs the sled reference");
    if (c.optimize && c.solvers.empty()) r.fail("optimize.enabled", "optimization needs a Born-Markov solver");

    c.output_dir = r.str("output.directory", c.output_dir);
    if (c.output_dir.empty()) r.fail("output.directory", "must not be empty");
    if (r.has("output.formats")) {
        c.write_csv = c.write_json = false;
        for (const auto& w : r.words("output.formats")) {
            if (w == "csv") c.write_csv = true;
            else if (w == "json") c.write_json = true;
            else r.fail("output.formats", "unknown format '" + w + "'");
        }
    }
    c.cell_workers = static_cast<int>(r.integer("output.cell_workers", c.cell_workers, 1));

    // Only settings that change numbers enter the hash.
    std::ostringstream os;
    os << std::setprecision(17);
    os << "version = " << kConfigVersion << "\nsystem = " << type << "\n";
    if (c.system == SystemKind::SingleQubit) os << "omega_q = " << c.omega_q << "\n";
    else os << "omega_1 = " << c.omega_1 << "\nomega_2 = " << c.omega_2 << "\n";
    os << "omega_c = " << c.omega_c << "\n";
    write_list(os, "kappa", c.kappa);
    write_list(os, "beta", c.beta);
    if (c.system == SystemKind::TwoQubit) write_list(os, "g", c.g);
    os << "solvers =";
    for (auto k : c.solvers) os << ' ' << to_string(k);
    if (c.sled) os << " sled";
    os << "\nwindow = " << c.window << "\nt_max = " << c.t_max << "\npoints = " << c.points
       << "\ndt_max = " << c.dt_max << "\ntrajectories = " << c.n_traj << "\nseed = " << c.seed
       << "\noptimize = " << c.optimize;
    if (c.optimize)
        os << "\nstarts = " << c.starts << "\nftol = " << c.powell.ftol << "\nxtol = " << c.powell.xtol
           << "\nmax_iter = " << c.powell.max_iter << "\nshift_rates = " << c.shift_rates;
    os << "\n";
    c.canonical = os.str();
    c.hash = fnv1a(c.canonical);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::vector<SweepCell> sweep_cells(const ExperimentConfig& c) {
    std::vector<SweepCell> out;
    const bool two = c.system == SystemKind::TwoQubit;
    for (std::size_t b = 0; b < c.beta.size(); ++b)
        for (std::size_t gi = 0; gi < c.g.size(); ++gi)
            for (std::size_t k = 0; k < c.kappa.size(); ++k) {
                SweepCell cell;
                cell.index = out.size();
                cell.kappa = c.kappa[k];
                cell.beta = c.beta[b];
                cell.g = two ? c.g[gi] : 0.0;
                std::ostringstream id;
                id << "b" << std::setw(2) << std::setfill('0') << b;
                if (two) id << "_g" << std::setw(2) << std::setfill('0') << gi;
                id << "_k" << std::setw(2) << std::setfill('0') << k;
                cell.id = id.str();
                out.push_back(cell);
            }
    return out;
}

SystemSpec cell_system(const ExperimentConfig& c, const SweepCell& cell) {
    if (c.system == SystemKind::SingleQubit) return SingleQubit{c.omega_q};
    return TwoQubit{c.omega_1, c.omega_2, cell.g};
}

BathSpec cell_bath(const ExperimentConfig& c, const SweepCell& cell) {
    const double w = c.omega_ref();
    return BathSpec::from_kappa(cell.kappa, cell.beta / w, c.omega_c, w);
}

double cell_relaxation_rate(const ExperimentConfig& c, const SweepCell& cell) {
    return relaxation_rate(cell_bath(c, cell), c.omega_ref());
}

double cell_t_max(const ExperimentConfig& c, const SweepCell& cell) {
    if (c.t_max > 0.0) return c.t_max;
    return c.window / cell_relaxation_rate(c, cell);
}

std::uint64_t cell_seed(const ExperimentConfig& c, const SweepCell& cell) {
    Fnv1a h;
    h.add_value(c.seed);
    h.add_value(static_cast<std::uint64_t>(cell.index));
    return h.value();
}

} // namespace sledbench
