#include "rdlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "rdlab/errors.hpp"
#include "rdlab/phase_plane.hpp"

namespace rdlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Typed access to one JSON object; unknown keys are rejected by finish().
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    std::optional<double> opt_number(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
        return d;
    }
    double number(const std::string& key, double fallback) { return opt_number(key).value_or(fallback); }
    double required(const std::string& key) {
        auto v = opt_number(key);
        if (!v) throw ConfigError(at(key), "missing");
        return *v;
    }
    double positive(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw ConfigError(at(key), "must be positive");
        return v;
    }
    std::optional<double> opt_positive(const std::string& key) {
        auto v = opt_number(key);
        if (v && !(*v > 0.0)) throw ConfigError(at(key), "must be positive");
        return v;
    }
    bool boolean(const std::string& key, bool fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v->get<bool>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        return v->get<std::string>();
    }
    std::vector<double> numbers(const std::string& key) {
        const json* v = get(key);
        std::vector<double> out;
        if (!v) return out;
        if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers");
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError(at(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Interval interval(const json& v, const std::string& field) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(field, "expected [lo, hi]");
        Interval iv{v[0].get<double>(), v[1].get<double>()};
        if (!(iv.lo < iv.hi)) throw ConfigError(field, "interval must satisfy lo < hi");
        return iv;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Grid parse_grid(const json& j) {
    Fields g(j, "grid");
    const double L = g.required("L");
    const auto dx = g.opt_number("dx");
    const json* n = g.get("N");
    g.finish();
    if (!(L > 0.0)) throw ConfigError("grid.L", "must be positive");
    if (dx && n) throw ConfigError("grid", "give either dx or N, not both");
    try {
        if (n) {
            if (!n->is_number_integer() || n->get<long long>() < 3) throw ConfigError("grid.N", "expected an integer >= 3");
            const auto N = static_cast<std::size_t>(n->get<long long>());
            if (N % 2 == 0) throw ConfigError("grid.N", "must be odd so that x = 0 is a node");
            return Grid(L, N);
        }
        if (!dx) throw ConfigError("grid", "missing dx or N");
        if (!(*dx > 0.0)) throw ConfigError("grid.dx", "must be positive");
        const double cells = 2.0 * L / *dx;
        const auto c = std::llround(cells);
        if (std::fabs(cells - static_cast<double>(c)) > 1e-9 * cells)
            throw ConfigError("grid.dx", "2L/dx must be an integer");
        if (c % 2 != 0) throw ConfigError("grid.dx", "2L/dx must be even so that x = 0 is a node");
        return Grid::with_spacing(L, *dx);
    } catch (const ArgumentError& e) {
        throw ConfigError("grid", e.what());
    }
}

std::vector<double> read_values_file(const fs::path& file, const std::string& field) {
    std::ifstream in(file);
    if (!in) throw ConfigError(field, "cannot open " + file.string());
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find_last_of(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        double v = 0.0;
        const char* b = cell.data();
        const char* e = cell.data() + cell.size();
        while (b < e && *b == ' ') ++b;
        auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc()) {
            if (out.empty()) continue;  // header
            throw ConfigError(field, "bad number in " + file.string() + ": " + line);
        }
        out.push_back(v);
    }
    return out;
}

InitialFamily parse_initial(const json& j, const Grid& grid) {
    Fields f(j, "initial");
    const std::string family = f.string("family", "");
    InitialFamily out;
    if (family == "front") {
        initial::Front fr;
        fr.alpha = f.number("alpha", fr.alpha);
        fr.beta = f.number("beta", fr.beta);
        fr.steepness = f.positive("steepness", fr.steepness);
        fr.center = f.number("center", fr.center);
        out = fr;
    } else if (family == "bump") {
        initial::Bump b;
        b.height = f.number("height", b.height);
        b.center = f.number("center", b.center);
        b.width = f.positive("width", b.width);
        out = b;
    } else if (family == "plateaus") {
        initial::Plateaus p;
        p.base = f.number("base", p.base);
        p.transition = f.positive("transition", p.transition);
        const json* iv = f.get("intervals");
        if (!iv || !iv->is_array()) throw ConfigError("initial.intervals", "expected an array of [lo, hi, value]");
        for (const auto& e : *iv) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number() || !e[1].is_number() || !e[2].is_number())
                throw ConfigError("initial.intervals", "expected [lo, hi, value] entries");
            p.intervals.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
        }
        out = p;
    } else if (family == "samples") {
        initial::Samples s;
        const json* file = f.get("file");
        s.values = f.numbers("values");
        if (file) {
            if (!file->is_string()) throw ConfigError("initial.file", "expected a path");
            if (!s.values.empty()) throw ConfigError("initial", "give either values or file, not both");
            s.values = read_values_file(file->get<std::string>(), "initial.file");
        }
        if (s.values.size() != grid.size())
            throw ConfigError("initial.values", "expected " + std::to_string(grid.size()) + " samples, got " +
                                                    std::to_string(s.values.size()));
        out = s;
    } else {
        throw ConfigError("initial.family", "expected front, bump, plateaus or samples");
    }
    f.finish();
    return out;
}

std::vector<double> snapshot_grid(double T, double every) {
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::floor(T / every + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) t.push_back(static_cast<double>(k) * every);
    if (t.back() < T * (1.0 - 1e-12)) t.push_back(T);
    return t;
}

SolverConfig parse_solver(const json& j) {
    Fields f(j, "solver");
    SolverConfig s;
    s.dt = f.positive("dt", s.dt);
    s.T_end = f.positive("T_end", s.T_end);
    const std::string scheme = f.string("scheme", "imex");
    if (scheme == "imex")
        s.scheme = Scheme::Imex;
    else if (scheme == "crank_nicolson")
        s.scheme = Scheme::CrankNicolsonNewton;
    else
        throw ConfigError("solver.scheme", "expected imex or crank_nicolson");
    s.newton_tol = f.positive("newton_tol", s.newton_tol);
    const double iters = f.number("newton_max_iter", s.newton_max_iter);
    if (iters < 1 || iters != std::floor(iters)) throw ConfigError("solver.newton_max_iter", "expected a positive integer");
    s.newton_max_iter = static_cast<int>(iters);
    s.max_dt_lipschitz = f.positive("max_dt_lipschitz", s.max_dt_lipschitz);
    s.blowup_limit = f.opt_positive("blowup_limit");
    const auto every = f.opt_positive("snapshot_every");
    const bool has_times = f.get("snapshot_times") != nullptr;
    if (every && has_times) throw ConfigError("solver", "give either snapshot_every or snapshot_times");
    if (has_times) {
        s.snapshot_times = f.numbers("snapshot_times");
        if (!std::is_sorted(s.snapshot_times.begin(), s.snapshot_times.end()))
            throw ConfigError("solver.snapshot_times", "must be sorted");
        for (double t : s.snapshot_times)
            if (t < 0.0 || t > s.T_end * (1.0 + 1e-12)) throw ConfigError("solver.snapshot_times", "outside [0, T_end]");
    } else {
        s.snapshot_times = snapshot_grid(s.T_end, every.value_or(s.T_end / 200.0));
    }
    f.finish();
    return s;
}

DiagnosticsConfig parse_diagnostics(const json& j) {
    Fields f(j, "diagnostics");
    DiagnosticsConfig d;
    if (const json* iv = f.get("intervals")) {
        if (!iv->is_array()) throw ConfigError("diagnostics.intervals", "expected an array of [lo, hi]");
        for (const auto& e : *iv) d.intervals.push_back(f.interval(e, "diagnostics.intervals"));
    }
    if (const json* c = f.get("companions")) {
        if (!c->is_array()) throw ConfigError("diagnostics.companions", "expected an array of strings");
        for (const auto& e : *c) {
            if (!e.is_string()) throw ConfigError("diagnostics.companions", "expected an array of strings");
            const auto s = e.get<std::string>();
            const bool ok = s == "zero" || s == "ut" || s.rfind("vlambda:", 0) == 0 || s.rfind("file:", 0) == 0;
            if (!ok) throw ConfigError("diagnostics.companions", "unknown companion '" + s + "'");
            if (s.rfind("vlambda:", 0) == 0) {
                double x = 0.0;
                const auto r = std::from_chars(s.data() + 8, s.data() + s.size(), x);
                if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                    throw ConfigError("diagnostics.companions", "bad reflection point in '" + s + "'");
            }
            if (s.rfind("file:", 0) == 0 && !fs::exists(s.substr(5)))
                throw ConfigError("diagnostics.companions", "file not found: " + s.substr(5));
            d.companions.push_back(s);
        }
    }
    if (const json* l = f.get("lambdas")) {
        if (!l->is_array()) throw ConfigError("diagnostics.lambdas", "expected numbers or \"track\"");
        d.lambda_from_track = false;
        for (const auto& e : *l) {
            if (e.is_string() && e.get<std::string>() == "track")
                d.lambda_from_track = true;
            else if (e.is_number())
                d.lambdas.push_back(e.get<double>());
            else
                throw ConfigError("diagnostics.lambdas", "expected numbers or \"track\"");
        }
    }
    d.lambda_radius = f.positive("lambda_radius", d.lambda_radius);
    if (const json* t = f.get("track_interval")) d.track_interval = f.interval(*t, "diagnostics.track_interval");
    d.match_radius = f.opt_positive("match_radius");
    if (auto k = f.opt_number("k_max")) {
        if (*k < 2 || *k != std::floor(*k)) throw ConfigError("diagnostics.k_max", "expected an integer >= 2");
        d.k_max = static_cast<int>(*k);
    }
    d.late_fraction = f.positive("late_fraction", d.late_fraction);
    if (d.late_fraction >= 1.0) throw ConfigError("diagnostics.late_fraction", "must lie in (0, 1)");
    d.energy_radius = f.opt_positive("energy_radius");
    d.zero_tol.rel_value = f.positive("zero_rel_value", d.zero_tol.rel_value);
    d.zero_tol.rel_derivative = f.positive("zero_rel_derivative", d.zero_tol.rel_derivative);
    f.finish();
    return d;
}

OmegaOptions parse_omega(const json& j) {
    Fields f(j, "omega");
    OmegaOptions o;
    o.window = f.opt_positive("window");
    o.late_fraction = f.positive("late_fraction", o.late_fraction);
    if (o.late_fraction >= 1.0) throw ConfigError("omega.late_fraction", "must lie in (0, 1)");
    o.cluster_tol = f.opt_positive("cluster_tol");
    o.residual_tol = f.opt_positive("residual_tol");
    o.constant_rel_tol = f.positive("constant_rel_tol", o.constant_rel_tol);
    o.hamiltonian_tol = f.positive("hamiltonian_tol", o.hamiltonian_tol);
    o.containment_tol = f.positive("containment_tol", o.containment_tol);
    f.finish();
    return o;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

json initial_json(const InitialFamily& fam) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, initial::Front>)
                return {{"family", "front"},
                        {"alpha", x.alpha},
                        {"beta", x.beta},
                        {"steepness", x.steepness},
                        {"center", x.center}};
            else if constexpr (std::is_same_v<T, initial::Bump>)
                return {{"family", "bump"}, {"height", x.height}, {"center", x.center}, {"width", x.width}};
            else if constexpr (std::is_same_v<T, initial::Plateaus>) {
                json iv = json::array();
                for (const auto& p : x.intervals) iv.push_back({p.lo, p.hi, p.value});
                return {{"family", "plateaus"}, {"intervals", iv}, {"base", x.base}, {"transition", x.transition}};
            } else {
                return {{"family", "samples"}, {"values", x.values}};
            }
        },
        fam);
}

// Writes through a string buffer so that large CSVs are emitted in one go.
class CsvWriter {
public:
    explicit CsvWriter(const fs::path& file, const std::string& header) : file_(file) { buf_ = header + "\n"; }
    ~CsvWriter() noexcept(false) {
        std::ofstream out(file_, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + file_.string());
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    }
    CsvWriter& operator<<(double v) {
        sep();
        buf_ += format_double(v);
        return *this;
    }
    CsvWriter& operator<<(const std::string& s) {
        sep();
        buf_ += s;
        return *this;
    }
    CsvWriter& operator<<(std::size_t v) {
        sep();
        buf_ += std::to_string(v);
        return *this;
    }
    CsvWriter& operator<<(int v) {
        sep();
        buf_ += std::to_string(v);
        return *this;
    }
    void end() {
        buf_ += '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) buf_ += ',';
        first_ = false;
    }
    fs::path file_;
    std::string buf_;
    bool first_ = true;
};

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, const std::string& where) {
    std::vector<double> out;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end && out.size() < expected) {
        double v = 0.0;
        auto r = std::from_chars(p, end, v);
        if (r.ec != std::errc()) throw ConfigError(where, "bad number in row: " + line);
        out.push_back(v);
        p = r.ptr;
        if (p < end && *p == ',') ++p;
    }
    if (out.size() != expected) throw ConfigError(where, "expected " + std::to_string(expected) + " columns: " + line);
    return out;
}

// Rows of a t,x,value CSV grouped by t.
std::vector<std::pair<double, std::vector<double>>> read_long_csv(const fs::path& file, std::vector<double>* xs) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file.filename().string(), "cannot open " + file.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, std::vector<double>>> out;
    bool first_block = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = parse_row(line, 3, file.filename().string());
        if (out.empty() || out.back().first != row[0]) {
            if (!out.empty()) first_block = false;
            out.push_back({row[0], {}});
        }
        out.back().second.push_back(row[2]);
        if (first_block && xs) xs->push_back(row[1]);
    }
    return out;
}

Companion make_companion(const std::string& name, const Grid& grid) {
    if (name == "zero") return companion::Fixed{std::vector<double>(grid.size(), 0.0)};
    if (name == "ut") return companion::TimeDerivative{};
    if (name.rfind("vlambda:", 0) == 0) return companion::Reflect{std::stod(name.substr(8))};
    if (name.rfind("file:", 0) == 0) {
        auto v = read_values_file(name.substr(5), "diagnostics.companions");
        if (v.size() != grid.size()) throw ConfigError("diagnostics.companions", "companion file does not match the grid");
        return companion::Fixed{std::move(v)};
    }
    throw ConfigError("diagnostics.companions", "unknown companion '" + name + "'");
}

// The track that certifies case C2: alive through the late window and inside the largest window.
const CriticalTrack* surviving_track(const std::vector<CriticalTrack>& tracks, const CaseTag& tag, int k_max) {
    const CriticalTrack* found = nullptr;
    for (const auto& tr : tracks) {
        if (tr.terminated || tr.samples.empty() || tr.samples.front().t > tag.late_start) continue;
        bool inside = true;
        for (const auto& s : tr.samples)
            if (s.t >= tag.late_start && !(std::abs(s.x) < k_max)) inside = false;
        if (!inside) continue;
        if (found) return nullptr;
        found = &tr;
    }
    return found;
}

int resolved_k_max(const DiagnosticsConfig& d, double trusted) {
    if (d.k_max) return *d.k_max;
    return std::max(2, static_cast<int>(std::floor(trusted)));
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double trusted_half_width(const Grid& grid, double T_end) {
    const double w = grid.half_width() - std::max(10.0, std::sqrt(4.0 * T_end));
    return w > 2.0 * grid.dx() ? w : 0.5 * grid.half_width();
}

ExperimentConfig parse_config(const json& j) {
    Fields top(j, "");
    ExperimentConfig cfg;
    cfg.name = top.string("name", cfg.name);
    const json* spec = top.get("spec");
    if (!spec) throw ConfigError("spec", "missing");
    cfg.spec = NonlinearitySpec::from_json(*spec);
    const json* grid = top.get("grid");
    if (!grid) throw ConfigError("grid", "missing");
    cfg.grid = parse_grid(*grid);
    const json* init = top.get("initial");
    if (!init) throw ConfigError("initial", "missing");
    cfg.initial = parse_initial(*init, cfg.grid);
    const json* solver = top.get("solver");
    if (!solver) throw ConfigError("solver", "missing");
    cfg.solver = parse_solver(*solver);
    if (const json* d = top.get("diagnostics")) cfg.diagnostics = parse_diagnostics(*d);
    if (const json* o = top.get("omega")) cfg.omega = parse_omega(*o);
    if (const json* o = top.get("output")) {
        Fields f(*o, "output");
        const double stride = f.number("node_stride", 1.0);
        if (stride < 1 || stride != std::floor(stride)) throw ConfigError("output.node_stride", "expected a positive integer");
        cfg.output.node_stride = static_cast<std::size_t>(stride);
        if ((cfg.grid.size() - 1) % cfg.output.node_stride != 0 || ((cfg.grid.size() - 1) / cfg.output.node_stride) % 2 != 0)
            throw ConfigError("output.node_stride", "must divide (N - 1) / 2");
        cfg.output.rates = f.boolean("rates", false);
        f.finish();
    }
    const double seed = top.number("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
    top.finish();

    if (!cfg.spec.kappa() && !cfg.spec.identically_zero()) {
        try {
            const auto init_data = make_initial(cfg.initial, cfg.grid);
            cfg.spec = cfg.spec.with_kappa(default_kappa(init_data.profile.sup_norm()));
            cfg.kappa_defaulted = true;
        } catch (const ArgumentError& e) {
            throw ConfigError("initial", e.what());
        }
    }
    if (cfg.solver.dt > cfg.solver.T_end) throw ConfigError("solver.dt", "exceeds T_end");
    return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("--config", "cannot open " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto pos = std::min<std::size_t>(e.byte, text.size());
        const auto line = std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n') + 1;
        const auto last_nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
        const auto col = last_nl == std::string::npos ? pos : pos - last_nl - 1;
        throw ConfigError(file.string() + ":" + std::to_string(line) + ":" + std::to_string(col),
                          "JSON syntax error");
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["spec"] = cfg.spec.to_json();
    j["grid"] = {{"L", cfg.grid.half_width()}, {"N", cfg.grid.size()}};
    j["initial"] = initial_json(cfg.initial);
    const auto& s = cfg.solver;
    j["solver"] = {{"dt", s.dt},
                   {"T_end", s.T_end},
                   {"scheme", s.scheme == Scheme::Imex ? "imex" : "crank_nicolson"},
                   {"newton_tol", s.newton_tol},
                   {"newton_max_iter", s.newton_max_iter},
                   {"max_dt_lipschitz", s.max_dt_lipschitz},
                   {"blowup_limit", optional_json(s.blowup_limit)},
                   {"snapshot_times", s.snapshot_times}};
    const auto& d = cfg.diagnostics;
    json intervals = json::array();
    for (const auto& iv : d.intervals) intervals.push_back({iv.lo, iv.hi});
    json lambdas = json::array();
    for (double l : d.lambdas) lambdas.push_back(l);
    if (d.lambda_from_track) lambdas.push_back("track");
    j["diagnostics"] = {{"intervals", intervals},
                        {"companions", d.companions},
                        {"lambdas", lambdas},
                        {"lambda_radius", d.lambda_radius},
                        {"track_interval", d.track_interval ? json{d.track_interval->lo, d.track_interval->hi} : json()},
                        {"match_radius", optional_json(d.match_radius)},
                        {"k_max", d.k_max ? json(*d.k_max) : json()},
                        {"late_fraction", d.late_fraction},
                        {"energy_radius", optional_json(d.energy_radius)},
                        {"zero_rel_value", d.zero_tol.rel_value},
                        {"zero_rel_derivative", d.zero_tol.rel_derivative}};
    const auto& o = cfg.omega;
    j["omega"] = {{"window", optional_json(o.window)},
                  {"late_fraction", o.late_fraction},
                  {"cluster_tol", optional_json(o.cluster_tol)},
                  {"residual_tol", optional_json(o.residual_tol)},
                  {"constant_rel_tol", o.constant_rel_tol},
                  {"hamiltonian_tol", o.hamiltonian_tol},
                  {"containment_tol", o.containment_tol}};
    j["output"] = {{"node_stride", cfg.output.node_stride}, {"rates", cfg.output.rates}};
    j["seed"] = cfg.seed;
    return j;
}

std::vector<std::string> preset_names() {
    return {"front_bistable", "bump_c2", "heat_sturm", "heat_plateaus", "limit_ode"};
}

nlohmann::json preset_json(const std::string& name) {
    if (name == "front_bistable")
        return {{"name", name},
                {"spec", {{"variant", "cubic_bistable"}, {"roots", {-1.0, 0.0, 1.0}}}},
                {"grid", {{"L", 60.0}, {"dx", 0.05}}},
                {"initial", {{"family", "front"}, {"alpha", 1.0}, {"beta", -1.0}, {"steepness", 0.5}}},
                {"solver", {{"dt", 0.01}, {"T_end", 400.0}, {"snapshot_every", 1.0}}},
                {"diagnostics", {{"companions", {"zero", "ut"}}}}};
    if (name == "bump_c2")
        return {{"name", name},
                {"spec", {{"variant", "polynomial"}, {"coeffs", {0.0, -1.0, 0.0, 1.0}}}},
                {"grid", {{"L", 60.0}, {"dx", 0.05}}},
                {"initial", {{"family", "bump"}, {"height", 0.5}, {"center", 0.33}, {"width", 2.0}}},
                {"solver", {{"dt", 0.01}, {"T_end", 200.0}, {"snapshot_every", 0.5}}},
                {"diagnostics", {{"companions", {"zero", "ut"}}}}};
    if (name == "heat_sturm") {
        const Grid g = Grid::with_spacing(60.0, 0.05);
        json values = json::array();
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.x(j);
            values.push_back(std::sin(x) * std::exp(-x * x / 100.0));
        }
        return {{"name", name},
                {"spec", {{"variant", "zero"}}},
                {"grid", {{"L", 60.0}, {"dx", 0.05}}},
                {"initial", {{"family", "samples"}, {"values", values}}},
                {"solver", {{"dt", 0.01}, {"T_end", 50.0}, {"snapshot_every", 0.25}}},
                {"diagnostics", {{"companions", {"zero"}}, {"intervals", {{-20.0, 20.0}}}}}};
    }
    if (name == "heat_plateaus")
        return {{"name", name},
                {"spec", {{"variant", "zero"}}},
                {"grid", {{"L", 1200.0}, {"dx", 0.25}}},
                {"initial",
                 {{"family", "plateaus"},
                  {"intervals", {{16.0, 32.0, 1.0}, {256.0, 512.0, 1.0}}},
                  {"base", 0.0},
                  {"transition", 0.5}}},
                {"solver", {{"dt", 0.5}, {"T_end", 6000.0}, {"snapshot_every", 20.0}}},
                {"diagnostics", {{"companions", {"ut"}}}},
                {"output", {{"node_stride", 4}}}};
    if (name == "limit_ode")
        return {{"name", name},
                {"spec", {{"variant", "cubic_bistable"}, {"roots", {-1.0, 0.0, 1.0}}}},
                {"grid", {{"L", 20.0}, {"dx", 0.05}}},
                {"initial", {{"family", "front"}, {"alpha", -0.5}, {"beta", 0.5}, {"steepness", 1.0}}},
                {"solver", {{"dt", 0.01}, {"T_end", 25.0}, {"snapshot_every", 0.25}, {"scheme", "crank_nicolson"}}}};
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

ExperimentConfig preset(const std::string& name) { return parse_config(preset_json(name)); }

Analysis analyze(const ExperimentConfig& cfg, const Grid& grid, const std::vector<Snapshot>& snaps,
                 bool hypothesis_ok) {
    Analysis a;
    if (snaps.empty()) return a;
    const auto& d = cfg.diagnostics;
    const double w = trusted_half_width(grid, snaps.back().t);

    std::vector<Interval> intervals = d.intervals;
    if (intervals.empty()) intervals.push_back({-w, w});
    for (const auto& name : d.companions) {
        const Companion comp = make_companion(name, grid);
        for (const auto& iv : intervals) {
            ZeroSeries zs;
            zs.companion = name;
            zs.history = zero_history(grid, snaps, comp, iv, d.zero_tol);
            a.zeros.push_back(std::move(zs));
        }
    }

    TrackOptions topts;
    topts.match_radius = d.match_radius;
    topts.late_fraction = d.late_fraction;
    a.tracks = track_critical_points(grid, snaps, d.track_interval.value_or(Interval{-w, w}), topts);
    const int k_max = resolved_k_max(d, w);
    a.case_tag = classify_case(a.tracks, k_max, snaps.front().t, snaps.back().t, d.late_fraction);

    std::vector<double> lambdas = d.lambdas;
    const CriticalTrack* survivor = surviving_track(a.tracks, a.case_tag, k_max);
    if (d.lambda_from_track && a.case_tag.tag == Case::C2 && survivor) lambdas.push_back(survivor->samples.back().x);
    for (double l : lambdas) a.decays.push_back(vlambda_decay(grid, snaps, l, d.lambda_radius));

    a.energy_radius = std::min(d.energy_radius.value_or(w), grid.half_width() - 2.0 * grid.dx());
    for (const auto& s : snaps)
        a.energy.push_back({s.t, energy_window(Profile{grid, s.u}, cfg.spec, a.energy_radius)});

    try {
        const OmegaOptions opts = resolve_options(grid, snaps, cfg.omega);
        auto profiles = extract_omega(grid, snaps, cfg.spec, opts);
        for (auto& p : profiles) classify_profile(p, cfg.spec, opts);
        OmegaReport rep = verdict(std::move(profiles), a.case_tag, hypothesis_ok);
        rep.window = *opts.window;
        rep.late_fraction = opts.late_fraction;
        rep.cluster_tol = *opts.cluster_tol;
        if (a.case_tag.tag == Case::C2 && survivor) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& s : survivor->samples) {
                if (s.t < a.case_tag.late_start) continue;
                lo = std::min(lo, s.u);
                hi = std::max(hi, s.u);
            }
            if (hi >= lo) rep.critical_value_spread = hi - lo;
        }
        a.omega = std::move(rep);
    } catch (const std::exception& e) {
        a.omega_error = e.what();
    }
    return a;
}

ExperimentOutcome run_pipeline(const ExperimentConfig& cfg) {
    ExperimentOutcome out;
    out.config = cfg;
    out.initial = make_initial(cfg.initial, cfg.grid);
    try {
        out.run = run(cfg.spec, out.initial.profile, cfg.solver);
    } catch (RunAborted& e) {
        out.run = std::move(e.partial);
        out.failure = e.what();
        return out;
    }
    out.analysis = analyze(cfg, out.run.grid, out.run.snapshots, out.initial.hypothesis_ok());
    return out;
}

json run_meta(const ExperimentOutcome& out) {
    const auto& cfg = out.config;
    const auto& info = out.run.info;
    json j;
    j["config"] = to_json(cfg);
    j["status"] = out.failure ? "failed: " + *out.failure : "ok";
    j["initial_family"] = family_name(cfg.initial);
    j["hypothesis"] = {{"alpha", out.initial.alpha},
                       {"beta", out.initial.beta},
                       {"hypothesis_ok", out.initial.hypothesis_ok()},
                       {"note", out.initial.hypothesis_ok() ? "alpha != beta" : "hypothesis alpha != beta violated"}};
    j["far_field"] = out.initial.far_field_deviation <= 1e-8 ? "exact" : "approximate";
    j["far_field_deviation"] = out.initial.far_field_deviation;
    j["kappa_defaulted"] = cfg.kappa_defaulted;
    const double w = trusted_half_width(cfg.grid, cfg.solver.T_end);
    j["resolved"] = {{"steps", info.steps},
                     {"max_abs", info.max_abs},
                     {"max_newton_iterations", info.max_newton_iterations},
                     {"invariant_bound", info.invariant_bound},
                     {"lipschitz", info.lipschitz},
                     {"dt_times_lipschitz", cfg.solver.dt * info.lipschitz},
                     {"theta_step", info.theta_step},
                     {"blowup_limit", info.blowup_limit},
                     {"kernels", kernels::name(info.isa)},
                     {"trusted_half_width", w},
                     {"k_max", resolved_k_max(cfg.diagnostics, w > 2.0 * cfg.grid.dx() ? w : 0.5 * cfg.grid.half_width())},
                     {"match_radius", cfg.diagnostics.match_radius.value_or(5.0 * cfg.grid.dx())},
                     {"omega_window", cfg.omega.window.value_or(cfg.grid.half_width() / 4.0)}};
    if (out.analysis.omega) j["resolved"]["omega_cluster_tol"] = out.analysis.omega->cluster_tol;
    j["snapshot_count"] = out.run.snapshots.size();
    return j;
}

void write_diagnostics(const Analysis& a, const fs::path& dir) {
    fs::create_directories(dir);
    {
        CsvWriter csv(dir / "zeros.csv", "companion,lo,hi,t,count,multiple,truncated,endpoints_nonzero,degenerate,zeros");
        for (const auto& zs : a.zeros)
            for (const auto& r : zs.history.reports) {
                std::string pos;
                for (const auto& z : r.zeros) {
                    if (!pos.empty()) pos += ';';
                    pos += format_double(z.x);
                    if (z.multiple) pos += 'm';
                }
                csv << zs.companion << r.interval.lo << r.interval.hi << r.t << r.count << r.multiple_count()
                    << std::to_string(r.truncated) << std::to_string(r.endpoints_nonzero)
                    << std::to_string(r.degenerate) << pos;
                csv.end();
            }
    }
    json audit = json::array();
    for (const auto& zs : a.zeros) {
        json inc = json::array();
        for (const auto& [t0, t1] : zs.history.increases) inc.push_back({t0, t1});
        const Interval iv = zs.history.reports.empty() ? Interval{} : zs.history.reports.front().interval;
        audit.push_back({{"companion", zs.companion},
                         {"interval", {iv.lo, iv.hi}},
                         {"audited", zs.history.audited},
                         {"violations", inc},
                         {"excluded_times", zs.history.excluded_times},
                         {"caveat", zs.history.caveat}});
    }
    write_json(dir / "zero_audit.json", audit);
    {
        CsvWriter csv(dir / "tracks.csv", "track,t,x,u,kind");
        for (const auto& tr : a.tracks)
            for (const auto& s : tr.samples) {
                csv << tr.id << s.t << s.x << s.u << std::string(s.maximum ? "max" : "min");
                csv.end();
            }
    }
    json tracks = json::array();
    for (const auto& tr : a.tracks) {
        if (tr.terminated) continue;
        tracks.push_back({{"id", tr.id},
                          {"final_x", tr.samples.back().x},
                          {"final_u", tr.samples.back().u},
                          {"stabilization", optional_json(tr.stabilization)}});
    }
    json decays = json::array();
    for (const auto& dcy : a.decays)
        decays.push_back({{"lambda", dcy.lambda}, {"peak", dcy.peak}, {"last", dcy.last}, {"decayed", dcy.decayed}});
    write_json(dir / "case.json", {{"case", case_name(a.case_tag.tag)},
                                   {"k0", a.case_tag.k0 ? json(*a.case_tag.k0) : json()},
                                   {"counts", a.case_tag.counts},
                                   {"late_start", a.case_tag.late_start},
                                   {"note", a.case_tag.note},
                                   {"surviving_tracks", tracks},
                                   {"vlambda", decays}});
    {
        CsvWriter csv(dir / "vlambda.csv", "lambda,t,sup_v,sup_dv");
        for (const auto& dcy : a.decays)
            for (const auto& s : dcy.series) {
                csv << dcy.lambda << s.t << s.sup_v << s.sup_dv;
                csv.end();
            }
    }
    {
        CsvWriter csv(dir / "energy.csv", "t,R,energy");
        for (const auto& e : a.energy) {
            csv << e.t << a.energy_radius << e.energy;
            csv.end();
        }
    }
}

void write_omega(const Analysis& a, const fs::path& dir) {
    fs::create_directories(dir);
    if (!a.omega) {
        write_json(dir / "omega_report.json", {{"error", a.omega_error}});
        CsvWriter csv(dir / "omega_profiles.csv", "cluster,x,u");
        return;
    }
    write_json(dir / "omega_report.json", to_json(*a.omega));
    CsvWriter csv(dir / "omega_profiles.csv", "cluster,x,u");
    for (std::size_t c = 0; c < a.omega->profiles.size(); ++c) {
        const auto& p = a.omega->profiles[c].profile;
        for (std::size_t j = 0; j < p.values.size(); ++j) {
            csv << c << p.grid.x(j) << p.values[j];
            csv.end();
        }
    }
}

void write_run(const ExperimentOutcome& out, const fs::path& dir) {
    fs::create_directories(dir);
    write_json(dir / "run_meta.json", run_meta(out));
    const Grid& g = out.run.grid;
    const std::size_t stride = out.config.output.node_stride;
    {
        CsvWriter csv(dir / "snapshots.csv", "t,x,u");
        for (const auto& s : out.run.snapshots)
            for (std::size_t j = 0; j < g.size(); j += stride) {
                csv << s.t << g.x(j) << s.u[j];
                csv.end();
            }
    }
    if (out.config.output.rates) {
        CsvWriter csv(dir / "rates.csv", "t,x,ut");
        for (const auto& s : out.run.snapshots) {
            if (s.ut.empty()) continue;
            for (std::size_t j = 0; j < g.size(); j += stride) {
                csv << s.t << g.x(j) << s.ut[j];
                csv.end();
            }
        }
    }
    {
        CsvWriter csv(dir / "theta.csv", "t,theta_minus,theta_plus");
        for (const auto& s : out.run.snapshots) {
            csv << s.t << s.theta_minus << s.theta_plus;
            csv.end();
        }
    }
    if (out.failure) return;
    write_diagnostics(out.analysis, dir);
    write_omega(out.analysis, dir);
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
    ExperimentOutcome out = run_pipeline(cfg);
    write_run(out, dir);
    return out;
}

StoredRun load_run(const fs::path& dir) {
    std::ifstream meta_in(dir / "run_meta.json");
    if (!meta_in) throw ConfigError("--run", "no run_meta.json in " + dir.string());
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        throw ConfigError("run_meta.json", e.what());
    }
    StoredRun run;
    run.config = parse_config(meta.at("config"));
    run.hypothesis_ok = meta.at("hypothesis").at("hypothesis_ok").get<bool>();
    std::vector<double> xs;
    auto blocks = read_long_csv(dir / "snapshots.csv", &xs);
    if (blocks.empty()) throw ConfigError("snapshots.csv", "no rows");
    const std::size_t n = xs.size();
    if (n < 3 || n % 2 == 0) throw ConfigError("snapshots.csv", "node count must be odd and >= 3");
    run.grid = Grid(run.config.grid.half_width(), n);
    if (std::abs(xs.front() + run.grid.half_width()) > 1e-9 * run.grid.half_width())
        throw ConfigError("snapshots.csv", "x column does not match the configured grid");
    std::map<double, std::vector<double>> rates;
    if (fs::exists(dir / "rates.csv"))
        for (auto& [t, v] : read_long_csv(dir / "rates.csv", nullptr)) rates[t] = std::move(v);
    for (auto& [t, u] : blocks) {
        if (u.size() != n) throw ConfigError("snapshots.csv", "ragged snapshot at t = " + format_double(t));
        Snapshot s;
        s.t = t;
        s.u = std::move(u);
        if (auto it = rates.find(t); it != rates.end()) s.ut = it->second;
        s.theta_minus = s.u.front();
        s.theta_plus = s.u.back();
        run.snapshots.push_back(std::move(s));
    }
    return run;
}

std::vector<SweepEntry> random_fronts(const ExperimentConfig& base, std::size_t count, std::uint64_t seed) {
    const double radius = base.spec.kappa().value_or(10.0);
    const auto eq = find_equilibria(base.spec, -radius, radius);
    std::vector<double> stable, unstable;
    for (std::size_t i = 0; i < eq.roots.size(); ++i) {
        if (eq.tangential[i]) continue;
        (base.spec.df(eq.roots[i]) < 0.0 ? stable : unstable).push_back(eq.roots[i]);
    }
    if (stable.size() < 2) throw ConfigError("random_fronts", "the reaction needs two stable equilibria");
    // Basin of a stable equilibrium: between the neighbouring unstable ones, capped at distance 0.5 outside.
    auto basin = [&](double e) {
        double lo = e - 0.5, hi = e + 0.5;
        for (double u : unstable) {
            if (u < e) lo = std::max(lo, u);
            if (u > e) hi = std::min(hi, u);
        }
        const double pad = 0.1 * (hi - lo);
        return std::pair{lo + pad, hi - pad};
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SweepEntry> out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto a = static_cast<std::size_t>(unit(rng) * static_cast<double>(stable.size())) % stable.size();
        auto b = static_cast<std::size_t>(unit(rng) * static_cast<double>(stable.size() - 1)) % (stable.size() - 1);
        if (b >= a) ++b;
        const auto [alo, ahi] = basin(stable[a]);
        const auto [blo, bhi] = basin(stable[b]);
        initial::Front fr;
        fr.alpha = alo + (ahi - alo) * unit(rng);
        fr.beta = blo + (bhi - blo) * unit(rng);
        fr.steepness = 0.25 + 1.75 * unit(rng);
        fr.center = -3.0 + 6.0 * unit(rng);
        ExperimentConfig cfg = base;
        cfg.initial = fr;
        cfg.seed = seed;
        char name[32];
        std::snprintf(name, sizeof name, "front_%03zu", i);
        cfg.name = name;
        out.push_back({name, std::move(cfg)});
    }
    return out;
}

std::vector<SweepEntry> parse_sweep(const json& j) {
    Fields f(j, "sweep");
    json base;
    const json* b = f.get("base");
    const json* p = f.get("preset");
    if (b && p) throw ConfigError("sweep", "give either base or preset");
    if (b)
        base = *b;
    else if (p && p->is_string())
        base = preset_json(p->get<std::string>());
    else
        throw ConfigError("sweep.base", "missing base config or preset name");
    std::vector<SweepEntry> out;
    if (const json* runs = f.get("runs")) {
        if (!runs->is_array()) throw ConfigError("sweep.runs", "expected an array of config patches");
        for (std::size_t i = 0; i < runs->size(); ++i) {
            json cfg = base;
            cfg.merge_patch((*runs)[i]);
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            try {
                out.push_back({name, parse_config(cfg)});
            } catch (const ConfigError& e) {
                throw ConfigError("sweep.runs[" + std::to_string(i) + "]." + e.field, e.what());
            }
        }
    }
    if (const json* rf = f.get("random_fronts")) {
        Fields r(*rf, "sweep.random_fronts");
        const double count = r.number("count", 10.0);
        const double seed = r.number("seed", 0.0);
        r.finish();
        if (count < 0 || count != std::floor(count)) throw ConfigError("sweep.random_fronts.count", "expected an integer");
        auto fronts = random_fronts(parse_config(base), static_cast<std::size_t>(count), static_cast<std::uint64_t>(seed));
        for (auto& e : fronts) out.push_back(std::move(e));
    }
    f.finish();
    if (out.empty()) throw ConfigError("sweep", "no runs");
    return out;
}

std::vector<SweepResult> run_sweep(const std::vector<SweepEntry>& entries, const fs::path& dir, unsigned threads) {
    std::vector<SweepResult> results(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            SweepResult& r = results[i];
            r.name = entries[i].name;
            try {
                const auto out = run_experiment(entries[i].config, dir / entries[i].name);
                r.ok = !out.failure;
                if (out.failure) r.error = *out.failure;
                if (out.analysis.omega) {
                    const auto& om = *out.analysis.omega;
                    json classes = json::array();
                    for (const auto& p : om.profiles) classes.push_back(steady_tag(p.classification));
                    r.summary = {{"case", case_name(out.analysis.case_tag.tag)},
                                 {"quasiconvergent", tri_name(om.quasiconvergent)},
                                 {"convergent", tri_name(om.convergent)},
                                 {"classifications", classes}};
                }
            } catch (const std::exception& e) {
                r.ok = false;
                r.error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(entries.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    json summary = json::array();
    for (const auto& r : results)
        summary.push_back({{"name", r.name}, {"ok", r.ok}, {"error", r.error}, {"summary", r.summary}});
    fs::create_directories(dir);
    write_json(dir / "sweep_summary.json", summary);
    return results;
}

}  // namespace rdlab
