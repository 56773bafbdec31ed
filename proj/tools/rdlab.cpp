// rdlab: command-line front end for simulations, phase-plane queries,
// diagnostics, omega-limit reports, sweeps and the acceptance suite.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "rdlab/acceptance.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/experiment.hpp"
#include "rdlab/phase_plane.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdlab;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Globals {
    std::string config;
    std::string out;
    std::string preset;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

ExperimentConfig experiment_config(const Globals& g) {
    if (!g.config.empty() && !g.preset.empty()) throw ConfigError("--config", "give either --config or --preset");
    if (!g.preset.empty()) return preset(g.preset);
    if (g.config.empty()) throw ConfigError("--config", "missing (or use --preset)");
    return load_config(g.config);
}

fs::path out_dir(const Globals& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("--config", "cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string(), e.what());
    }
}

// The reaction for `phase`: inline JSON, a file holding a bare spec object or an
// experiment config with a "spec" entry, or a preset.
NonlinearitySpec phase_spec(const Globals& g, const std::string& spec_arg) {
    if (!spec_arg.empty() && spec_arg.front() == '{') {
        json j;
        try {
            j = json::parse(spec_arg);
        } catch (const json::parse_error& e) {
            throw ConfigError("--spec", e.what());
        }
        return NonlinearitySpec::from_json(j.contains("spec") ? j.at("spec") : j);
    }
    if (!spec_arg.empty() || !g.config.empty()) {
        const json j = read_json(spec_arg.empty() ? g.config : spec_arg);
        return NonlinearitySpec::from_json(j.contains("spec") ? j.at("spec") : j);
    }
    if (!g.preset.empty()) return preset(g.preset).spec;
    throw ConfigError("--spec", "missing (or use --config / --preset)");
}

std::vector<double> split_numbers(const std::string& s, char sep, std::size_t count, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(flag, "bad number '" + item + "'");
        }
    }
    if (out.size() != count) throw ConfigError(flag, "expected " + std::to_string(count) + " values");
    return out;
}

json orbit_json(const OrbitClass& cls) {
    json j{{"tag", std::string(orbit_tag(cls))}};
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, orbit::Equilibrium>) j["u_star"] = o.u_star;
            if constexpr (std::is_same_v<T, orbit::Periodic>) {
                j["p"] = o.p;
                j["q"] = o.q;
                j["level"] = o.level;
                j["period"] = o.period;
            }
            if constexpr (std::is_same_v<T, orbit::Homoclinic>) {
                j["base"] = o.base;
                j["extremum"] = o.extremum;
                j["level"] = o.level;
            }
            if constexpr (std::is_same_v<T, orbit::Heteroclinic>) {
                j["left"] = o.left;
                j["right"] = o.right;
                j["level"] = o.level;
            }
            if constexpr (std::is_same_v<T, orbit::Unresolved>) j["reason"] = o.reason;
        },
        cls);
    return j;
}

int cmd_simulate(const Globals& g) {
    const auto cfg = experiment_config(g);
    const fs::path dir = out_dir(g, "out/" + cfg.name);
    const auto out = run_experiment(cfg, dir);
    if (out.failure) {
        std::cerr << "rdlab: numerical failure: " << *out.failure << " (partial output in " << dir.string() << ")\n";
        return kNumerical;
    }
    std::cout << "wrote " << dir.string() << " (" << out.run.snapshots.size() << " snapshots";
    if (out.analysis.omega)
        std::cout << ", case " << case_name(out.analysis.case_tag.tag) << ", quasiconvergent "
                  << tri_name(out.analysis.omega->quasiconvergent) << ", convergent "
                  << tri_name(out.analysis.omega->convergent);
    std::cout << ")\n";
    return kOk;
}

struct PhaseArgs {
    std::string spec;
    std::string start;
    std::string scan;
    std::string profile = "-10:10:0.01";
};

int cmd_phase(const Globals& g, const PhaseArgs& a) {
    const auto spec = phase_spec(g, a.spec);
    if (a.start.empty() == a.scan.empty()) throw ConfigError("--start", "give exactly one of --start u,v or --scan lo:hi:n");
    std::vector<PhasePoint> starts;
    if (!a.start.empty()) {
        const auto uv = split_numbers(a.start, ',', 2, "--start");
        starts.push_back({uv[0], uv[1]});
    } else {
        const auto s = split_numbers(a.scan, ':', 3, "--scan");
        if (s[2] < 1 || s[2] != std::floor(s[2]) || !(s[0] <= s[1])) throw ConfigError("--scan", "expected lo <= hi and n >= 1");
        const auto n = static_cast<std::size_t>(s[2]);
        for (std::size_t i = 0; i < n; ++i)
            starts.push_back({n == 1 ? s[0] : s[0] + (s[1] - s[0]) * static_cast<double>(i) / static_cast<double>(n - 1), 0.0});
    }
    const auto prof = split_numbers(a.profile, ':', 3, "--profile");

    std::ostringstream table;
    table << "u,v,H,tag\n";
    std::vector<OrbitClass> classes;
    for (const auto& p : starts) {
        const auto cls = classify_orbit(spec, p);
        table << format_double(p.u) << ',' << format_double(p.v) << ',' << format_double(hamiltonian(spec, p)) << ','
              << orbit_tag(cls) << '\n';
        classes.push_back(cls);
    }
    if (g.out.empty()) {
        std::cout << table.str();
        return kOk;
    }
    const fs::path dir(g.out);
    fs::create_directories(dir);
    std::ofstream(dir / "phase.csv", std::ios::binary) << table.str();
    json orbits = json::array();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        json o = orbit_json(classes[i]);
        o["start"] = {starts[i].u, starts[i].v};
        if (!std::holds_alternative<orbit::Unresolved>(classes[i])) {
            char name[32];
            std::snprintf(name, sizeof name, "profile_%03zu.csv", i);
            const auto samples = orbit_profile(spec, classes[i], prof[0], prof[1], prof[2]);
            std::ofstream csv(dir / name, std::ios::binary);
            csv << "x,u,v\n";
            for (std::size_t k = 0; k < samples.x.size(); ++k)
                csv << format_double(samples.x[k]) << ',' << format_double(samples.u[k]) << ','
                    << format_double(samples.v[k]) << '\n';
            o["profile"] = name;
        }
        orbits.push_back(o);
    }
    std::ofstream(dir / "orbits.json", std::ios::binary) << orbits.dump(2) << '\n';
    std::cout << "wrote " << dir.string() << '\n';
    return kOk;
}

struct DiagnoseArgs {
    std::string run;
    std::vector<std::string> zeros;
    std::vector<std::string> intervals;
    bool tracks = false;
    bool case_tag = false;
};

int cmd_diagnose(const Globals& g, const DiagnoseArgs& a) {
    auto stored = load_run(a.run);
    auto& d = stored.config.diagnostics;
    if (!a.zeros.empty()) {
        json comps = a.zeros;
        // Reuse the config validation for companion names.
        json j = to_json(stored.config);
        j["diagnostics"]["companions"] = comps;
        d.companions = parse_config(j).diagnostics.companions;
    }
    if (!a.intervals.empty()) {
        d.intervals.clear();
        for (const auto& s : a.intervals) {
            const auto v = split_numbers(s, ',', 2, "--interval");
            if (!(v[0] < v[1])) throw ConfigError("--interval", "expected lo < hi");
            d.intervals.push_back({v[0], v[1]});
        }
    }
    for (const auto& c : d.companions)
        if (c == "ut" && std::none_of(stored.snapshots.begin(), stored.snapshots.end(),
                                      [](const Snapshot& s) { return !s.ut.empty(); }))
            throw ConfigError("--zeros", "companion ut needs rates.csv (set output.rates in the run config)");
    const Analysis an = analyze(stored.config, stored.grid, stored.snapshots, stored.hypothesis_ok);
    const fs::path dir = out_dir(g, a.run);
    write_diagnostics(an, dir);
    std::size_t violations = 0;
    for (const auto& z : an.zeros) violations += z.history.increases.size();
    std::cout << "case " << case_name(an.case_tag.tag) << ", " << an.tracks.size() << " tracks, " << an.zeros.size()
              << " zero histories with " << violations << " monotonicity violations; wrote " << dir.string() << '\n';
    return kOk;
}

struct OmegaArgs {
    std::string run;
    std::optional<double> window;
    double late = 0.3;
    std::optional<double> cluster_tol;
};

int cmd_omega(const Globals& g, const OmegaArgs& a) {
    auto stored = load_run(a.run);
    auto& o = stored.config.omega;
    if (a.window) o.window = *a.window;
    if (!(a.late > 0.0 && a.late < 1.0)) throw ConfigError("--late", "must lie in (0, 1)");
    o.late_fraction = a.late;
    if (a.cluster_tol) {
        if (!(*a.cluster_tol > 0.0)) throw ConfigError("--cluster-tol", "must be positive");
        o.cluster_tol = *a.cluster_tol;
    }
    const Analysis an = analyze(stored.config, stored.grid, stored.snapshots, stored.hypothesis_ok);
    const fs::path dir = out_dir(g, a.run);
    write_omega(an, dir);
    if (!an.omega) {
        std::cerr << "rdlab: " << an.omega_error << '\n';
        return kNumerical;
    }
    std::cout << an.omega->profiles.size() << " cluster(s), quasiconvergent " << tri_name(an.omega->quasiconvergent)
              << ", convergent " << tri_name(an.omega->convergent) << "; wrote " << dir.string() << '\n';
    return kOk;
}

int cmd_sweep(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config", "sweep needs a sweep file");
    const auto entries = parse_sweep(read_json(g.config));
    const fs::path dir = out_dir(g, "out/sweep");
    const auto results = run_sweep(entries, dir, g.threads);
    int code = kOk;
    for (const auto& r : results) {
        std::cout << r.name << ' ' << (r.ok ? "ok" : "failed: " + r.error) << '\n';
        if (!r.ok) code = kNumerical;
    }
    return code;
}

int cmd_verify(const std::string& suite_name) {
    const auto ids = acceptance::suite(suite_name);
    std::size_t failed = 0;
    acceptance::run(ids, [&](const acceptance::Result& r) {
        std::cout << acceptance::format(r) << std::endl;
        if (!r.pass) ++failed;
    });
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed\n";
    return failed == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rdlab: reaction-diffusion fronts, zero numbers and omega-limit verdicts"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "experiment (or sweep) configuration file, JSON");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_option("--preset", g.preset, "named configuration")
        ->check(CLI::IsMember(preset_names()));

    auto* simulate = app.add_subcommand("simulate", "run the solver and every diagnostic");

    PhaseArgs pa;
    auto* phase = app.add_subcommand("phase", "classify phase-plane orbits of u'' + f(u) = 0");
    phase->add_option("--spec", pa.spec, "reaction spec: inline JSON object, or a spec / experiment config file");
    phase->add_option("--start", pa.start, "start point u,v");
    phase->add_option("--scan", pa.scan, "start points (u, 0) for u in lo:hi:n");
    phase->add_option("--profile", pa.profile, "profile sampling x_lo:x_hi:dx")->capture_default_str();

    DiagnoseArgs da;
    auto* diagnose = app.add_subcommand("diagnose", "zero numbers, critical-point tracks and case tag of a stored run");
    diagnose->add_option("--run", da.run, "run directory")->required();
    diagnose->add_option("--zeros", da.zeros, "companion: zero | ut | vlambda:<x> | file:<path>");
    diagnose->add_option("--interval", da.intervals, "zero-count interval a,b");
    diagnose->add_flag("--tracks", da.tracks, "critical-point tracks (always written)");
    diagnose->add_flag("--case", da.case_tag, "case tag (always written)");

    OmegaArgs oa;
    auto* omega = app.add_subcommand("omega", "omega-limit clusters and verdicts of a stored run");
    omega->add_option("--run", oa.run, "run directory")->required();
    omega->add_option("--window", oa.window, "half width of the window W");
    omega->add_option("--late", oa.late, "late fraction of the run")->capture_default_str();
    omega->add_option("--cluster-tol", oa.cluster_tol, "sup-distance clustering tolerance");

    auto* sweep = app.add_subcommand("sweep", "run a family of experiments on a worker pool");

    std::string suite_name = "all";
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("suite", suite_name, "phase | solver | sturm | omega | all")->capture_default_str()
        ->check(CLI::IsMember(acceptance::suite_names()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(g);
        if (phase->parsed()) return cmd_phase(g, pa);
        if (diagnose->parsed()) return cmd_diagnose(g, da);
        if (omega->parsed()) return cmd_omega(g, oa);
        if (sweep->parsed()) return cmd_sweep(g);
        if (verify->parsed()) return cmd_verify(suite_name);
    } catch (const ConfigError& e) {
        std::cerr << "rdlab: config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ArgumentError& e) {
        std::cerr << "rdlab: invalid input: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "rdlab: numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kConfig;
}
