#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdlab/errors.hpp"
#include "rdlab/experiment.hpp"

using namespace rdlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
    return json::parse(R"({
        "name": "small",
        "spec": {"variant": "cubic_bistable", "roots": [-1, 0, 1]},
        "grid": {"L": 10, "dx": 0.1},
        "initial": {"family": "front", "alpha": 1, "beta": -1, "steepness": 1},
        "solver": {"dt": 0.01, "T_end": 2, "snapshot_every": 0.25},
        "diagnostics": {"companions": ["zero", "ut"]},
        "output": {"rates": true}
    })");
}

std::string field_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("rdlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing and defaults") {
    const auto cfg = parse_config(small_config());
    CHECK(cfg.name == "small");
    CHECK(cfg.grid.size() == 201);
    CHECK(cfg.kappa_defaulted);
    REQUIRE(cfg.spec.kappa().has_value());
    CHECK(*cfg.spec.kappa() == doctest::Approx(4.0));
    CHECK(cfg.solver.snapshot_times.size() == 9);
    CHECK(cfg.output.rates);

    auto heat = small_config();
    heat["spec"] = {{"variant", "zero"}};
    CHECK_FALSE(parse_config(heat).kappa_defaulted);
}

TEST_CASE("config errors name the field") {
    auto j = small_config();
    j["grid"] = {{"L", 10}, {"N", 200}};
    CHECK(field_of(j) == "grid.N");
    j = small_config();
    j["grid"]["dx"] = 0.3;
    CHECK(field_of(j) == "grid.dx");
    j = small_config();
    j["solver"]["dtt"] = 0.1;
    CHECK(field_of(j) == "solver.dtt");
    j = small_config();
    j["solver"]["scheme"] = "rk4";
    CHECK(field_of(j) == "solver.scheme");
    j = small_config();
    j["initial"]["family"] = "triangle";
    CHECK(field_of(j) == "initial.family");
    j = small_config();
    j["spec"]["variant"] = "sine";
    CHECK(field_of(j) == "spec.variant");
}

TEST_CASE("resolved config round-trips") {
    const auto a = to_json(parse_config(small_config()));
    const auto b = to_json(parse_config(a));
    CHECK(a == b);
}

TEST_CASE("every preset parses and round-trips") {
    CHECK(preset_names().size() >= 5);
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto cfg = preset(name);
        CHECK(to_json(parse_config(to_json(cfg))) == to_json(cfg));
    }
    CHECK_THROWS(preset("nope"));
}

TEST_CASE("trusted window") {
    const Grid g = Grid::with_spacing(60.0, 0.05);
    CHECK(trusted_half_width(g, 100.0) == doctest::Approx(40.0));
    CHECK(trusted_half_width(g, 1.0) == doctest::Approx(50.0));
    CHECK(trusted_half_width(Grid::with_spacing(10.0, 0.1), 100.0) == doctest::Approx(5.0));
}

TEST_CASE("runs are deterministic and reload exactly") {
    const auto cfg = parse_config(small_config());
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    const auto out = run_experiment(cfg, d1);
    CHECK_FALSE(out.failure.has_value());
    run_experiment(cfg, d2);
    for (const char* f : {"snapshots.csv", "rates.csv", "theta.csv", "zeros.csv", "tracks.csv", "run_meta.json"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(d1 / f));
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }

    const auto stored = load_run(d1);
    REQUIRE(stored.snapshots.size() == out.run.snapshots.size());
    for (std::size_t k = 0; k < stored.snapshots.size(); ++k) {
        CHECK(stored.snapshots[k].t == out.run.snapshots[k].t);
        CHECK(stored.snapshots[k].u == out.run.snapshots[k].u);
    }
    CHECK(stored.hypothesis_ok);
    CHECK(stored.snapshots.back().ut == out.run.snapshots.back().ut);

    const auto meta = json::parse(slurp(d1 / "run_meta.json"));
    CHECK(meta["status"] == "ok");
    CHECK(meta["far_field"] == "exact");
    CHECK(meta["kappa_defaulted"] == true);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("solver failure keeps partial output") {
    auto j = small_config();
    j["spec"] = {{"variant", "polynomial"}, {"coeffs", {0, 0, 1}}, {"kappa", 1000}};
    j["initial"] = {{"family", "bump"}, {"height", 3}, {"width", 1}};
    j["solver"] = {{"dt", 0.001}, {"T_end", 3}, {"snapshot_every", 0.05}, {"blowup_limit", 50}};
    const auto out = run_pipeline(parse_config(j));
    REQUIRE(out.failure.has_value());
    CHECK_FALSE(out.run.snapshots.empty());
}

TEST_CASE("sweeps") {
    const auto entries = parse_sweep(json{{"base", small_config()},
                                          {"runs", json::array({json{{"grid", {{"dx", 0.05}}}}, json::object()})},
                                          {"random_fronts", {{"count", 2}, {"seed", 7}}}});
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].config.grid.dx() == doctest::Approx(0.05));

    const auto a = random_fronts(parse_config(small_config()), 3, 42), b = random_fronts(parse_config(small_config()), 3, 42);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(to_json(a[i].config) == to_json(b[i].config));

    try {
        parse_sweep(json{{"base", small_config()}, {"runs", json::array({json{{"grid", {{"N", 10}}}}})}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field.rfind("sweep.runs[0].", 0) == 0);
    }

    const auto dir = scratch("sweep");
    const auto results = run_sweep(entries, dir, 3);
    REQUIRE(results.size() == 4);
    for (const auto& r : results) CHECK(r.ok);
    CHECK(fs::exists(dir / "sweep_summary.json"));
    fs::remove_all(dir);
}
