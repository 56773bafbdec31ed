#pragma once
// Experiment runner: JSON configuration, named presets, the full
// simulate -> diagnose -> omega pipeline and its on-disk layout.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdlab/diagnostics.hpp"
#include "rdlab/grid.hpp"
#include "rdlab/nonlinearity.hpp"
#include "rdlab/omega_limit.hpp"
#include "rdlab/pde_solver.hpp"

namespace rdlab {

struct DiagnosticsConfig {
    /// Zero-count intervals; default is the trusted window.
    std::vector<Interval> intervals;
    /// "zero", "ut", "vlambda:<x>" or "file:<path>" (one value per grid node, or x,u rows).
    std::vector<std::string> companions;
    /// Reflection points for the V_lambda decay series; "track" in the config adds the
    /// limit of the single surviving track when the run lands in case C2.
    std::vector<double> lambdas;
    bool lambda_from_track = true;
    double lambda_radius = 10.0;
    std::optional<Interval> track_interval;  // default: trusted window
    std::optional<double> match_radius;      // default 5 dx
    std::optional<int> k_max;                // default floor of the trusted half width
    double late_fraction = 0.2;
    std::optional<double> energy_radius;     // default: trusted half width
    ZeroTolerances zero_tol;
};

struct OutputConfig {
    std::size_t node_stride = 1;  // every node_stride-th node goes to snapshots.csv
    bool rates = false;           // also write rates.csv (t, x, ut)
};

struct ExperimentConfig {
    std::string name = "run";
    NonlinearitySpec spec;
    bool kappa_defaulted = false;
    Grid grid;
    InitialFamily initial;
    SolverConfig solver;
    DiagnosticsConfig diagnostics;
    OmegaOptions omega;
    OutputConfig output;
    std::uint64_t seed = 0;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Parses a JSON file; syntax errors are reported with line and column.
ExperimentConfig load_config(const std::filesystem::path& file);
/// Fully resolved configuration, every default included.
nlohmann::json to_json(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
/// Throws ConfigError("preset", ...) for unknown names.
nlohmann::json preset_json(const std::string& name);
ExperimentConfig preset(const std::string& name);

/// L - max(10, 2 sqrt(T_end)): the part of the grid the boundary data cannot reach.
/// Falls back to L/2 when that leaves no more than two cells.
double trusted_half_width(const Grid& grid, double T_end);

struct EnergySample {
    double t = 0.0;
    double energy = 0.0;
};

struct ZeroSeries {
    std::string companion;
    ZeroHistory history;
};

struct Analysis {
    std::vector<ZeroSeries> zeros;
    std::vector<CriticalTrack> tracks;
    CaseTag case_tag;
    std::vector<VlambdaDecay> decays;
    double energy_radius = 0.0;
    std::vector<EnergySample> energy;
    std::optional<OmegaReport> omega;
    std::string omega_error;
};

struct ExperimentOutcome {
    ExperimentConfig config;
    InitialData initial;
    RunResult run;
    Analysis analysis;
    std::optional<std::string> failure;  // solver error; run holds the partial snapshots
};

Analysis analyze(const ExperimentConfig& cfg, const Grid& grid, const std::vector<Snapshot>& snapshots,
                 bool hypothesis_ok);
/// Runs the solver and every diagnostic in memory.
ExperimentOutcome run_pipeline(const ExperimentConfig& cfg);

void write_run(const ExperimentOutcome& out, const std::filesystem::path& dir);
/// zeros.csv, zero_audit.json, tracks.csv, case.json, vlambda.csv, energy.csv
void write_diagnostics(const Analysis& a, const std::filesystem::path& dir);
/// omega_profiles.csv, omega_report.json
void write_omega(const Analysis& a, const std::filesystem::path& dir);
nlohmann::json run_meta(const ExperimentOutcome& out);

/// run_pipeline + write_run.  Returns the outcome; a solver failure still writes
/// the partial outputs before the caller reports it.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// A stored run read back from disk.
struct StoredRun {
    ExperimentConfig config;
    Grid grid;  // grid of the stored snapshots (coarser when node_stride > 1)
    std::vector<Snapshot> snapshots;
    bool hypothesis_ok = false;
};

StoredRun load_run(const std::filesystem::path& dir);

struct SweepEntry {
    std::string name;
    ExperimentConfig config;
};

/// {"base": config | "preset": name, "runs": [merge patches], "random_fronts": {"count", "seed"}}
std::vector<SweepEntry> parse_sweep(const nlohmann::json& j);
/// Front data under the configured reaction with alpha, beta drawn from distinct basins.
std::vector<SweepEntry> random_fronts(const ExperimentConfig& base, std::size_t count, std::uint64_t seed);

struct SweepResult {
    std::string name;
    bool ok = false;
    std::string error;
    nlohmann::json summary;
};

/// Runs every entry on a pool of `threads` workers; entry i writes only to dir / name_i.
std::vector<SweepResult> run_sweep(const std::vector<SweepEntry>& entries, const std::filesystem::path& dir,
                                   unsigned threads);

std::string format_double(double v);

}  // namespace rdlab
