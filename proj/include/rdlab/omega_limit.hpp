#pragma once
// Approximate omega-limit profiles from late-time snapshots, their
// classification against the phase plane of u'' + f(u) = 0, and the
// quasiconvergence / convergence verdicts.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rdlab/diagnostics.hpp"
#include "rdlab/grid.hpp"
#include "rdlab/nonlinearity.hpp"
#include "rdlab/pde_solver.hpp"

namespace rdlab {

namespace steady {
struct Constant {
    double value;
};
struct GroundStateShift {
    double base, extremum, shift;
};
/// left < right are the limits of the wave; increasing tells which one sits at -infinity.
struct StandingWaveShift {
    double left, right, shift;
    bool increasing;
};
struct PeriodicNonconstant {
    double period;
};
struct NonSteady {
    std::string reason;
};
}  // namespace steady

using SteadyClass = std::variant<steady::Constant, steady::GroundStateShift, steady::StandingWaveShift,
                                 steady::PeriodicNonconstant, steady::NonSteady>;

std::string steady_tag(const SteadyClass& c);
bool is_steady(const SteadyClass& c);

struct OmegaOptions {
    std::optional<double> window;  // half width w of W = [-w, w]; default L/4
    double late_fraction = 0.3;
    std::optional<double> cluster_tol;    // default 1e-3 scale
    std::optional<double> residual_tol;   // default 1e-4 scale (1 + Lip f)
    double constant_rel_tol = 1e-6;       // oscillation of a Constant profile
    double hamiltonian_tol = 1e-6;        // spread of the first integral along the profile
    double containment_tol = 1e-4;        // phase-space distance to the matched orbit
};

struct OmegaProfile {
    Profile profile;
    double residual = 0.0;
    double residual_tol = 0.0;
    SteadyClass classification = steady::NonSteady{"not classified"};
    std::size_t cluster_size = 0;
    std::vector<double> member_times;
    double t_representative = 0.0;
    std::optional<double> hamiltonian_spread;
    std::optional<double> containment;
};

/// Fills in the defaulted window and cluster tolerance for this run.
OmegaOptions resolve_options(const Grid& grid, const std::vector<Snapshot>& snapshots, const OmegaOptions& opts);

/// Greedy clustering (in time order, by sup-distance on W to each cluster's
/// latest member) of the snapshots in the last late_fraction of the run.
/// Throws NumericalError("insufficient sampling") with fewer than 3 late snapshots.
std::vector<OmegaProfile> extract_omega(const Grid& grid, const std::vector<Snapshot>& snapshots,
                                        const NonlinearitySpec& spec, const OmegaOptions& opts = {});

/// Classifies op in place and returns the classification.
SteadyClass classify_profile(OmegaProfile& op, const NonlinearitySpec& spec, const OmegaOptions& opts = {});

enum class Tri { Yes, No, Undetermined };
std::string tri_name(Tri t);

struct OscillationEvidence {
    std::size_t cluster_a = 0;
    std::size_t cluster_b = 0;
    std::vector<double> times_a;
    std::vector<double> times_b;
    bool interleaved = false;  // a member of one cluster lies between two members of the other
};

struct OmegaReport {
    std::vector<OmegaProfile> profiles;
    CaseTag case_tag;
    Tri quasiconvergent = Tri::Undetermined;
    Tri convergent = Tri::Undetermined;
    bool hypothesis_ok = false;
    std::optional<OscillationEvidence> oscillation_evidence;
    std::vector<std::string> explanations;
    /// Spread of u at the single surviving critical point over the late window (C2 runs).
    std::optional<double> critical_value_spread;
    double window = 0.0;
    double late_fraction = 0.0;
    double cluster_tol = 0.0;
};

OmegaReport verdict(std::vector<OmegaProfile> profiles, const CaseTag& case_tag, bool hypothesis_ok);

nlohmann::json to_json(const SteadyClass& c);
nlohmann::json to_json(const OmegaReport& r);

}  // namespace rdlab
