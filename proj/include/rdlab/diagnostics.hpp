#pragma once
// Zero-number machinery on sampled profiles: sign-change counting with a
// hysteresis band, multiple-zero detection, reflections V_lambda u, tracks of
// the critical points of u(., t) and the C1/C2/C3 case trichotomy.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rdlab/grid.hpp"
#include "rdlab/nonlinearity.hpp"
#include "rdlab/pde_solver.hpp"

namespace rdlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Values sampled at x0, x0 + dx, ...
struct UniformSamples {
    double x0 = 0.0;
    double dx = 1.0;
    std::span<const double> values;

    double x(std::size_t j) const { return x0 + dx * static_cast<double>(j); }
    static UniformSamples of(const Profile& p) { return {p.grid.x(0), p.grid.dx(), p.values}; }
};

struct ZeroTolerances {
    double rel_value = 1e-9;       // band: tol_v = rel_value * sup|v| on the interval
    double rel_derivative = 1e-6;  // tol_d = rel_derivative * sup|v| (per unit x)
    std::optional<double> tol_v;   // absolute overrides
    std::optional<double> tol_d;
    /// sup|v| at or below this makes the interval degenerate.
    double abs_floor = 0.0;
};

struct Zero {
    double x = 0.0;
    bool multiple = false;
};

/// count includes sign changes and touching (even-order) zeros.
struct ZeroReport {
    double t = 0.0;
    Interval interval;
    std::size_t count = 0;
    std::vector<Zero> zeros;
    bool truncated = false;         // a zero within dx of an interval endpoint
    bool degenerate = false;        // identically zero within tolerance (zero_history only)
    bool endpoints_nonzero = true;  // |v| above the band at both endpoints
    double tol_v = 0.0;
    double tol_d = 0.0;

    std::size_t multiple_count() const;
};

/// Throws ArgumentError for an empty interval and DegenerateError when v vanishes
/// within tolerance on the whole interval.
ZeroReport count_zeros(const UniformSamples& v, Interval interval, const ZeroTolerances& tol = {});
ZeroReport count_zeros(const Profile& p, Interval interval, const ZeroTolerances& tol = {});

struct Reflection {
    double lambda = 0.0;         // grid node actually used
    double snap_distance = 0.0;  // |requested - used|
    std::size_t half_nodes = 0;  // samples cover lambda -/+ half_nodes * dx
    std::vector<double> values;  // V(x) = u(2 lambda - x) - u(x) on that window

    UniformSamples samples(double dx) const {
        return {lambda - dx * static_cast<double>(half_nodes), dx, values};
    }
};

/// V_lambda p on the largest symmetric window around lambda (snapped to a node).
Reflection reflect_diff(const Profile& p, double lambda);

namespace companion {
struct Fixed {
    std::vector<double> psi;  // a profile on the run grid, e.g. a steady state
};
struct OtherRun {
    const std::vector<Snapshot>* snapshots = nullptr;
};
struct Reflect {
    double lambda = 0.0;
};
/// The scheme's own increments (u^{n} - u^{n-1}) / dt.
struct TimeDerivative {};
}  // namespace companion

using Companion = std::variant<companion::Fixed, companion::OtherRun, companion::Reflect, companion::TimeDerivative>;

struct ZeroHistory {
    std::vector<ZeroReport> reports;
    /// (t_k, t_{k+1}) pairs of audited snapshots where the count increased.
    std::vector<std::pair<double, double>> increases;
    std::vector<double> excluded_times;  // endpoint condition failed or zero near an endpoint
    std::size_t audited = 0;
    std::string caveat;
};

ZeroHistory zero_history(const Grid& grid, const std::vector<Snapshot>& snapshots, const Companion& companion,
                         Interval interval, const ZeroTolerances& tol = {});

struct CriticalSample {
    double t = 0.0;
    double x = 0.0;
    double u = 0.0;
    bool maximum = true;
};

struct CriticalPoint {
    double x = 0.0;
    double u = 0.0;
    bool maximum = true;
};

/// Zeros of the centered-difference derivative inside the interval, located to
/// sub-grid accuracy by the vertex of the local parabola.
std::vector<CriticalPoint> critical_points(const Grid& grid, std::span<const double> u, Interval interval,
                                           double rel_band = 1e-9);

struct CriticalTrack {
    int id = 0;
    std::vector<CriticalSample> samples;
    bool terminated = false;
    /// Total variation of x(t) over the late part of the run (only for tracks alive at the end).
    std::optional<double> stabilization;
};

struct TrackOptions {
    std::optional<double> match_radius;  // default 5 dx
    double late_fraction = 0.2;
    double rel_band = 1e-9;
};

std::vector<CriticalTrack> track_critical_points(const Grid& grid, const std::vector<Snapshot>& snapshots,
                                                 Interval interval, const TrackOptions& opts = {});

enum class Case { C1, C2, C3, Undetermined };
std::string case_name(Case c);

struct CaseTag {
    Case tag = Case::Undetermined;
    std::optional<int> k0;
    std::vector<int> counts;  // N_k for k = 1..k_max
    double late_start = 0.0;
    std::string note;
};

/// N_k counts tracks that are alive during the whole late window and stay in (-k, k).
CaseTag classify_case(const std::vector<CriticalTrack>& tracks, int k_max, double t_first, double t_last,
                      double late_fraction = 0.2);

struct DecaySample {
    double t = 0.0;
    double sup_v = 0.0;
    double sup_dv = 0.0;
};

struct VlambdaDecay {
    double lambda = 0.0;
    std::vector<DecaySample> series;
    double peak = 0.0;
    double last = 0.0;
    bool decayed = false;  // last <= 0.05 peak for sup|V| + sup|V_x|
};

VlambdaDecay vlambda_decay(const Grid& grid, const std::vector<Snapshot>& snapshots, double lambda, double radius);

/// Trapezoidal integral of p_x^2/2 - F(p) over |x| <= R with centered differences.
double energy_window(const Profile& p, const NonlinearitySpec& spec, double R);

}  // namespace rdlab
