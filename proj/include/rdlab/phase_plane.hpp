#pragma once
// Bounded orbits of the steady-state system u' = v, v' = -f(u).  Orbits are
// classified from the level structure of H(u, v) = v^2/2 + F(u) rather than by
// long integrations, which cannot separate a homoclinic orbit from a nearby
// periodic one in finite time.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rdlab/nonlinearity.hpp"

namespace rdlab {

struct PhasePoint {
    double u = 0.0;
    double v = 0.0;
};

namespace orbit {
struct Equilibrium {
    double u_star;
};
/// Nonstationary periodic orbit through (p, 0) and (q, 0) on the level H = level.
struct Periodic {
    double p, q, level, period;
};
/// Ground-state orbit: leaves and returns to the equilibrium `base`, turning at `extremum`.
struct Homoclinic {
    double base, extremum, level;
};
/// Standing-wave orbit between two equilibria, left < right.
struct Heteroclinic {
    double left, right, level;
};
struct Unresolved {
    std::string reason;
};
}  // namespace orbit

using OrbitClass =
    std::variant<orbit::Equilibrium, orbit::Periodic, orbit::Homoclinic, orbit::Heteroclinic, orbit::Unresolved>;

std::string_view orbit_tag(const OrbitClass& cls);

double hamiltonian(const NonlinearitySpec& spec, PhasePoint pt);

struct EquilibriumSet {
    std::vector<double> roots;
    std::vector<bool> tangential;  // no sign change of f; flagged, not resolved
};

/// Roots of f in [lo, hi].  Throws DegenerateError when f vanishes on a subinterval.
EquilibriumSet find_equilibria(const NonlinearitySpec& spec, double lo, double hi,
                               std::size_t cells = 10000);

/// Roots of F(u) = c in [lo, hi] (sign changes and tangential touches).
std::vector<double> turning_points(const NonlinearitySpec& spec, double c, double lo, double hi,
                                   std::size_t cells = 10000);

struct ClassifyOptions {
    double equilibrium_tol = 1e-10;  // |f(u)| and |v| below this at a rest point
    double level_tol = 1e-9;         // |F(e) - c| for an equilibrium to sit on the level
    double search_radius = 1e3;      // used when the spec has no kappa; else 10 kappa
    bool compute_period = true;
};

OrbitClass classify_orbit(const NonlinearitySpec& spec, PhasePoint start, const ClassifyOptions& opts = {});

/// 2 * integral_p^q du / sqrt(2 (F(p) - F(u))) over the periodic orbit through (p, 0).
/// Throws ArgumentError when (p, 0) is not on a nonstationary periodic orbit.
double minimal_period(const NonlinearitySpec& spec, double p);

/// Period for known conjugate turning points p < q of the level c = F(p).
double period_between(const NonlinearitySpec& spec, double p, double q);

/// Point of largest speed on a heteroclinic orbit (minimum of F between the endpoints).
double heteroclinic_midpoint(const NonlinearitySpec& spec, const orbit::Heteroclinic& h);

struct OrbitSamples {
    std::vector<double> x, u, v;
    double level = 0.0;
};

struct ProfileOptions {
    bool increasing = true;  // orientation of heteroclinic profiles
    double rel_tol = 1e-13;
    double abs_tol = 1e-13;
};

/// Samples of the steady state with the given orbit on x_lo, x_lo + dx, ..., x_hi.
/// Anchored at x = 0: the turning point (v = 0) for periodic and homoclinic
/// orbits, the point of largest |v| for heteroclinic ones.
OrbitSamples orbit_profile(const NonlinearitySpec& spec, const OrbitClass& cls, double x_lo, double x_hi,
                           double dx, const ProfileOptions& opts = {});

}  // namespace rdlab
