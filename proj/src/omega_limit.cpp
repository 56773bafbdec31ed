#include "rdlab/omega_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdlab/errors.hpp"
#include "rdlab/phase_plane.hpp"

namespace rdlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<std::size_t> late_indices(const std::vector<Snapshot>& snaps, double late_fraction) {
    std::vector<std::size_t> idx;
    if (snaps.empty()) return idx;
    const double t0 = snaps.front().t, t1 = snaps.back().t;
    const double start = t1 - late_fraction * (t1 - t0);
    for (std::size_t k = 0; k < snaps.size(); ++k)
        if (snaps[k].t >= start) idx.push_back(k);
    return idx;
}

std::pair<std::size_t, std::size_t> window_range(const Grid& g, double w) {
    const std::size_t c = g.center();
    auto m = static_cast<std::size_t>(std::floor(w / g.dx() + 1e-9));
    m = std::min(m, c);
    return {c - m, c + m};
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo, std::size_t hi) {
    double d = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

struct PhaseSamples {
    std::vector<double> u, v, I;
};

// Phase-plane samples of a discrete steady state.  The first integral carries
// an h^2 correction so that it is conserved to O(h^4) along solutions of the
// three-point scheme.
// With `modified`, I carries the O(h^2) correction that makes it an exact first
// integral of the three-point discrete steady equation; without it, I is H
// along a smooth profile.
PhaseSamples phase_samples(const Profile& p, const NonlinearitySpec& spec, bool modified) {
    const auto& u = p.values;
    const double h = p.grid.dx();
    PhaseSamples s;
    for (std::size_t j = 3; j + 3 < u.size(); ++j) {
        const double v = (-u[j - 3] + 9.0 * u[j - 2] - 45.0 * u[j - 1] + 45.0 * u[j + 1] - 9.0 * u[j + 2] + u[j + 3]) /
                         (60.0 * h);
        const double u2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
        const double u3 = (u[j + 2] - 2.0 * u[j + 1] + 2.0 * u[j - 1] - u[j - 2]) / (2.0 * h * h * h);
        s.u.push_back(u[j]);
        s.v.push_back(v);
        const double correction = modified ? h * h / 12.0 * (v * u3 - 0.5 * u2 * u2) : 0.0;
        s.I.push_back(0.5 * v * v + spec.F(u[j]) + correction);
    }
    return s;
}

double containment(const PhaseSamples& s, const NonlinearitySpec& spec, double level, double lo, double hi,
                   const std::vector<double>& rest_points) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double u = s.u[i], v = s.v[i];
        const double grad = std::hypot(spec.f(u), v);
        double d = grad > 0.0 ? std::abs(s.I[i] - level) / grad : std::numeric_limits<double>::infinity();
        for (double e : rest_points) d = std::min(d, std::hypot(u - e, v));
        if (u < lo) d = std::max(d, lo - u);
        if (u > hi) d = std::max(d, u - hi);
        worst = std::max(worst, d);
    }
    return worst;
}

double level_crossing(const Profile& p, double level, bool* increasing) {
    const auto& u = p.values;
    double best_x = std::numeric_limits<double>::quiet_NaN(), best_slope = -1.0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
        const double a = u[j] - level, b = u[j + 1] - level;
        if (a == 0.0 || (a > 0.0) != (b > 0.0)) {
            const double slope = std::abs(u[j + 1] - u[j]);
            if (slope > best_slope) {
                best_slope = slope;
                best_x = a == 0.0 ? p.grid.x(j) : p.grid.x(j) + p.grid.dx() * a / (a - b);
                *increasing = u[j + 1] > u[j];
            }
        }
    }
    return best_x;
}

double extremum_location(const Profile& p, double base) {
    const auto& u = p.values;
    std::size_t m = 0;
    for (std::size_t j = 1; j < u.size(); ++j)
        if (std::abs(u[j] - base) > std::abs(u[m] - base)) m = j;
    double x = p.grid.x(m);
    if (m > 0 && m + 1 < u.size()) {
        const double denom = u[m - 1] - 2.0 * u[m] + u[m + 1];
        if (denom != 0.0) x += std::clamp(0.5 * (u[m - 1] - u[m + 1]) / denom, -1.0, 1.0) * p.grid.dx();
    }
    return x;
}

}  // namespace

std::string steady_tag(const SteadyClass& c) {
    return std::visit(Overloaded{[](const steady::Constant&) { return std::string("Constant"); },
                                 [](const steady::GroundStateShift&) { return std::string("GroundStateShift"); },
                                 [](const steady::StandingWaveShift&) { return std::string("StandingWaveShift"); },
                                 [](const steady::PeriodicNonconstant&) { return std::string("PeriodicNonconstant"); },
                                 [](const steady::NonSteady&) { return std::string("NonSteady"); }},
                      c);
}

bool is_steady(const SteadyClass& c) { return !std::holds_alternative<steady::NonSteady>(c); }

std::string tri_name(Tri t) {
    switch (t) {
        case Tri::Yes: return "yes";
        case Tri::No: return "no";
        case Tri::Undetermined: return "undetermined";
    }
    return "undetermined";
}

OmegaOptions resolve_options(const Grid& grid, const std::vector<Snapshot>& snapshots, const OmegaOptions& opts) {
    if (!(opts.late_fraction > 0.0 && opts.late_fraction < 1.0)) throw ArgumentError("late_fraction must lie in (0, 1)");
    OmegaOptions r = opts;
    if (!r.window) r.window = grid.half_width() / 4.0;
    if (!(*r.window > 0.0)) throw ArgumentError("window must be positive");
    if (!r.cluster_tol) {
        const auto [lo, hi] = window_range(grid, *r.window);
        double scale = 1.0;
        for (std::size_t k : late_indices(snapshots, r.late_fraction))
            for (std::size_t j = lo; j <= hi; ++j) scale = std::max(scale, std::abs(snapshots[k].u[j]));
        r.cluster_tol = 1e-3 * scale;
    }
    if (!(*r.cluster_tol > 0.0)) throw ArgumentError("cluster_tol must be positive");
    return r;
}

std::vector<OmegaProfile> extract_omega(const Grid& grid, const std::vector<Snapshot>& snapshots,
                                        const NonlinearitySpec& spec, const OmegaOptions& opts_in) {
    const OmegaOptions opts = resolve_options(grid, snapshots, opts_in);
    const auto late = late_indices(snapshots, opts.late_fraction);
    if (late.size() < 3) throw NumericalError("insufficient sampling");
    const auto [lo, hi] = window_range(grid, *opts.window);
    if (hi - lo < 2) throw ArgumentError("window holds fewer than three nodes");

    struct Cluster {
        std::size_t rep;
        std::vector<double> times;
    };
    std::vector<Cluster> clusters;
    for (std::size_t k : late) {
        std::size_t best = clusters.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            const double d = sup_distance(snapshots[k].u, snapshots[clusters[c].rep].u, lo, hi);
            if (d <= *opts.cluster_tol && d < best_d) {
                best = c;
                best_d = d;
            }
        }
        if (best == clusters.size()) clusters.push_back({k, {}});
        clusters[best].rep = k;
        clusters[best].times.push_back(snapshots[k].t);
    }

    std::vector<OmegaProfile> out;
    const double dx = grid.dx();
    for (const auto& c : clusters) {
        const auto& u = snapshots[c.rep].u;
        OmegaProfile op;
        op.profile = restrict_to_window(grid, u, grid.x(hi));
        op.cluster_size = c.times.size();
        op.member_times = c.times;
        op.t_representative = snapshots[c.rep].t;
        double umin = u[lo], umax = u[lo], scale = 1.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            umin = std::min(umin, u[j]);
            umax = std::max(umax, u[j]);
            scale = std::max(scale, std::abs(u[j]));
        }
        for (std::size_t j = lo + 1; j < hi; ++j) {
            const double r = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx) + spec.f(u[j]);
            op.residual = std::max(op.residual, std::abs(r));
        }
        op.residual_tol = opts.residual_tol.value_or(
            1e-4 * scale * (1.0 + lipschitz_bound(spec, umin - 1e-6 * scale, umax + 1e-6 * scale)));
        out.push_back(std::move(op));
    }
    return out;
}

SteadyClass classify_profile(OmegaProfile& op, const NonlinearitySpec& spec, const OmegaOptions& opts) {
    auto done = [&](SteadyClass c) {
        op.classification = c;
        return c;
    };
    if (!(op.residual <= op.residual_tol)) return done(steady::NonSteady{"residual above tolerance"});
    const auto& u = op.profile.values;
    const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
    const double scale = std::max(1.0, std::max(std::abs(*mn), std::abs(*mx)));
    if (*mx - *mn <= opts.constant_rel_tol * scale) return done(steady::Constant{u[u.size() / 2]});

    auto spread_of = [](const PhaseSamples& ps) {
        const auto [lo, hi] = std::minmax_element(ps.I.begin(), ps.I.end());
        return *hi - *lo;
    };
    const PhaseSamples smooth = phase_samples(op.profile, spec, false);
    if (smooth.u.size() < 3) return done(steady::NonSteady{"window too narrow"});
    const PhaseSamples discrete = phase_samples(op.profile, spec, true);
    const bool use_discrete = spread_of(discrete) < spread_of(smooth);
    const PhaseSamples& s = use_discrete ? discrete : smooth;
    op.hamiltonian_spread = spread_of(s);
    if (*op.hamiltonian_spread > opts.hamiltonian_tol) return done(steady::NonSteady{"hamiltonian spread"});

    std::vector<double> sorted = s.I;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double c = sorted[sorted.size() / 2];
    std::size_t jv = 0;
    for (std::size_t i = 1; i < s.v.size(); ++i)
        if (std::abs(s.v[i]) > std::abs(s.v[jv])) jv = i;
    const double speed = std::sqrt(std::max(0.0, 2.0 * (c - spec.F(s.u[jv]))));
    ClassifyOptions co;
    co.level_tol = std::max(1e-8, 10.0 * *op.hamiltonian_spread);
    OrbitClass orbit;
    try {
        orbit = classify_orbit(spec, {s.u[jv], std::copysign(speed, s.v[jv])}, co);
    } catch (const std::exception& e) {
        return done(steady::NonSteady{std::string("orbit classification failed: ") + e.what()});
    }

    auto contained = [&](double level, double lo, double hi, const std::vector<double>& rest) {
        op.containment = containment(s, spec, level, lo, hi, rest);
        return *op.containment <= opts.containment_tol;
    };
    const SteadyClass result = std::visit(
        Overloaded{
            [&](const orbit::Equilibrium&) -> SteadyClass { return steady::NonSteady{"rest point at max speed"}; },
            [&](const orbit::Unresolved& r) -> SteadyClass { return steady::NonSteady{"orbit unresolved: " + r.reason}; },
            [&](const orbit::Periodic& p) -> SteadyClass {
                if (!contained(spec.F(p.p), p.p, p.q, {})) return steady::NonSteady{"trajectory not contained"};
                return steady::PeriodicNonconstant{p.period};
            },
            [&](const orbit::Homoclinic& h) -> SteadyClass {
                if (!contained(spec.F(h.base), std::min(h.base, h.extremum), std::max(h.base, h.extremum), {h.base}))
                    return steady::NonSteady{"trajectory not contained"};
                return steady::GroundStateShift{h.base, h.extremum, extremum_location(op.profile, h.base)};
            },
            [&](const orbit::Heteroclinic& h) -> SteadyClass {
                if (!contained(spec.F(h.left), h.left, h.right, {h.left, h.right}))
                    return steady::NonSteady{"trajectory not contained"};
                bool increasing = true;
                const double x = level_crossing(op.profile, heteroclinic_midpoint(spec, h), &increasing);
                if (std::isnan(x)) return steady::NonSteady{"no midpoint crossing in window"};
                return steady::StandingWaveShift{h.left, h.right, x, increasing};
            }},
        orbit);
    return done(result);
}

OmegaReport verdict(std::vector<OmegaProfile> profiles, const CaseTag& case_tag, bool hypothesis_ok) {
    OmegaReport r;
    r.case_tag = case_tag;
    r.hypothesis_ok = hypothesis_ok;
    r.profiles = std::move(profiles);
    const auto& ps = r.profiles;

    const bool all_steady = std::all_of(ps.begin(), ps.end(), [](const OmegaProfile& p) {
        return is_steady(p.classification) && p.residual <= p.residual_tol;
    });
    r.quasiconvergent = ps.empty() ? Tri::Undetermined : (all_steady ? Tri::Yes : Tri::No);
    if (ps.size() > 1)
        r.convergent = Tri::No;
    else if (ps.size() == 1)
        r.convergent = all_steady ? Tri::Yes : Tri::Undetermined;
    if (!all_steady)
        r.explanations.push_back("a late-window cluster is not a steady state within tolerance at this horizon");

    auto downgrade = [&](const std::string& why) {
        r.quasiconvergent = Tri::Undetermined;
        r.convergent = Tri::Undetermined;
        r.explanations.push_back(why);
    };
    if (case_tag.tag == Case::C1) {
        for (const auto& p : ps) {
            const bool ok = std::holds_alternative<steady::Constant>(p.classification) ||
                            std::holds_alternative<steady::StandingWaveShift>(p.classification);
            if (!ok) {
                downgrade("case C1 admits only constants and standing waves, found " + steady_tag(p.classification));
                break;
            }
        }
    } else if ((case_tag.tag == Case::C2 || case_tag.tag == Case::C3) && hypothesis_ok) {
        bool ok = ps.size() == 1;
        for (const auto& p : ps)
            ok = ok && (std::holds_alternative<steady::Constant>(p.classification) ||
                        std::holds_alternative<steady::GroundStateShift>(p.classification));
        if (!ok)
            downgrade("case " + case_name(case_tag.tag) +
                      " requires a single constant or ground-state limit, found " + std::to_string(ps.size()) +
                      " cluster(s)" + (ps.empty() ? "" : " led by " + steady_tag(ps.front().classification)));
    } else if (case_tag.tag == Case::Undetermined) {
        r.explanations.push_back("case tag undetermined; no cross-check applied");
    }

    if (ps.size() >= 2) {
        std::vector<std::size_t> order(ps.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return ps[a].cluster_size > ps[b].cluster_size; });
        OscillationEvidence ev;
        ev.cluster_a = std::min(order[0], order[1]);
        ev.cluster_b = std::max(order[0], order[1]);
        ev.times_a = ps[ev.cluster_a].member_times;
        ev.times_b = ps[ev.cluster_b].member_times;
        auto straddles = [](const std::vector<double>& outer, const std::vector<double>& inner) {
            for (double t : inner)
                if (!outer.empty() && outer.front() < t && t < outer.back()) return true;
            return false;
        };
        ev.interleaved = straddles(ev.times_a, ev.times_b) || straddles(ev.times_b, ev.times_a);
        r.oscillation_evidence = ev;
    }
    return r;
}

nlohmann::json to_json(const SteadyClass& c) {
    nlohmann::json j;
    j["type"] = steady_tag(c);
    std::visit(Overloaded{[&](const steady::Constant& k) { j["value"] = k.value; },
                          [&](const steady::GroundStateShift& g) {
                              j["base"] = g.base;
                              j["extremum"] = g.extremum;
                              j["shift"] = g.shift;
                          },
                          [&](const steady::StandingWaveShift& w) {
                              j["left"] = w.left;
                              j["right"] = w.right;
                              j["shift"] = w.shift;
                              j["increasing"] = w.increasing;
                          },
                          [&](const steady::PeriodicNonconstant& p) { j["period"] = p.period; },
                          [&](const steady::NonSteady& n) { j["reason"] = n.reason; }},
               c);
    return j;
}

nlohmann::json to_json(const OmegaReport& r) {
    nlohmann::json j;
    j["quasiconvergent"] = tri_name(r.quasiconvergent);
    j["convergent"] = tri_name(r.convergent);
    j["hypothesis_ok"] = r.hypothesis_ok;
    j["case"] = case_name(r.case_tag.tag);
    j["explanations"] = r.explanations;
    j["tolerances"] = {{"window", r.window}, {"late_fraction", r.late_fraction}, {"cluster_tol", r.cluster_tol}};
    auto& arr = j["profiles"] = nlohmann::json::array();
    for (const auto& p : r.profiles) {
        nlohmann::json e;
        e["classification"] = to_json(p.classification);
        e["residual"] = p.residual;
        e["residual_tol"] = p.residual_tol;
        e["cluster_size"] = p.cluster_size;
        e["t_representative"] = p.t_representative;
        e["member_times"] = p.member_times;
        e["hamiltonian_spread"] = p.hamiltonian_spread ? nlohmann::json(*p.hamiltonian_spread) : nlohmann::json();
        e["containment"] = p.containment ? nlohmann::json(*p.containment) : nlohmann::json();
        arr.push_back(std::move(e));
    }
    if (r.oscillation_evidence) {
        const auto& ev = *r.oscillation_evidence;
        j["oscillation_evidence"] = {{"cluster_a", ev.cluster_a},
                                     {"cluster_b", ev.cluster_b},
                                     {"times_a", ev.times_a},
                                     {"times_b", ev.times_b},
                                     {"interleaved", ev.interleaved}};
    } else {
        j["oscillation_evidence"] = nullptr;
    }
    j["critical_value_spread"] = r.critical_value_spread ? nlohmann::json(*r.critical_value_spread) : nlohmann::json();
    return j;
}

}  // namespace rdlab
