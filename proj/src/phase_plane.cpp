#include "rdlab/phase_plane.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "numeric.hpp"
#include "rdlab/errors.hpp"

namespace rdlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Endpoint {
    double u = 0.0;
    bool equilibrium = false;
    bool bounded = true;
};

template <class G>
double refine_sign_change(const G& g, double a, double b) {
    return detail::refine_bracket(g, a, b, g(a), g(b), 1e-15);
}

// Walk from u0 in direction dir until the orbit's u-range ends: either at a
// turning point where F reaches the level c, or at an equilibrium lying on the
// level (the orbit approaches it asymptotically).
Endpoint walk(const NonlinearitySpec& spec, double u0, double c, double dir, double level_tol, double radius) {
    auto g = [&](double u) { return spec.F(u) - c; };
    auto f = [&](double u) { return spec.f(u); };
    double u = u0;
    double fu = f(u0);
    for (;;) {
        const double h = 1e-3 * std::max(1.0, std::fabs(u));
        const double un = u + dir * h;
        if (std::fabs(un) > radius) return {un, false, false};
        const double gn = g(un);
        const double fn = f(un);
        const bool f_changes = fn == 0.0 || (fu != 0.0 && std::signbit(fu) != std::signbit(fn));
        if (f_changes) {
            const double e = fn == 0.0 ? un : refine_sign_change(f, u, un);
            const double ge = g(e);
            if (std::fabs(ge) <= level_tol) return {e, true, true};
            if (ge > level_tol) return {refine_sign_change(g, u, e), false, true};
        } else if (gn >= 0.0) {
            const double ux = gn == 0.0 ? un : refine_sign_change(g, u, un);
            // A saddle sitting just above the level (within tolerance) lies a short
            // distance beyond the crossing.
            const double reach = 10.0 * std::sqrt(level_tol) + 2.0 * h;
            const double sub = h / 50.0;
            double a = un, fa = fn;
            for (double s = sub; s <= reach; s += sub) {
                const double b = un + dir * s;
                const double fb = f(b);
                if (fb == 0.0 || std::signbit(fa) != std::signbit(fb)) {
                    const double e = fb == 0.0 ? b : refine_sign_change(f, a, b);
                    if (std::fabs(g(e)) <= level_tol) return {e, true, true};
                    break;
                }
                a = b;
                fa = fb;
            }
            return {ux, false, true};
        }
        u = un;
        fu = fn;
    }
}

// Coefficients of F(p + d) - F(p) in powers of d (constant term dropped), so the
// level gap near a turning point is evaluated without cancellation.
std::vector<double> shifted_antiderivative(const NonlinearitySpec& spec, double p) {
    const auto& f = spec.poly_coeffs();
    std::vector<double> a(f.size() + 1, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) a[k + 1] = f[k] / static_cast<double>(k + 1);
    // Repeated synthetic division gives the Taylor coefficients at p.
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t k = n - 1; k > i; --k) a[k - 1] += p * a[k];
    a.erase(a.begin());
    return a;
}

class LevelGap {
public:
    LevelGap(const NonlinearitySpec& spec, double anchor, double c) : spec_(spec), anchor_(anchor), c_(c) {
        const auto kappa = spec.kappa();
        exact_ = spec.is_polynomial() && !spec.poly_coeffs().empty();
        limit_ = kappa ? *kappa : std::numeric_limits<double>::infinity();
        if (exact_) {
            taylor_ = shifted_antiderivative(spec, anchor);
            offset_ = c - spec.F(anchor);
        }
    }
    // c - F(anchor + d)
    double operator()(double d) const {
        const double u = anchor_ + d;
        if (!exact_ || std::fabs(u) > limit_ || std::fabs(anchor_) > limit_) return c_ - spec_.F(u);
        double acc = 0.0;
        for (std::size_t k = taylor_.size(); k-- > 0;) acc = acc * d + taylor_[k];
        return offset_ - acc * d;
    }

private:
    const NonlinearitySpec& spec_;
    double anchor_;
    double c_;
    bool exact_ = false;
    double limit_ = 0.0;
    double offset_ = 0.0;
    std::vector<double> taylor_;
};

double period_integral(const NonlinearitySpec& spec, double p, double q, double c) {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double m = 0.5 * (p + q);
    const LevelGap left_gap(spec, p, c), right_gap(spec, q, c);
    const double fp = spec.f(p), fq = spec.f(q);
    // u = p + s^2 on [p, m] and u = q - s^2 on [m, q]: the inverse square-root
    // singularities at the turning points become bounded integrands.
    auto left = [&](double s) {
        const double gap = left_gap(s * s);
        if (s == 0.0 || gap <= 0.0) return fp < 0.0 ? 2.0 / std::sqrt(-2.0 * fp) : 0.0;
        return 2.0 * s / std::sqrt(2.0 * gap);
    };
    auto right = [&](double s) {
        const double gap = right_gap(-s * s);
        if (s == 0.0 || gap <= 0.0) return fq > 0.0 ? 2.0 / std::sqrt(2.0 * fq) : 0.0;
        return 2.0 * s / std::sqrt(2.0 * gap);
    };
    const double half_width = std::sqrt(m - p);
    const double a = Quad::integrate(left, 0.0, half_width, 30, 1e-12);
    const double b = Quad::integrate(right, 0.0, std::sqrt(q - m), 30, 1e-12);
    return 2.0 * (a + b);
}

using State = std::array<double, 2>;

void project_to_level(const NonlinearitySpec& spec, State& s, double c) {
    for (int it = 0; it < 4; ++it) {
        const double gap = 0.5 * s[1] * s[1] + spec.F(s[0]) - c;
        if (gap == 0.0) return;
        const double fu = spec.f(s[0]);
        const double n2 = fu * fu + s[1] * s[1];
        if (n2 < 1e-300) return;
        s[0] -= gap * fu / n2;
        s[1] -= gap * s[1] / n2;
    }
}

// Integrates from x = 0 toward each requested sample, projecting onto H = c after every step.
void integrate_branch(const NonlinearitySpec& spec, State s, double c, const std::vector<double>& targets,
                      std::vector<State>& out, const ProfileOptions& opts) {
    namespace odeint = boost::numeric::odeint;
    auto rhs = [&](const State& y, State& dy, double) {
        dy[0] = y[1];
        dy[1] = -spec.f(y[0]);
    };
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    double x = 0.0;
    double h = 1e-3;
    if (!targets.empty() && targets.front() < 0.0) h = -h;
    for (double target : targets) {
        int failures = 0;
        while (x != target) {
            const double remaining = target - x;
            const bool clipped = std::fabs(h) >= std::fabs(remaining);
            double step = clipped ? remaining : h;
            if (stepper.try_step(rhs, s, x, step) == odeint::success) {
                project_to_level(spec, s, c);
                if (clipped) {
                    x = target;
                    if (std::fabs(step) > std::fabs(h)) h = step;
                } else {
                    h = step;
                }
                failures = 0;
            } else {
                h = step;
                if (++failures > 200) throw NumericalError("orbit_profile: step size underflow");
            }
        }
        out.push_back(s);
    }
}

double argmin_F(const NonlinearitySpec& spec, double lo, double hi) {
    constexpr int kCells = 2000;
    double best = lo, fbest = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kCells; ++i) {
        const double u = lo + (hi - lo) * i / kCells;
        const double F = spec.F(u);
        if (F < fbest) {
            fbest = F;
            best = u;
        }
    }
    const double h = (hi - lo) / kCells;
    double a = std::max(lo, best - h), b = std::min(hi, best + h);
    constexpr double kInvPhi = 0.6180339887498949;
    for (int it = 0; it < 100; ++it) {
        const double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
        if (spec.F(x1) < spec.F(x2))
            b = x2;
        else
            a = x1;
    }
    return 0.5 * (a + b);
}

}  // namespace

double heteroclinic_midpoint(const NonlinearitySpec& spec, const orbit::Heteroclinic& h) {
    return argmin_F(spec, h.left, h.right);
}

std::string_view orbit_tag(const OrbitClass& cls) {
    return std::visit(Overloaded{[](const orbit::Equilibrium&) { return std::string_view("equilibrium"); },
                                 [](const orbit::Periodic&) { return std::string_view("periodic"); },
                                 [](const orbit::Homoclinic&) { return std::string_view("homoclinic"); },
                                 [](const orbit::Heteroclinic&) { return std::string_view("heteroclinic"); },
                                 [](const orbit::Unresolved&) { return std::string_view("unresolved"); }},
                      cls);
}

double hamiltonian(const NonlinearitySpec& spec, PhasePoint pt) {
    return 0.5 * pt.v * pt.v + spec.F(pt.u);
}

EquilibriumSet find_equilibria(const NonlinearitySpec& spec, double lo, double hi, std::size_t cells) {
    if (!(lo < hi)) throw ArgumentError("find_equilibria: requires lo < hi");
    auto f = [&](double u) { return spec.f(u); };
    const double h = (hi - lo) / static_cast<double>(cells);
    int zero_run = 0;
    for (std::size_t i = 0; i <= cells; ++i) {
        const double u = (i == cells) ? hi : lo + h * static_cast<double>(i);
        zero_run = (f(u) == 0.0) ? zero_run + 1 : 0;
        if (zero_run >= 3) throw DegenerateError("identically zero on subinterval");
    }
    EquilibriumSet out;
    for (const auto& r : detail::scan_roots(f, lo, hi, cells, 1e-12, 1e-9)) {
        out.roots.push_back(r.x);
        out.tangential.push_back(r.tangential);
    }
    return out;
}

std::vector<double> turning_points(const NonlinearitySpec& spec, double c, double lo, double hi,
                                   std::size_t cells) {
    if (!(lo < hi)) throw ArgumentError("turning_points: requires lo < hi");
    auto g = [&](double u) { return spec.F(u) - c; };
    std::vector<double> out;
    for (const auto& r : detail::scan_roots(g, lo, hi, cells, 1e-12, 1e-9)) out.push_back(r.x);
    return out;
}

OrbitClass classify_orbit(const NonlinearitySpec& spec, PhasePoint start, const ClassifyOptions& opts) {
    if (!std::isfinite(start.u) || !std::isfinite(start.v)) return orbit::Unresolved{"non-finite start"};
    const double fu = spec.f(start.u);
    if (std::fabs(fu) < opts.equilibrium_tol && std::fabs(start.v) < opts.equilibrium_tol)
        return orbit::Equilibrium{start.u};
    const double radius = spec.kappa() ? 10.0 * *spec.kappa() : opts.search_radius;
    const double c = hamiltonian(spec, start);

    Endpoint left, right;
    if (start.v == 0.0) {
        // Started on a turning point; the orbit lies on the side where F < c.
        if (fu > 0.0) {
            right = {start.u, false, true};
            left = walk(spec, start.u, c, -1.0, opts.level_tol, radius);
        } else {
            left = {start.u, false, true};
            right = walk(spec, start.u, c, 1.0, opts.level_tol, radius);
        }
    } else {
        left = walk(spec, start.u, c, -1.0, opts.level_tol, radius);
        right = walk(spec, start.u, c, 1.0, opts.level_tol, radius);
    }
    if (!left.bounded || !right.bounded) return orbit::Unresolved{"unbounded"};
    if (!(left.u < right.u)) return orbit::Unresolved{"degenerate u-range"};

    if (left.equilibrium && right.equilibrium) return orbit::Heteroclinic{left.u, right.u, c};
    if (left.equilibrium) return orbit::Homoclinic{left.u, right.u, c};
    if (right.equilibrium) return orbit::Homoclinic{right.u, left.u, c};
    const double period = opts.compute_period ? period_integral(spec, left.u, right.u, c) : 0.0;
    if (opts.compute_period && !(period > 0.0 && std::isfinite(period)))
        return orbit::Unresolved{"period quadrature failed"};
    return orbit::Periodic{left.u, right.u, c, period};
}

double period_between(const NonlinearitySpec& spec, double p, double q) {
    if (!(p < q)) throw ArgumentError("period_between: requires p < q");
    return period_integral(spec, p, q, spec.F(p));
}

double minimal_period(const NonlinearitySpec& spec, double p) {
    ClassifyOptions opts;
    opts.compute_period = false;
    const OrbitClass cls = classify_orbit(spec, {p, 0.0}, opts);
    const auto* per = std::get_if<orbit::Periodic>(&cls);
    if (per == nullptr)
        throw ArgumentError("minimal_period: (p, 0) is not on a periodic orbit (classified as " +
                            std::string(orbit_tag(cls)) + ")");
    return period_integral(spec, per->p, per->q, per->level);
}

OrbitSamples orbit_profile(const NonlinearitySpec& spec, const OrbitClass& cls, double x_lo, double x_hi,
                           double dx, const ProfileOptions& opts) {
    if (!(dx > 0.0) || !(x_lo <= x_hi)) throw ArgumentError("orbit_profile: bad sampling range");
    OrbitSamples out;
    const auto n = static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx)) + 1;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = x_lo + dx * static_cast<double>(i);

    State anchor{};
    double c = 0.0;
    bool constant = false;
    std::visit(Overloaded{
                   [&](const orbit::Equilibrium& e) {
                       anchor = {e.u_star, 0.0};
                       constant = true;
                   },
                   [&](const orbit::Periodic& p) {
                       c = spec.F(p.p);
                       anchor = {p.p, 0.0};
                   },
                   [&](const orbit::Homoclinic& h) {
                       c = spec.F(h.base);
                       anchor = {h.extremum, 0.0};
                   },
                   [&](const orbit::Heteroclinic& h) {
                       c = 0.5 * (spec.F(h.left) + spec.F(h.right));
                       const double mid = argmin_F(spec, h.left, h.right);
                       const double speed = std::sqrt(std::max(0.0, 2.0 * (c - spec.F(mid))));
                       anchor = {mid, opts.increasing ? speed : -speed};
                   },
                   [&](const orbit::Unresolved& u) {
                       throw ArgumentError("orbit_profile: unresolved orbit (" + u.reason + ")");
                   }},
               cls);
    out.level = constant ? spec.F(anchor[0]) : c;
    out.u.assign(n, anchor[0]);
    out.v.assign(n, 0.0);
    if (constant) return out;

    std::vector<double> fwd_targets, bwd_targets;
    std::vector<std::size_t> fwd_idx, bwd_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.x[i] >= 0.0) {
            fwd_targets.push_back(out.x[i]);
            fwd_idx.push_back(i);
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        if (out.x[i] < 0.0) {
            bwd_targets.push_back(out.x[i]);
            bwd_idx.push_back(i);
        }
    }
    std::vector<State> fwd, bwd;
    integrate_branch(spec, anchor, c, fwd_targets, fwd, opts);
    integrate_branch(spec, anchor, c, bwd_targets, bwd, opts);
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        out.u[fwd_idx[k]] = fwd[k][0];
        out.v[fwd_idx[k]] = fwd[k][1];
    }
    for (std::size_t k = 0; k < bwd.size(); ++k) {
        out.u[bwd_idx[k]] = bwd[k][0];
        out.v[bwd_idx[k]] = bwd[k][1];
    }
    return out;
}

}  // namespace rdlab
