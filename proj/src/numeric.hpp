#pragma once
// Root bracketing and refinement shared by the nonlinearity and phase-plane code.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

namespace rdlab::detail {

struct ScanRoot {
    double x;
    bool tangential;  // no sign change: |g| has a local minimum below the tolerance
};

/// Refine a sign-change bracket of g until |g| < ftol or the bracket collapses.
template <class G>
double refine_bracket(const G& g, double a, double b, double ga, double gb, double ftol) {
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if (a > b) {
        std::swap(a, b);
        std::swap(ga, gb);
    }
    std::uintmax_t iters = 200;
    auto done = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        return std::fabs(g(mid)) < ftol * 1e-3 ||
               std::fabs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(mid));
    };
    auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb, done, iters);
    const double m = 0.5 * (r.first + r.second);
    const double gl = std::fabs(g(r.first)), gr = std::fabs(g(r.second)), gm = std::fabs(g(m));
    if (gl <= gm && gl <= gr) return r.first;
    if (gr <= gm) return r.second;
    return m;
}

/// Golden-section minimisation of |g| on [a, b].
template <class G>
double argmin_abs(const G& g, double a, double b) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = std::fabs(g(c)), fd = std::fabs(g(d));
    for (int it = 0; it < 200 && std::fabs(b - a) > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = std::fabs(g(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = std::fabs(g(d));
        }
    }
    return fc < fd ? c : d;
}

/// All roots of g on [lo, hi]: sign changes on a uniform scan of `cells` cells are
/// refined to |g| < ftol; interior local minima of |g| without a sign change whose
/// refined value is below `touch_tol` are reported as tangential roots.
template <class G>
std::vector<ScanRoot> scan_roots(const G& g, double lo, double hi, std::size_t cells, double ftol,
                                 double touch_tol) {
    std::vector<double> xs(cells + 1), gs(cells + 1);
    const double h = (hi - lo) / static_cast<double>(cells);
    for (std::size_t i = 0; i <= cells; ++i) {
        xs[i] = (i == cells) ? hi : lo + h * static_cast<double>(i);
        gs[i] = g(xs[i]);
    }
    std::vector<ScanRoot> roots;
    auto push = [&](double x, bool tangential) {
        if (!roots.empty() && std::fabs(roots.back().x - x) <= 0.5 * h) return;
        roots.push_back({x, tangential});
    };
    for (std::size_t i = 0; i <= cells; ++i) {
        if (gs[i] == 0.0) {
            const bool left = i > 0 && gs[i - 1] != 0.0;
            const bool right = i < cells && gs[i + 1] != 0.0;
            const bool crosses = left && right && std::signbit(gs[i - 1]) != std::signbit(gs[i + 1]);
            push(xs[i], !crosses && (left || right));
            continue;
        }
        if (i < cells && gs[i + 1] != 0.0 && std::signbit(gs[i]) != std::signbit(gs[i + 1])) {
            push(refine_bracket(g, xs[i], xs[i + 1], gs[i], gs[i + 1], ftol), false);
            continue;
        }
        if (i > 0 && i < cells && std::fabs(gs[i]) <= std::fabs(gs[i - 1]) &&
            std::fabs(gs[i]) <= std::fabs(gs[i + 1]) &&
            std::signbit(gs[i - 1]) == std::signbit(gs[i]) && std::signbit(gs[i + 1]) == std::signbit(gs[i])) {
            const double x = argmin_abs(g, xs[i - 1], xs[i + 1]);
            const double gx = g(x);
            if (std::fabs(gx) < touch_tol) {
                // A sign change hidden between scan nodes is a pair of simple roots.
                if (gx != 0.0 && std::signbit(gx) != std::signbit(gs[i])) {
                    push(refine_bracket(g, xs[i - 1], x, gs[i - 1], gx, ftol), false);
                    push(refine_bracket(g, x, xs[i + 1], gx, gs[i + 1], ftol), false);
                } else {
                    push(x, true);
                }
            }
        }
    }
    return roots;
}

}  // namespace rdlab::detail
