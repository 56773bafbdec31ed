#include "rdlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "rdlab/errors.hpp"

namespace rdlab {

Grid::Grid(double half_width, std::size_t nodes) : L_(half_width), N_(nodes) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ArgumentError("grid: L must be positive");
    if (nodes < 3 || nodes % 2 == 0) throw ArgumentError("grid: N must be odd and at least 3");
    dx_ = 2.0 * L_ / static_cast<double>(N_ - 1);
}

Grid Grid::with_spacing(double half_width, double dx) {
    if (!(dx > 0.0)) throw ArgumentError("grid: dx must be positive");
    const double cells = 2.0 * half_width / dx;
    const auto n = static_cast<std::size_t>(std::llround(cells));
    if (std::fabs(cells - static_cast<double>(n)) > 1e-9 * cells)
        throw ArgumentError("grid: 2L/dx must be an integer");
    return Grid(half_width, n + 1);
}

std::size_t Grid::nearest(double x) const {
    const double j = std::round(x / dx_ + static_cast<double>(center()));
    if (j <= 0.0) return 0;
    if (j >= static_cast<double>(N_ - 1)) return N_ - 1;
    return static_cast<std::size_t>(j);
}

double Profile::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

Profile restrict_to_window(const Grid& grid, std::span<const double> values, double half_width) {
    const auto m = std::min<std::size_t>(grid.center(),
                                         static_cast<std::size_t>(std::floor(half_width / grid.dx() + 1e-9)));
    if (m == 0) throw ArgumentError("restrict_to_window: window narrower than one cell");
    Profile out{Grid(static_cast<double>(m) * grid.dx(), 2 * m + 1), {}};
    const std::size_t first = grid.center() - m;
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                      values.begin() + static_cast<std::ptrdiff_t>(first + 2 * m + 1));
    return out;
}

bool InitialData::hypothesis_ok() const { return std::fabs(alpha - beta) > 1e-12; }

std::string family_name(const InitialFamily& family) {
    switch (family.index()) {
        case 0: return "front";
        case 1: return "bump";
        case 2: return "plateaus";
        default: return "samples";
    }
}

InitialData make_initial(const InitialFamily& family, const Grid& grid) {
    InitialData out;
    out.profile.grid = grid;
    auto& u = out.profile.values;
    u.resize(grid.size());
    const std::size_t n = grid.size();

    if (const auto* fr = std::get_if<initial::Front>(&family)) {
        for (std::size_t j = 0; j < n; ++j)
            u[j] = fr->alpha + (fr->beta - fr->alpha) * 0.5 * (1.0 + std::tanh(fr->steepness * (grid.x(j) - fr->center)));
        out.alpha = fr->alpha;
        out.beta = fr->beta;
    } else if (const auto* b = std::get_if<initial::Bump>(&family)) {
        if (!(b->width > 0.0)) throw ArgumentError("bump: width must be positive");
        for (std::size_t j = 0; j < n; ++j) {
            const double s = (grid.x(j) - b->center) / b->width;
            u[j] = b->height * std::exp(-s * s);
        }
        out.alpha = out.beta = 0.0;
    } else if (const auto* pl = std::get_if<initial::Plateaus>(&family)) {
        if (!(pl->transition > 0.0)) throw ArgumentError("plateaus: transition width must be positive");
        auto intervals = pl->intervals;
        std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            if (!(intervals[k].lo < intervals[k].hi)) throw ArgumentError("plateaus: empty interval");
            if (k > 0 && intervals[k].lo < intervals[k - 1].hi) throw ArgumentError("plateaus: intervals overlap");
        }
        const double w = pl->transition;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = grid.x(j);
            double v = pl->base;
            for (const auto& iv : intervals)
                v += (iv.value - pl->base) * 0.5 * (std::tanh((x - iv.lo) / w) - std::tanh((x - iv.hi) / w));
            u[j] = v;
        }
        out.alpha = out.beta = pl->base;
    } else {
        const auto& s = std::get<initial::Samples>(family);
        if (s.values.size() != n) throw ArgumentError("samples: length does not match the grid");
        for (double v : s.values)
            if (!std::isfinite(v)) throw ArgumentError("samples: non-finite value");
        u = s.values;
        out.alpha = u.front();
        out.beta = u.back();
    }
    out.far_field_deviation = std::max(std::fabs(u.front() - out.alpha), std::fabs(u.back() - out.beta));
    u.front() = out.alpha;
    u.back() = out.beta;
    return out;
}

}  // namespace rdlab
