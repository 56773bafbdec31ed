#pragma once
// Per-element reaction formulas shared by the scalar kernels and the AVX2
// remainder loops.  Keep the operation order in sync with avx2.cpp.

#include <cmath>
#include <span>

#include "rdlab/kernels.hpp"

namespace rdlab::kernels::detail {
// Internal linkage: this header is also compiled into the -mavx2 translation unit.
namespace {

inline double horner(std::span<const double> c, double u) {
    if (c.empty()) return 0.0;
    double acc = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * u + c[k];
    return acc;
}

inline double blend_weight(const PolyReaction& r, double u) {
    double w = (std::fabs(u) - r.kappa) / r.blend_width;
    w = w < 0.0 ? 0.0 : w;
    w = w > 1.0 ? 1.0 : w;
    return w;
}

inline double reaction_at(const PolyReaction& r, double u) {
    const double p = horner(r.coeffs, u);
    if (!r.coercive) return p;
    const double w = blend_weight(r, u);
    if (w >= 1.0) return 0.5 * u;
    return (1.0 - w) * p + w * (0.5 * u);
}

inline double reaction_slope_at(const PolyReaction& r, double u) {
    const double dp = horner(r.dcoeffs, u);
    if (!r.coercive) return dp;
    const double w = blend_weight(r, u);
    if (w >= 1.0) return 0.5;
    const double p = horner(r.coeffs, u);
    const double inv = 1.0 / r.blend_width;
    const double dw = (w > 0.0) ? (u < 0.0 ? -inv : inv) : 0.0;
    return ((1.0 - w) * dp + w * 0.5) + dw * (0.5 * u - p);
}

}  // namespace
}  // namespace rdlab::kernels::detail
