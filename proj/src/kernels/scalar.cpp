#include <algorithm>
#include <cmath>

#include "reaction_scalar.hpp"
#include "tables.hpp"

namespace rdlab::kernels::scalar {
namespace {

void reaction(const PolyReaction& r, std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = detail::reaction_at(r, u[i]);
}

void reaction_slope(const PolyReaction& r, std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = detail::reaction_slope_at(r, u[i]);
}

void explicit_update(const PolyReaction& r, double dt, std::span<const double> u,
                     std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + dt * detail::reaction_at(r, u[i]);
}

void second_difference(std::span<const double> u, double inv_dx2, std::span<double> out) {
    const std::size_t n = u.size();
    if (n == 0) return;
    out[0] = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) out[j] = ((u[j - 1] + u[j + 1]) - 2.0 * u[j]) * inv_dx2;
    if (n > 1) out[n - 1] = 0.0;
}

void axpy(std::span<const double> a, double s, std::span<const double> b, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace

const Table kTable{Isa::Scalar,       reaction, reaction_slope, explicit_update,
                   second_difference, axpy,     max_abs,        max_abs_diff};

}  // namespace rdlab::kernels::scalar
