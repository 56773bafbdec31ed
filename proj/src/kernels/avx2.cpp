// AVX2 variants of the solver kernels.  Compiled with -mavx2 only; the
// dispatcher calls into this file after checking CPUID.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "reaction_scalar.hpp"
#include "tables.hpp"

namespace rdlab::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline __m256d horner_pd(std::span<const double> c, __m256d u) {
    if (c.empty()) return _mm256_setzero_pd();
    __m256d acc = _mm256_set1_pd(c.back());
    for (std::size_t k = c.size() - 1; k-- > 0;)
        acc = _mm256_add_pd(_mm256_mul_pd(acc, u), _mm256_set1_pd(c[k]));
    return acc;
}

inline __m256d weight_pd(const PolyReaction& r, __m256d u) {
    __m256d w = _mm256_div_pd(_mm256_sub_pd(abs_pd(u), _mm256_set1_pd(r.kappa)),
                              _mm256_set1_pd(r.blend_width));
    w = _mm256_max_pd(w, _mm256_setzero_pd());
    return _mm256_min_pd(w, _mm256_set1_pd(1.0));
}

inline __m256d reaction_pd(const PolyReaction& r, __m256d u) {
    const __m256d p = horner_pd(r.coeffs, u);
    if (!r.coercive) return p;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half_u = _mm256_mul_pd(_mm256_set1_pd(0.5), u);
    const __m256d w = weight_pd(r, u);
    const __m256d mixed =
        _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(one, w), p), _mm256_mul_pd(w, half_u));
    return _mm256_blendv_pd(mixed, half_u, _mm256_cmp_pd(w, one, _CMP_GE_OQ));
}

inline __m256d slope_pd(const PolyReaction& r, __m256d u) {
    const __m256d dp = horner_pd(r.dcoeffs, u);
    if (!r.coercive) return dp;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d w = weight_pd(r, u);
    const __m256d p = horner_pd(r.coeffs, u);
    const double inv = 1.0 / r.blend_width;
    const __m256d signed_inv = _mm256_blendv_pd(_mm256_set1_pd(inv), _mm256_set1_pd(-inv),
                                                _mm256_cmp_pd(u, zero, _CMP_LT_OQ));
    const __m256d dw = _mm256_and_pd(_mm256_cmp_pd(w, zero, _CMP_GT_OQ), signed_inv);
    const __m256d body =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(one, w), dp), _mm256_mul_pd(w, half)),
                      _mm256_mul_pd(dw, _mm256_sub_pd(_mm256_mul_pd(half, u), p)));
    return _mm256_blendv_pd(body, half, _mm256_cmp_pd(w, one, _CMP_GE_OQ));
}

void reaction(const PolyReaction& r, std::span<const double> u, std::span<double> out) {
    const std::size_t n = u.size();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out.data() + i, reaction_pd(r, _mm256_loadu_pd(u.data() + i)));
    for (; i < n; ++i) out[i] = detail::reaction_at(r, u[i]);
}

void reaction_slope(const PolyReaction& r, std::span<const double> u, std::span<double> out) {
    const std::size_t n = u.size();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out.data() + i, slope_pd(r, _mm256_loadu_pd(u.data() + i)));
    for (; i < n; ++i) out[i] = detail::reaction_slope_at(r, u[i]);
}

void explicit_update(const PolyReaction& r, double dt, std::span<const double> u,
                     std::span<double> out) {
    const std::size_t n = u.size();
    const __m256d vdt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = _mm256_loadu_pd(u.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_add_pd(v, _mm256_mul_pd(vdt, reaction_pd(r, v))));
    }
    for (; i < n; ++i) out[i] = u[i] + dt * detail::reaction_at(r, u[i]);
}

void second_difference(std::span<const double> u, double inv_dx2, std::span<double> out) {
    const std::size_t n = u.size();
    if (n == 0) return;
    out[0] = 0.0;
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d inv = _mm256_set1_pd(inv_dx2);
    std::size_t j = 1;
    for (; j + kLanes + 1 <= n; j += kLanes) {
        const __m256d left = _mm256_loadu_pd(u.data() + j - 1);
        const __m256d mid = _mm256_loadu_pd(u.data() + j);
        const __m256d right = _mm256_loadu_pd(u.data() + j + 1);
        const __m256d d = _mm256_sub_pd(_mm256_add_pd(left, right), _mm256_mul_pd(two, mid));
        _mm256_storeu_pd(out.data() + j, _mm256_mul_pd(d, inv));
    }
    for (; j + 1 < n; ++j) out[j] = ((u[j - 1] + u[j + 1]) - 2.0 * u[j]) * inv_dx2;
    if (n > 1) out[n - 1] = 0.0;
}

void axpy(std::span<const double> a, double s, std::span<const double> b, std::span<double> out) {
    const std::size_t n = a.size();
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d r = _mm256_add_pd(_mm256_loadu_pd(a.data() + i),
                                        _mm256_mul_pd(vs, _mm256_loadu_pd(b.data() + i)));
        _mm256_storeu_pd(out.data() + i, r);
    }
    for (; i < n; ++i) out[i] = a[i] + s * b[i];
}

inline double hmax(__m256d v) {
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, v);
    return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

double max_abs(std::span<const double> a) {
    const std::size_t n = a.size();
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(a.data() + i)));
    double r = hmax(m);
    for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
    return r;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        m = _mm256_max_pd(m, abs_pd(d));
    }
    double r = hmax(m);
    for (; i < n; ++i) r = std::max(r, std::fabs(a[i] - b[i]));
    return r;
}

}  // namespace

const Table kTable{Isa::Avx2,         reaction, reaction_slope, explicit_update,
                   second_difference, axpy,     max_abs,        max_abs_diff};

}  // namespace rdlab::kernels::avx2
