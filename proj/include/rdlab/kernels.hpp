#pragma once
// Data-parallel inner loops of the solver and diagnostics.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant.  The variant is chosen once at startup from CPUID and can be
// forced with RDLAB_KERNELS=scalar|avx2.  The AVX2 variants perform the same
// IEEE operations in the same order as the scalar ones (no FMA contraction),
// so both produce bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace rdlab::kernels {

enum class Isa { Scalar, Avx2 };

/// Polynomial reaction term with the optional coercive blend toward u/2.
///   w(u) = clamp((|u| - kappa) / blend_width, 0, 1)
///   f(u) = (1 - w) p(u) + w u/2,   and exactly u/2 once w reaches 1.
struct PolyReaction {
    std::span<const double> coeffs;  // ascending degree, may be empty (f = 0)
    std::span<const double> dcoeffs; // coefficients of p', ascending
    bool coercive = false;
    double kappa = 0.0;
    double blend_width = 1.0;
};

struct Table {
    Isa isa;
    /// out[i] = f(u[i])
    void (*reaction)(const PolyReaction&, std::span<const double> u, std::span<double> out);
    /// out[i] = f'(u[i])
    void (*reaction_slope)(const PolyReaction&, std::span<const double> u, std::span<double> out);
    /// out[i] = u[i] + dt f(u[i])
    void (*explicit_update)(const PolyReaction&, double dt, std::span<const double> u,
                            std::span<double> out);
    /// out[j] = (u[j-1] + u[j+1] - 2 u[j]) * inv_dx2 for 0 < j < n-1; out[0] = out[n-1] = 0.
    void (*second_difference)(std::span<const double> u, double inv_dx2, std::span<double> out);
    /// out[i] = a[i] + s b[i]
    void (*axpy)(std::span<const double> a, double s, std::span<const double> b,
                 std::span<double> out);
    double (*max_abs)(std::span<const double> a);
    double (*max_abs_diff)(std::span<const double> a, std::span<const double> b);
};

bool supported(Isa isa);
const Table& table(Isa isa);

/// The table selected for this process.
const Table& active();
std::string_view name(Isa isa);

}  // namespace rdlab::kernels
