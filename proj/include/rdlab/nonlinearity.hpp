#pragma once
// The reaction term f of u_t = u_xx + f(u), its antiderivative F and the
// coercive modification that replaces f by u/2 far from the working range.

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rdlab/kernels.hpp"

namespace rdlab {

struct ZeroReaction {};

/// f(u) = sum_k coeffs[k] u^k
struct Polynomial {
    std::vector<double> coeffs;
};

/// f(u) = -(u - a)(u - gamma)(u - b) with a < gamma < b.  Roots (-1, 0, 1) give u - u^3.
struct CubicBistable {
    double a = -1.0;
    double gamma = 0.0;
    double b = 1.0;
};

/// Linear interpolation between (u, f(u)) breakpoints, extended linearly past the ends.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> points;
};

using ReactionVariant = std::variant<ZeroReaction, Polynomial, CubicBistable, PiecewiseLinear>;

class NonlinearitySpec {
public:
    NonlinearitySpec() : NonlinearitySpec(ZeroReaction{}) {}
    explicit NonlinearitySpec(ReactionVariant variant, std::optional<double> kappa = std::nullopt,
                              std::optional<double> blend_width = std::nullopt);

    static NonlinearitySpec zero() { return NonlinearitySpec(ZeroReaction{}); }
    static NonlinearitySpec polynomial(std::vector<double> coeffs) {
        return NonlinearitySpec(Polynomial{std::move(coeffs)});
    }
    static NonlinearitySpec cubic_bistable(double a, double gamma, double b) {
        return NonlinearitySpec(CubicBistable{a, gamma, b});
    }
    static NonlinearitySpec piecewise_linear(std::vector<std::pair<double, double>> points) {
        return NonlinearitySpec(PiecewiseLinear{std::move(points)});
    }

    /// Copy with the coercive override f(u) = u/2 for |u| >= kappa + blend_width.
    NonlinearitySpec with_kappa(double kappa, std::optional<double> blend_width = std::nullopt) const;

    const ReactionVariant& variant() const { return variant_; }
    std::optional<double> kappa() const { return kappa_; }
    double blend_width() const { return blend_; }
    bool is_polynomial() const { return !std::holds_alternative<PiecewiseLinear>(variant_); }
    /// True when f vanishes identically (Zero variant, or all polynomial coefficients zero)
    /// and no coercive override is active.
    bool identically_zero() const;

    /// Ascending coefficients of f when f is polynomial on |u| <= kappa.
    const std::vector<double>& poly_coeffs() const { return poly_; }

    /// Kernel descriptor for the vectorized reaction; absent for piecewise-linear f.
    std::optional<kernels::PolyReaction> poly_reaction() const;

    double f(double u) const;
    double df(double u) const;
    double F(double u) const;

    nlohmann::json to_json() const;
    static NonlinearitySpec from_json(const nlohmann::json& j);

private:
    double base_f(double u) const;
    double base_df(double u) const;
    double base_F(double u) const;
    double blend_integral(double from, double to) const;

    ReactionVariant variant_;
    std::optional<double> kappa_;
    double blend_ = 0.0;
    std::vector<double> poly_;   // f
    std::vector<double> dpoly_;  // f'
    std::vector<double> ipoly_;  // F
    std::vector<double> pl_cumulative_;  // integral of f from the first breakpoint
};

double eval_f(const NonlinearitySpec& spec, double u);
double eval_F(const NonlinearitySpec& spec, double u);

/// Upper bound for sup |f'| on [lo, hi].  Throws ArgumentError when lo >= hi.
double lipschitz_bound(const NonlinearitySpec& spec, double lo, double hi);

/// Default coercivity radius 2 (sup|u0| + 1) for specs that do not set one.
double default_kappa(double sup_abs_u0);

}  // namespace rdlab
