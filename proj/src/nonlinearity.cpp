#include "rdlab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "numeric.hpp"
#include "rdlab/errors.hpp"

namespace rdlab {
namespace {

double horner(const std::vector<double>& c, double u) {
    if (c.empty()) return 0.0;
    double acc = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * u + c[k];
    return acc;
}

void require_finite(double u, const char* op) {
    if (!std::isfinite(u)) throw DomainError(std::string(op) + ": non-finite argument");
}

struct Coefficients {
    std::vector<double> f;
    std::vector<double> df;
    std::vector<double> F;
};

Coefficients polynomial_coefficients(const ReactionVariant& v) {
    Coefficients c;
    if (const auto* p = std::get_if<Polynomial>(&v)) {
        c.f = p->coeffs;
    } else if (const auto* cb = std::get_if<CubicBistable>(&v)) {
        const double a = cb->a, g = cb->gamma, b = cb->b;
        c.f = {a * g * b, -(a * b + a * g + g * b), a + g + b, -1.0};
    }
    while (!c.f.empty() && c.f.back() == 0.0) c.f.pop_back();
    for (std::size_t k = 1; k < c.f.size(); ++k) c.df.push_back(static_cast<double>(k) * c.f[k]);
    if (!c.f.empty()) {
        c.F.push_back(0.0);
        for (std::size_t k = 0; k < c.f.size(); ++k) c.F.push_back(c.f[k] / static_cast<double>(k + 1));
    }
    return c;
}

}  // namespace

NonlinearitySpec::NonlinearitySpec(ReactionVariant variant, std::optional<double> kappa,
                                   std::optional<double> blend_width)
    : variant_(std::move(variant)), kappa_(kappa) {
    if (const auto* cb = std::get_if<CubicBistable>(&variant_)) {
        if (!(cb->a < cb->gamma && cb->gamma < cb->b))
            throw ArgumentError("cubic_bistable: roots must satisfy a < gamma < b");
    }
    if (const auto* p = std::get_if<Polynomial>(&variant_)) {
        for (double c : p->coeffs)
            if (!std::isfinite(c)) throw ArgumentError("polynomial: non-finite coefficient");
    }
    if (const auto* pl = std::get_if<PiecewiseLinear>(&variant_)) {
        if (pl->points.size() < 2) throw ArgumentError("piecewise_linear: need at least two breakpoints");
        for (std::size_t i = 1; i < pl->points.size(); ++i)
            if (!(pl->points[i].first > pl->points[i - 1].first))
                throw ArgumentError("piecewise_linear: breakpoints must be strictly increasing in u");
        pl_cumulative_.assign(pl->points.size(), 0.0);
        for (std::size_t i = 1; i < pl->points.size(); ++i) {
            const auto& [u0, f0] = pl->points[i - 1];
            const auto& [u1, f1] = pl->points[i];
            pl_cumulative_[i] = pl_cumulative_[i - 1] + 0.5 * (f0 + f1) * (u1 - u0);
        }
    }
    if (kappa_) {
        if (!(*kappa_ > 0.0) || !std::isfinite(*kappa_)) throw ArgumentError("kappa must be positive");
        blend_ = blend_width.value_or(0.1 * *kappa_);
        if (!(blend_ > 0.0)) throw ArgumentError("blend_width must be positive");
    }
    auto c = polynomial_coefficients(variant_);
    poly_ = std::move(c.f);
    dpoly_ = std::move(c.df);
    ipoly_ = std::move(c.F);
}

NonlinearitySpec NonlinearitySpec::with_kappa(double kappa, std::optional<double> blend_width) const {
    return NonlinearitySpec(variant_, kappa, blend_width);
}

bool NonlinearitySpec::identically_zero() const {
    return !kappa_ && is_polynomial() && poly_.empty();
}

std::optional<kernels::PolyReaction> NonlinearitySpec::poly_reaction() const {
    if (!is_polynomial()) return std::nullopt;
    kernels::PolyReaction r;
    r.coeffs = poly_;
    r.dcoeffs = dpoly_;
    r.coercive = kappa_.has_value();
    r.kappa = kappa_.value_or(0.0);
    r.blend_width = kappa_ ? blend_ : 1.0;
    return r;
}

double NonlinearitySpec::base_f(double u) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&variant_)) {
        const auto& pts = pl->points;
        auto it = std::upper_bound(pts.begin(), pts.end(), u,
                                   [](double x, const auto& p) { return x < p.first; });
        std::size_t k = static_cast<std::size_t>(it - pts.begin());
        k = std::clamp<std::size_t>(k, 1, pts.size() - 1);
        const auto& [u0, f0] = pts[k - 1];
        const auto& [u1, f1] = pts[k];
        return f0 + (f1 - f0) * (u - u0) / (u1 - u0);
    }
    return horner(poly_, u);
}

double NonlinearitySpec::base_df(double u) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&variant_)) {
        const auto& pts = pl->points;
        auto it = std::upper_bound(pts.begin(), pts.end(), u,
                                   [](double x, const auto& p) { return x < p.first; });
        std::size_t k = static_cast<std::size_t>(it - pts.begin());
        k = std::clamp<std::size_t>(k, 1, pts.size() - 1);
        return (pts[k].second - pts[k - 1].second) / (pts[k].first - pts[k - 1].first);
    }
    return horner(dpoly_, u);
}

double NonlinearitySpec::base_F(double u) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&variant_)) {
        const auto& pts = pl->points;
        // G(x) = integral of f from pts[0].first to x, exact on each linear piece.
        auto G = [&](double x) {
            auto it = std::upper_bound(pts.begin(), pts.end(), x,
                                       [](double y, const auto& p) { return y < p.first; });
            std::size_t k = static_cast<std::size_t>(it - pts.begin());
            k = std::clamp<std::size_t>(k, 1, pts.size() - 1);
            const double u0 = pts[k - 1].first;
            const double f0 = pts[k - 1].second;
            const double fx = base_f(x);
            return pl_cumulative_[k - 1] + 0.5 * (f0 + fx) * (x - u0);
        };
        if (u == 0.0) return 0.0;
        return G(u) - G(0.0);
    }
    return horner(ipoly_, u);
}

double NonlinearitySpec::blend_integral(double from, double to) const {
    auto integrand = [this](double s) { return f(s); };
    if (from == to) return 0.0;
    if (const auto* pl = std::get_if<PiecewiseLinear>(&variant_)) {
        // Split at breakpoints so every panel is smooth.
        std::vector<double> cuts{from, to};
        const double lo = std::min(from, to), hi = std::max(from, to);
        for (const auto& p : pl->points)
            if (p.first > lo && p.first < hi) cuts.push_back(p.first);
        std::sort(cuts.begin(), cuts.end());
        double total = 0.0;
        for (std::size_t i = 1; i < cuts.size(); ++i)
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i - 1],
                                                                                  cuts[i], 15, 1e-12);
        return from < to ? total : -total;
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, from, to, 15, 1e-12);
}

double NonlinearitySpec::f(double u) const {
    require_finite(u, "eval_f");
    const double p = base_f(u);
    if (!kappa_) return p;
    double w = (std::fabs(u) - *kappa_) / blend_;
    w = w < 0.0 ? 0.0 : w;
    w = w > 1.0 ? 1.0 : w;
    if (w >= 1.0) return 0.5 * u;
    return (1.0 - w) * p + w * (0.5 * u);
}

double NonlinearitySpec::df(double u) const {
    require_finite(u, "eval_df");
    const double dp = base_df(u);
    if (!kappa_) return dp;
    double w = (std::fabs(u) - *kappa_) / blend_;
    w = w < 0.0 ? 0.0 : w;
    w = w > 1.0 ? 1.0 : w;
    if (w >= 1.0) return 0.5;
    const double inv = 1.0 / blend_;
    const double dw = (w > 0.0) ? (u < 0.0 ? -inv : inv) : 0.0;
    return ((1.0 - w) * dp + w * 0.5) + dw * (0.5 * u - base_f(u));
}

double NonlinearitySpec::F(double u) const {
    require_finite(u, "eval_F");
    if (!kappa_ || std::fabs(u) <= *kappa_) return base_F(u);
    const double k = *kappa_;
    const double outer = k + blend_;
    const double sgn = u < 0.0 ? -1.0 : 1.0;
    const double edge = sgn * k;
    double total = base_F(edge);
    const double a = std::fabs(u);
    if (a <= outer) return total + blend_integral(edge, u);
    total += blend_integral(edge, sgn * outer);
    return total + 0.25 * (u * u - outer * outer);
}

double eval_f(const NonlinearitySpec& spec, double u) { return spec.f(u); }
double eval_F(const NonlinearitySpec& spec, double u) { return spec.F(u); }

double lipschitz_bound(const NonlinearitySpec& spec, double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("lipschitz_bound: requires lo < hi");
    double best = 0.0;
    auto core_bound = [&](double a, double b) {
        if (!(a < b)) return;
        if (const auto* pl = std::get_if<PiecewiseLinear>(&spec.variant())) {
            const auto& pts = pl->points;
            for (std::size_t k = 1; k < pts.size(); ++k) {
                const double seg_lo = (k == 1) ? -INFINITY : pts[k - 1].first;
                const double seg_hi = (k + 1 == pts.size()) ? INFINITY : pts[k].first;
                if (seg_hi < a || seg_lo > b) continue;
                const double slope = (pts[k].second - pts[k - 1].second) / (pts[k].first - pts[k - 1].first);
                best = std::max(best, std::fabs(slope));
            }
            return;
        }
        const auto& c = spec.poly_coeffs();
        if (c.size() < 2) return;
        std::vector<double> d1, d2;
        for (std::size_t k = 1; k < c.size(); ++k) d1.push_back(static_cast<double>(k) * c[k]);
        for (std::size_t k = 1; k < d1.size(); ++k) d2.push_back(static_cast<double>(k) * d1[k]);
        best = std::max({best, std::fabs(horner(d1, a)), std::fabs(horner(d1, b))});
        if (d2.empty()) return;
        // Interior extrema of f' sit at roots of f''.
        auto g = [&](double x) { return horner(d2, x); };
        for (const auto& r : detail::scan_roots(g, a, b, 10000, 1e-14, 1e-12))
            best = std::max(best, std::fabs(horner(d1, r.x)));
    };
    auto blend_bound = [&](double a, double b) {
        if (!(a < b)) return;
        constexpr int kCells = 10000;
        for (int i = 0; i <= kCells; ++i) {
            const double x = a + (b - a) * static_cast<double>(i) / kCells;
            best = std::max(best, std::fabs(spec.df(x)));
        }
    };
    const auto kappa = spec.kappa();
    if (!kappa) {
        core_bound(lo, hi);
        return best;
    }
    const double k = *kappa, outer = k + spec.blend_width();
    core_bound(std::max(lo, -k), std::min(hi, k));
    blend_bound(std::max(lo, k), std::min(hi, outer));
    blend_bound(std::max(lo, -outer), std::min(hi, -k));
    if (hi > outer || lo < -outer) best = std::max(best, 0.5);
    return best;
}

double default_kappa(double sup_abs_u0) { return 2.0 * (sup_abs_u0 + 1.0); }

nlohmann::json NonlinearitySpec::to_json() const {
    nlohmann::json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ZeroReaction>) {
                j["variant"] = "zero";
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                j["variant"] = "polynomial";
                j["coeffs"] = v.coeffs;
            } else if constexpr (std::is_same_v<T, CubicBistable>) {
                j["variant"] = "cubic_bistable";
                j["roots"] = {v.a, v.gamma, v.b};
            } else {
                j["variant"] = "piecewise_linear";
                nlohmann::json pts = nlohmann::json::array();
                for (const auto& [u, fu] : v.points) pts.push_back({u, fu});
                j["points"] = pts;
            }
        },
        variant_);
    if (kappa_) {
        j["kappa"] = *kappa_;
        j["blend_width"] = blend_;
    }
    return j;
}

NonlinearitySpec NonlinearitySpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("spec", "expected an object");
    if (!j.contains("variant") || !j["variant"].is_string())
        throw ConfigError("spec.variant", "missing or not a string");
    const std::string name = j["variant"].get<std::string>();
    auto numbers = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) throw ConfigError(std::string("spec.") + key, "expected an array");
        std::vector<double> out;
        for (const auto& e : j[key]) {
            if (!e.is_number()) throw ConfigError(std::string("spec.") + key, "expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    };
    std::optional<double> kappa, blend;
    if (j.contains("kappa") && !j["kappa"].is_null()) {
        if (!j["kappa"].is_number()) throw ConfigError("spec.kappa", "expected a number");
        kappa = j["kappa"].get<double>();
    }
    if (j.contains("blend_width") && !j["blend_width"].is_null()) {
        if (!j["blend_width"].is_number()) throw ConfigError("spec.blend_width", "expected a number");
        blend = j["blend_width"].get<double>();
    }
    try {
        if (name == "zero") return NonlinearitySpec(ZeroReaction{}, kappa, blend);
        if (name == "polynomial") return NonlinearitySpec(Polynomial{numbers("coeffs")}, kappa, blend);
        if (name == "cubic_bistable") {
            auto r = numbers("roots");
            if (r.size() != 3) throw ConfigError("spec.roots", "expected three roots");
            std::sort(r.begin(), r.end());
            return NonlinearitySpec(CubicBistable{r[0], r[1], r[2]}, kappa, blend);
        }
        if (name == "piecewise_linear") {
            if (!j.contains("points") || !j["points"].is_array())
                throw ConfigError("spec.points", "expected an array of [u, f] pairs");
            PiecewiseLinear pl;
            for (const auto& p : j["points"]) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError("spec.points", "expected [u, f] pairs");
                pl.points.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            return NonlinearitySpec(std::move(pl), kappa, blend);
        }
    } catch (const ArgumentError& e) {
        throw ConfigError("spec", e.what());
    }
    throw ConfigError("spec.variant", "unknown variant '" + name + "'");
}

}  // namespace rdlab
