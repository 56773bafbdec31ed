#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rdlab/errors.hpp"
#include "rdlab/nonlinearity.hpp"

using namespace rdlab;

TEST_CASE("cubic bistable matches u - u^3") {
    const auto cubic = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
    const auto poly = NonlinearitySpec::polynomial({0.0, 1.0, 0.0, -1.0});
    for (double u = -2.0; u <= 2.0; u += 0.125) {
        CHECK(cubic.f(u) == doctest::Approx(u - u * u * u));
        CHECK(cubic.df(u) == doctest::Approx(1.0 - 3.0 * u * u));
        CHECK(cubic.F(u) == doctest::Approx(u * u / 2.0 - u * u * u * u / 4.0));
        CHECK(poly.f(u) == doctest::Approx(cubic.f(u)));
    }
}

TEST_CASE("antiderivative agrees with quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    const NonlinearitySpec specs[] = {
        NonlinearitySpec::polynomial({0.3, -1.0, 0.5, 2.0}),
        NonlinearitySpec::cubic_bistable(-0.5, 0.2, 1.5),
        NonlinearitySpec::piecewise_linear({{-1.0, 0.5}, {0.0, -0.2}, {0.7, 0.4}, {2.0, -1.0}}),
        NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).with_kappa(1.5, 0.5),
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pick(-3.0, 3.0);
    for (const auto& s : specs) {
        for (int k = 0; k < 20; ++k) {
            const double u = pick(rng);
            // split at every kink so the rule only sees smooth pieces
            double q = 0.0, a = 0.0;
            const double sign = u >= 0.0 ? 1.0 : -1.0;
            for (double kink : {0.7, 1.0, 1.5, 2.0, 4.0}) {
                const double b = std::min(kink, std::abs(u)) * sign;
                if (std::abs(b) > std::abs(a))
                    q += gauss_kronrod<double, 61>::integrate([&](double w) { return s.f(w); }, a, b, 8, 1e-14);
                a = b;
            }
            CAPTURE(u);
            CHECK(std::abs(s.F(u) - q) < 1e-10);
        }
    }
}

TEST_CASE("piecewise linear interpolates and extends") {
    const auto s = NonlinearitySpec::piecewise_linear({{0.0, 0.0}, {1.0, 2.0}, {2.0, 0.0}});
    CHECK(s.f(0.5) == doctest::Approx(1.0));
    CHECK(s.f(1.5) == doctest::Approx(1.0));
    CHECK(s.f(3.0) == doctest::Approx(-2.0));
    CHECK(s.f(-1.0) == doctest::Approx(-2.0));
    CHECK(s.F(2.0) == doctest::Approx(2.0));
    CHECK_FALSE(s.is_polynomial());
    CHECK_FALSE(s.poly_reaction().has_value());
}

TEST_CASE("coercive override replaces f by u/2") {
    const auto s = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).with_kappa(2.0, 1.0);
    CHECK(s.f(1.0) == doctest::Approx(0.0));
    CHECK(s.f(3.0) == 1.5);
    CHECK(s.f(-7.0) == -3.5);
    CHECK(s.df(5.0) == 0.5);
    // continuity across the blend
    for (double u : {2.0, 3.0, -2.0, -3.0}) {
        CHECK(s.f(u - 1e-9) == doctest::Approx(s.f(u + 1e-9)).epsilon(1e-6));
        CHECK(s.F(u - 1e-9) == doctest::Approx(s.F(u + 1e-9)).epsilon(1e-6));
    }
}

TEST_CASE("Lipschitz bound dominates sampled slopes") {
    const auto s = NonlinearitySpec::polynomial({0.0, 1.0, 0.0, -1.0});
    const double lip = lipschitz_bound(s, -1.0, 1.0);
    CHECK(lip >= 2.0);
    CHECK(lip <= 2.5);
    CHECK_THROWS_AS(lipschitz_bound(s, 1.0, 1.0), ArgumentError);
    CHECK(default_kappa(1.5) == 5.0);
}

TEST_CASE("identically zero detection") {
    CHECK(NonlinearitySpec::zero().identically_zero());
    CHECK(NonlinearitySpec::polynomial({0.0, 0.0}).identically_zero());
    CHECK_FALSE(NonlinearitySpec::polynomial({0.0, 1e-30}).identically_zero());
    CHECK_FALSE(NonlinearitySpec::zero().with_kappa(3.0).identically_zero());
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(NonlinearitySpec::cubic_bistable(1.0, 0.0, -1.0), ArgumentError);
    CHECK_THROWS_AS(NonlinearitySpec::piecewise_linear({{0.0, 1.0}}), ArgumentError);
    CHECK_THROWS_AS(NonlinearitySpec::piecewise_linear({{0.0, 1.0}, {0.0, 2.0}}), ArgumentError);
    CHECK_THROWS_AS(NonlinearitySpec::zero().with_kappa(-1.0), ArgumentError);
    CHECK_THROWS_AS(NonlinearitySpec::zero().f(std::nan("")), DomainError);
}

TEST_CASE("json round trip") {
    const auto s = NonlinearitySpec::piecewise_linear({{-1.0, 0.5}, {1.0, -0.5}}).with_kappa(4.0, 0.5);
    const auto back = NonlinearitySpec::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
    CHECK(back.f(0.3) == s.f(0.3));

    try {
        NonlinearitySpec::from_json(nlohmann::json{{"variant", "quartic"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "spec.variant");
    }
    try {
        NonlinearitySpec::from_json(nlohmann::json{{"variant", "cubic_bistable"}, {"roots", {1, 2}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "spec.roots");
    }
}
