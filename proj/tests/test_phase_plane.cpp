#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/ellint_1.hpp>

#include "rdlab/errors.hpp"
#include "rdlab/phase_plane.hpp"

using namespace rdlab;

namespace {
const auto bistable = NonlinearitySpec::polynomial({0.0, 1.0, 0.0, -1.0});   // u - u^3
const auto monostable = NonlinearitySpec::polynomial({0.0, -1.0, 0.0, 1.0}); // -u + u^3

// u'' + u - u^3 = 0 has u = a sn(w x, m) with m = a^2 / (2 - a^2), w^2 = 1 - a^2/2.
double duffing_period(double a) {
    const double m = a * a / (2.0 - a * a);
    const double w = std::sqrt(1.0 - a * a / 2.0);
    return 4.0 * boost::math::ellint_1(std::sqrt(m)) / w;
}
}  // namespace

TEST_CASE("equilibria of the bistable cubic") {
    const auto eq = find_equilibria(bistable, -3.0, 3.0);
    REQUIRE(eq.roots.size() == 3);
    CHECK(eq.roots[0] == doctest::Approx(-1.0));
    CHECK(eq.roots[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(eq.roots[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(find_equilibria(NonlinearitySpec::zero(), -1.0, 1.0), DegenerateError);
}

TEST_CASE("double root is flagged tangential") {
    const auto s = NonlinearitySpec::polynomial({0.0, 0.0, 1.0});  // u^2
    const auto eq = find_equilibria(s, -1.0, 1.0);
    REQUIRE(eq.roots.size() == 1);
    CHECK(eq.tangential[0]);
}

TEST_CASE("turning points of F = c") {
    const auto tp = turning_points(bistable, 0.25 - 1e-3, -2.0, 2.0);
    // F(u) = u^2/2 - u^4/4 equals c twice on each side: two inside (-1, 1) and two outside.
    CHECK(tp.size() == 4);
}

TEST_CASE("harmonic period is 2 pi") {
    const auto lin = NonlinearitySpec::polynomial({0.0, 1.0});
    for (double p : {0.1, 1.0, 5.0}) CHECK(minimal_period(lin, p) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("Duffing period matches the elliptic integral") {
    for (double a : {0.1, 0.5, 0.9, 0.99}) {
        CAPTURE(a);
        CHECK(minimal_period(bistable, -a) == doctest::Approx(duffing_period(a)).epsilon(1e-8));
    }
}

TEST_CASE("period grows without bound toward the separatrix") {
    double prev = 0.0;
    for (double a : {0.5, 0.9, 0.99, 0.999, 0.9999}) {
        const double T = minimal_period(bistable, a);
        CHECK(T > prev);
        prev = T;
    }
    CHECK(prev > 25.0);
    CHECK_THROWS_AS(minimal_period(bistable, 1.0), ArgumentError);
}

TEST_CASE("orbit classification") {
    CHECK(std::holds_alternative<orbit::Equilibrium>(classify_orbit(bistable, {1.0, 0.0})));
    CHECK(std::holds_alternative<orbit::Periodic>(classify_orbit(bistable, {0.0, 0.5})));

    const auto het = classify_orbit(bistable, {0.0, std::sqrt(0.5)});
    REQUIRE(std::holds_alternative<orbit::Heteroclinic>(het));
    CHECK(std::get<orbit::Heteroclinic>(het).left == doctest::Approx(-1.0));
    CHECK(std::get<orbit::Heteroclinic>(het).right == doctest::Approx(1.0));
    CHECK(heteroclinic_midpoint(bistable, std::get<orbit::Heteroclinic>(het)) == doctest::Approx(0.0).scale(1.0));

    const auto hom = classify_orbit(monostable, {std::sqrt(2.0), 0.0});
    REQUIRE(std::holds_alternative<orbit::Homoclinic>(hom));
    CHECK(std::get<orbit::Homoclinic>(hom).base == doctest::Approx(0.0).scale(1.0));
    CHECK(std::get<orbit::Homoclinic>(hom).extremum == doctest::Approx(std::sqrt(2.0)));

    const auto out = classify_orbit(bistable, {2.0, 0.0});
    CHECK(std::holds_alternative<orbit::Unresolved>(out));
    CHECK(orbit_tag(out).size() > 0);
}

TEST_CASE("profiles conserve the Hamiltonian and match closed forms") {
    const auto het = classify_orbit(bistable, {0.0, std::sqrt(0.5)});
    const auto s = orbit_profile(bistable, het, -8.0, 8.0, 0.05);
    double err = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        err = std::max(err, std::abs(s.u[i] - std::tanh(s.x[i] / std::sqrt(2.0))));
        drift = std::max(drift, std::abs(hamiltonian(bistable, {s.u[i], s.v[i]}) - s.level));
    }
    CHECK(err < 1e-6);
    CHECK(drift < 1e-9);

    const auto down = orbit_profile(bistable, het, -4.0, 4.0, 0.5, {.increasing = false});
    CHECK(down.u.front() > 0.0);
    CHECK(down.u.back() < 0.0);

    const auto per = classify_orbit(bistable, {0.3, 0.0});
    const auto ps = orbit_profile(bistable, per, 0.0, 40.0, 0.1);
    const double T = std::get<orbit::Periodic>(per).period;
    for (std::size_t i = 0; i < ps.x.size(); ++i)
        CHECK(std::abs(hamiltonian(bistable, {ps.u[i], ps.v[i]}) - ps.level) < 1e-9);
    // value at x = T equals the anchor
    const auto back = orbit_profile(bistable, per, T, T, 0.1);
    CHECK(back.u[0] == doctest::Approx(ps.u[0]).epsilon(1e-7));
}
