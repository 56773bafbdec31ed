#include <doctest.h>

#include <cmath>

#include "rdlab/errors.hpp"
#include "rdlab/grid.hpp"

using namespace rdlab;

TEST_CASE("grid geometry") {
    const auto g = Grid::with_spacing(10.0, 0.1);
    CHECK(g.size() == 201);
    CHECK(g.center() == 100);
    CHECK(g.x(g.center()) == 0.0);
    CHECK(g.x(0) == doctest::Approx(-10.0));
    CHECK(g.x(200) == doctest::Approx(10.0));
    CHECK(g.nearest(0.26) == 103);
    CHECK(g.nearest(-50.0) == 0);
    CHECK(g.nearest(50.0) == 200);
    CHECK_THROWS_AS(Grid(1.0, 4), ArgumentError);
    CHECK_THROWS_AS(Grid(-1.0, 5), ArgumentError);
    CHECK_THROWS_AS(Grid::with_spacing(1.0, 0.3), ArgumentError);
}

TEST_CASE("window restriction") {
    const Grid g(5.0, 11);
    std::vector<double> v(11);
    for (std::size_t j = 0; j < 11; ++j) v[j] = g.x(j);
    const auto w = restrict_to_window(g, v, 2.0);
    CHECK(w.grid.size() == 5);
    CHECK(w.values.front() == -2.0);
    CHECK(w.values.back() == 2.0);
    CHECK(w.sup_norm() == 2.0);
}

TEST_CASE("front has alpha on the left and beta on the right") {
    const auto g = Grid::with_spacing(30.0, 0.1);
    const auto d = make_initial(initial::Front{2.0, -1.0, 0.5, 1.0}, g);
    CHECK(d.alpha == 2.0);
    CHECK(d.beta == -1.0);
    CHECK(d.profile.values.front() == 2.0);
    CHECK(d.profile.values.back() == -1.0);
    CHECK(d.profile.values[g.nearest(1.0)] == doctest::Approx(0.5));
    CHECK(d.far_field_deviation < 1e-10);
    CHECK(d.hypothesis_ok());
    CHECK(family_name(initial::Front{}) == "front");
}

TEST_CASE("bump and plateaus") {
    const auto g = Grid::with_spacing(40.0, 0.25);
    const auto b = make_initial(initial::Bump{0.5, 1.0, 2.0}, g);
    CHECK(b.profile.values[g.nearest(1.0)] == doctest::Approx(0.5));
    CHECK(b.profile.values[g.nearest(3.0)] == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK_FALSE(b.hypothesis_ok());

    const auto p = make_initial(initial::Plateaus{{{4.0, 8.0, 1.0}, {16.0, 32.0, 1.0}}, 0.0, 0.25}, g);
    CHECK(p.profile.values[g.nearest(6.0)] == doctest::Approx(1.0));
    CHECK(p.profile.values[g.nearest(12.0)] == doctest::Approx(0.0).scale(1.0));
    CHECK(p.profile.values[g.nearest(24.0)] == doctest::Approx(1.0));
    CHECK(p.profile.values[g.nearest(-6.0)] == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(make_initial(initial::Plateaus{{{4.0, 8.0, 1.0}, {7.0, 9.0, 1.0}}, 0.0, 0.25}, g), ArgumentError);
    CHECK_THROWS_AS(make_initial(initial::Samples{{1.0, 2.0}}, g), ArgumentError);
}
