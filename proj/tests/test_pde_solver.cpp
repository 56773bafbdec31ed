#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "rdlab/errors.hpp"
#include "rdlab/pde_solver.hpp"

using namespace rdlab;

namespace {

Profile sample(const Grid& g, auto fn) {
    Profile p{g, std::vector<double>(g.size())};
    for (std::size_t j = 0; j < g.size(); ++j) p.values[j] = fn(g.x(j));
    return p;
}

SolverConfig config(double dt, double T, Scheme scheme = Scheme::Imex) {
    SolverConfig c;
    c.dt = dt;
    c.T_end = T;
    c.scheme = scheme;
    c.snapshot_times = {0.0, T / 2.0, T};
    return c;
}

}  // namespace

TEST_CASE("heat kernel on a Gaussian") {
    const auto g = Grid::with_spacing(40.0, 0.05);
    const auto u0 = sample(g, [](double x) { return std::exp(-x * x); });
    // backward Euler diffusion is first order in dt, so IMEX needs a smaller step for the same bound
    for (auto [scheme, dt] : {std::pair{Scheme::CrankNicolsonNewton, 0.01}, std::pair{Scheme::Imex, 0.002}}) {
        const auto r = run(NonlinearitySpec::zero(), u0, config(dt, 1.0, scheme));
        REQUIRE(r.snapshots.size() == 3);
        const auto& s = r.snapshots.back();
        CHECK(s.t == doctest::Approx(1.0));
        double err = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.x(j);
            err = std::max(err, std::abs(s.u[j] - std::exp(-x * x / 5.0) / std::sqrt(5.0)));
        }
        CHECK(err < 5e-4);
    }
}

TEST_CASE("comparison principle") {
    const auto spec = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
    const auto g = Grid::with_spacing(20.0, 0.1);
    const auto lo = sample(g, [](double x) { return 0.9 * std::tanh(-x) - 0.05; });
    const auto hi = sample(g, [](double x) { return 0.9 * std::tanh(-x + 0.5) + 0.05; });
    auto cfg = config(0.01, 20.0);
    cfg.snapshot_times = {0.0, 5.0, 10.0, 20.0};
    const auto a = run(spec, lo, cfg), b = run(spec, hi, cfg);
    for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(a.snapshots[k].u[j] <= b.snapshots[k].u[j] + 1e-12);
}

TEST_CASE("invariant region between stable equilibria") {
    const auto spec = NonlinearitySpec::polynomial({0.0, 1.0, 0.0, -1.0});
    const auto g = Grid::with_spacing(30.0, 0.1);
    const auto u0 = sample(g, [](double x) { return std::sin(x) * 0.99; });
    auto cfg = config(0.01, 30.0, Scheme::CrankNicolsonNewton);
    const auto r = run(spec, Profile{g, u0.values}, cfg);
    for (const auto& s : r.snapshots)
        for (double v : s.u) CHECK(std::abs(v) <= 1.0 + 1e-12);
    CHECK(r.info.invariant_bound >= 2.0 - 1e-12);
}

TEST_CASE("end nodes follow the limit ODE") {
    const auto spec = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
    const auto g = Grid::with_spacing(15.0, 0.1);
    const auto u0 = sample(g, [](double x) { return -0.5 * std::tanh(x) + 0.1; });
    Profile p{g, u0.values};
    p.values.front() = 0.6;
    p.values.back() = -0.4;
    const auto cfg = config(0.01, 2.0);
    const auto r = run(spec, p, cfg);
    const auto [tm, tp] = solve_theta(spec, 0.6, -0.4, 2.0);
    const auto& s = r.snapshots.back();
    CHECK(s.u.front() == doctest::Approx(tm).epsilon(1e-12));
    CHECK(s.u.back() == doctest::Approx(tp).epsilon(1e-12));
    CHECK(s.theta_minus == s.u.front());
    // closed form of theta' = theta - theta^3
    auto exact = [](double t0, double t) { return t0 * std::exp(t) / std::sqrt(1.0 - t0 * t0 + t0 * t0 * std::exp(2.0 * t)); };
    CHECK(tm == doctest::Approx(exact(0.6, 2.0)).epsilon(1e-9));
    CHECK(tp == doctest::Approx(exact(-0.4, 2.0)).epsilon(1e-9));
}

TEST_CASE("standing wave stays put") {
    const auto spec = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
    const auto g = Grid::with_spacing(20.0, 0.02);
    const auto u0 = sample(g, [](double x) { return std::tanh(x / std::sqrt(2.0)); });
    Profile p{g, u0.values};
    p.values.front() = -1.0;
    p.values.back() = 1.0;
    const auto r = run(spec, p, config(0.005, 10.0, Scheme::CrankNicolsonNewton));
    double drift = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) drift = std::max(drift, std::abs(r.snapshots.back().u[j] - p.values[j]));
    CHECK(drift < 1e-4);
}

TEST_CASE("time step guard and blow-up") {
    const auto spec = NonlinearitySpec::polynomial({0.0, 1.0, 0.0, -1.0});
    const auto g = Grid::with_spacing(10.0, 0.1);
    const auto u0 = sample(g, [](double x) { return std::tanh(x); });
    CHECK_THROWS_AS(run(spec, u0, config(0.5, 1.0)), ArgumentError);

    const auto grow = NonlinearitySpec::polynomial({0.0, 0.0, 1.0});  // u^2
    const auto bump = sample(g, [](double x) { return 3.0 * std::exp(-x * x); });
    auto cfg = config(0.001, 5.0);
    cfg.blowup_limit = 50.0;
    try {
        run(grow, bump, cfg);
        FAIL("expected blow-up");
    } catch (const RunAborted& e) {
        CHECK_FALSE(e.partial.snapshots.empty());
        CHECK(e.partial.snapshots.front().t == 0.0);
    }
}

TEST_CASE("runs record the kernel table in use") {
    const auto spec = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
    const auto g = Grid::with_spacing(10.0, 0.05);
    const auto u0 = sample(g, [](double x) { return std::tanh(x); });
    const auto r = run(spec, u0, config(0.01, 1.0));
    CHECK(r.info.isa == kernels::active().isa);
    if (const char* forced = std::getenv("RDLAB_KERNELS")) CHECK(kernels::name(r.info.isa) == std::string_view(forced));
}

TEST_CASE("single standalone step") {
    const auto g = Grid::with_spacing(5.0, 0.1);
    SolverState s{0.0, sample(g, [](double x) { return std::exp(-x * x); }), 0.0, 0.0};
    s.profile.values.front() = s.profile.values.back() = 0.0;
    const auto next = step(s, config(0.01, 1.0), NonlinearitySpec::zero());
    CHECK(next.t == doctest::Approx(0.01));
    CHECK(next.profile.values[g.center()] < 1.0);
    CHECK(next.profile.values[g.center()] > 0.97);
}
