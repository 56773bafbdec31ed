#include <doctest.h>

#include <cmath>

#include "rdlab/errors.hpp"
#include "rdlab/omega_limit.hpp"

using namespace rdlab;

namespace {

const auto bistable = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0);
const auto monostable = NonlinearitySpec::polynomial({0.0, -1.0, 0.0, 1.0});

Profile sample(const Grid& g, auto fn) {
    Profile p{g, std::vector<double>(g.size())};
    for (std::size_t j = 0; j < g.size(); ++j) p.values[j] = fn(g.x(j));
    return p;
}

std::vector<Snapshot> frozen(const Profile& p, int count, double dt = 1.0) {
    std::vector<Snapshot> s;
    for (int n = 0; n < count; ++n) s.push_back({n * dt, p.values, {}, p.values.front(), p.values.back()});
    return s;
}

OmegaProfile single(const Grid& g, const Profile& p, const NonlinearitySpec& spec, OmegaOptions opts = {}) {
    auto ps = extract_omega(g, frozen(p, 10), spec, opts);
    REQUIRE(ps.size() == 1);
    classify_profile(ps[0], spec, opts);
    return ps[0];
}

}  // namespace

TEST_CASE("constant profile") {
    const auto g = Grid::with_spacing(20.0, 0.05);
    const auto op = single(g, sample(g, [](double) { return 1.0; }), bistable);
    CHECK(op.residual == 0.0);
    REQUIRE(std::holds_alternative<steady::Constant>(op.classification));
    CHECK(std::get<steady::Constant>(op.classification).value == 1.0);
    CHECK(op.cluster_size == 3);  // snapshots 7, 8, 9 fall in the last 30%
    CHECK(op.t_representative == 9.0);
}

TEST_CASE("standing wave and its shift") {
    const auto g = Grid::with_spacing(40.0, 0.01);
    for (double shift : {0.0, 1.25}) {
        CAPTURE(shift);
        const auto op = single(g, sample(g, [&](double x) { return std::tanh((x - shift) / std::sqrt(2.0)); }), bistable);
        CHECK(op.residual <= op.residual_tol);
        REQUIRE(std::holds_alternative<steady::StandingWaveShift>(op.classification));
        const auto& w = std::get<steady::StandingWaveShift>(op.classification);
        CHECK(w.left == doctest::Approx(-1.0));
        CHECK(w.right == doctest::Approx(1.0));
        CHECK(w.increasing);
        CHECK(w.shift == doctest::Approx(shift).scale(1.0).epsilon(1e-6));
    }
    const auto down = single(g, sample(g, [](double x) { return -std::tanh(x / std::sqrt(2.0)); }), bistable);
    REQUIRE(std::holds_alternative<steady::StandingWaveShift>(down.classification));
    CHECK_FALSE(std::get<steady::StandingWaveShift>(down.classification).increasing);
}

TEST_CASE("ground state and its shift") {
    const auto g = Grid::with_spacing(40.0, 0.01);
    const auto op = single(g, sample(g, [](double x) { return std::sqrt(2.0) / std::cosh(x - 0.7); }), monostable);
    REQUIRE(std::holds_alternative<steady::GroundStateShift>(op.classification));
    const auto& gs = std::get<steady::GroundStateShift>(op.classification);
    CHECK(gs.base == doctest::Approx(0.0).scale(1.0));
    CHECK(gs.extremum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(gs.shift == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("a non-stationary profile is rejected") {
    const auto g = Grid::with_spacing(20.0, 0.05);
    const auto op = single(g, sample(g, [](double x) { return std::exp(-x * x); }), bistable);
    CHECK(std::holds_alternative<steady::NonSteady>(op.classification));
    CHECK_FALSE(is_steady(op.classification));
}

TEST_CASE("zero reaction classifies without throwing") {
    const auto g = Grid::with_spacing(20.0, 0.05);
    const auto lin = single(g, sample(g, [](double x) { return 0.1 * x; }), NonlinearitySpec::zero());
    CHECK(std::holds_alternative<steady::NonSteady>(lin.classification));
    const auto flat = single(g, sample(g, [](double) { return 0.3; }), NonlinearitySpec::zero());
    CHECK(std::holds_alternative<steady::Constant>(flat.classification));
}

TEST_CASE("a seeded steady state evolves with a small residual") {
    const auto g = Grid::with_spacing(30.0, 0.02);
    auto p = sample(g, [](double x) { return std::tanh(x / std::sqrt(2.0)); });
    p.values.front() = -1.0;
    p.values.back() = 1.0;
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.T_end = 5.0;
    cfg.scheme = Scheme::CrankNicolsonNewton;
    for (int k = 0; k <= 10; ++k) cfg.snapshot_times.push_back(0.5 * k);
    const auto r = run(bistable, p, cfg);
    auto ps = extract_omega(g, r.snapshots, bistable);
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].residual <= 1e-6);
}

TEST_CASE("insufficient sampling") {
    const auto g = Grid::with_spacing(10.0, 0.1);
    CHECK_THROWS_AS(extract_omega(g, frozen(sample(g, [](double) { return 1.0; }), 2), bistable), NumericalError);
}

TEST_CASE("two alternating states give oscillation evidence") {
    const auto g = Grid::with_spacing(10.0, 0.1);
    const auto zero = sample(g, [](double) { return 0.0; }), one = sample(g, [](double) { return 1.0; });
    std::vector<Snapshot> s;
    for (int n = 0; n < 12; ++n) {
        const auto& p = (n / 2) % 2 == 0 ? zero : one;
        s.push_back({double(n), p.values, {}, 0.0, 0.0});
    }
    OmegaOptions opts;
    opts.late_fraction = 0.99;
    auto ps = extract_omega(g, s, NonlinearitySpec::zero(), opts);
    REQUIRE(ps.size() == 2);
    for (auto& p : ps) classify_profile(p, NonlinearitySpec::zero(), opts);
    CaseTag tag;
    const auto rep = verdict(ps, tag, false);
    CHECK(rep.quasiconvergent == Tri::Yes);
    CHECK(rep.convergent == Tri::No);
    REQUIRE(rep.oscillation_evidence.has_value());
    CHECK(rep.oscillation_evidence->interleaved);
    CHECK(to_json(rep)["quasiconvergent"] == "yes");
}

TEST_CASE("verdict cross-check downgrades inconsistent tags") {
    const auto g = Grid::with_spacing(40.0, 0.01);
    auto ps = extract_omega(g, frozen(sample(g, [](double x) { return std::sqrt(2.0) / std::cosh(x); }), 10), monostable);
    classify_profile(ps[0], monostable);
    REQUIRE(std::holds_alternative<steady::GroundStateShift>(ps[0].classification));
    CaseTag c1;
    c1.tag = Case::C1;
    const auto bad = verdict(ps, c1, true);
    CHECK(bad.quasiconvergent == Tri::Undetermined);
    CHECK(bad.convergent == Tri::Undetermined);
    CHECK_FALSE(bad.explanations.empty());
    CaseTag c2;
    c2.tag = Case::C2;
    const auto good = verdict(ps, c2, true);
    CHECK(good.quasiconvergent == Tri::Yes);
    CHECK(good.convergent == Tri::Yes);
    CHECK(verdict({}, c2, true).quasiconvergent == Tri::Undetermined);
}
