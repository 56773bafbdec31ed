#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "rdlab/kernels.hpp"

using namespace rdlab;

namespace {

std::vector<double> random_values(std::size_t n, double scale, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels match direct formulas") {
    const auto& k = kernels::table(kernels::Isa::Scalar);
    const std::vector<double> c{0.0, 1.0, 0.0, -1.0}, dc{1.0, 0.0, -3.0};
    kernels::PolyReaction pr{c, dc};
    std::vector<double> u{-2.0, -0.5, 0.0, 0.25, 3.0}, out(u.size());
    k.reaction(pr, u, out);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(out[i] == doctest::Approx(u[i] - u[i] * u[i] * u[i]));
    k.reaction_slope(pr, u, out);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(out[i] == doctest::Approx(1.0 - 3.0 * u[i] * u[i]));

    std::vector<double> q{0.0, 1.0, 4.0, 9.0, 16.0}, d2(q.size());
    k.second_difference(q, 1.0, d2);
    CHECK(d2.front() == 0.0);
    CHECK(d2.back() == 0.0);
    for (std::size_t j = 1; j + 1 < q.size(); ++j) CHECK(d2[j] == 2.0);
    CHECK(k.max_abs(u) == 3.0);
    CHECK(k.max_abs_diff(u, q) == 13.0);
}

TEST_CASE("coercive blend reaches u/2") {
    const auto& k = kernels::table(kernels::Isa::Scalar);
    const std::vector<double> c{0.0, 1.0, 0.0, -1.0}, dc{1.0, 0.0, -3.0};
    kernels::PolyReaction pr{c, dc, true, 2.0, 1.0};
    std::vector<double> u{3.0, -5.0, 2.5}, out(3);
    k.reaction(pr, u, out);
    CHECK(out[0] == 1.5);
    CHECK(out[1] == -2.5);
    CHECK(out[2] == doctest::Approx(0.5 * (2.5 - 2.5 * 2.5 * 2.5) + 0.5 * 1.25));
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
    if (!kernels::supported(kernels::Isa::Avx2)) {
        MESSAGE("AVX2 not available on this host");
        return;
    }
    const auto& s = kernels::table(kernels::Isa::Scalar);
    const auto& v = kernels::table(kernels::Isa::Avx2);
    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 33u, 1001u}) {
        CAPTURE(n);
        const auto u = random_values(n, 4.0, 7 + static_cast<unsigned>(n));
        const auto w = random_values(n, 1.0, 11 + static_cast<unsigned>(n));
        const std::vector<double> c{0.3, 1.0, -0.2, -1.0, 0.05}, dc{1.0, -0.4, -3.0, 0.2};
        for (bool coercive : {false, true}) {
            kernels::PolyReaction pr{c, dc, coercive, 1.5, 0.75};
            std::vector<double> a(n), b(n);
            s.reaction(pr, u, a);
            v.reaction(pr, u, b);
            CHECK(same_bits(a, b));
            s.reaction_slope(pr, u, a);
            v.reaction_slope(pr, u, b);
            CHECK(same_bits(a, b));
            s.explicit_update(pr, 0.01, u, a);
            v.explicit_update(pr, 0.01, u, b);
            CHECK(same_bits(a, b));
        }
        std::vector<double> a(n), b(n);
        s.second_difference(u, 400.0, a);
        v.second_difference(u, 400.0, b);
        CHECK(same_bits(a, b));
        s.axpy(u, -0.37, w, a);
        v.axpy(u, -0.37, w, b);
        CHECK(same_bits(a, b));
        CHECK(s.max_abs(u) == v.max_abs(u));
        CHECK(s.max_abs_diff(u, w) == v.max_abs_diff(u, w));
    }
}

TEST_CASE("empty coefficient list is the zero reaction") {
    for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
        if (!kernels::supported(isa)) continue;
        const auto& k = kernels::table(isa);
        kernels::PolyReaction pr{};
        std::vector<double> u{1.0, -2.0, 3.0, 4.0, 5.0}, out(5, 9.0);
        k.reaction(pr, u, out);
        for (double x : out) CHECK(x == 0.0);
    }
}
