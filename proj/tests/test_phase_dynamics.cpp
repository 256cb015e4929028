#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"

#include "hjgame/phase_dynamics.hpp"

using namespace hjgame;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double rel_err(const Vec2& a, const Vec2& b) { return norm(a - b) / std::max(1.0, norm(b)); }

// Closed-form eigenvalues and residual of H v = lambda v, without using the
// library's eigen routine.
bool is_eigenpair(const Vec2& k, const Vec2& v, double lambda, double tol) {
    const Vec2 hv{(k.c1 - k.c2) * v.c1 + k.c1 * v.c2, k.c2 * v.c1 + (k.c2 - k.c1) * v.c2};
    return norm(hv - lambda * v) <= tol * std::max(1.0, std::abs(lambda) * norm(v));
}

} // namespace

TEST_CASE("capital_delta examples") {
    CHECK(capital_delta({0, 0}) == 0.0);
    CHECK(capital_delta({1, 1}) == 3.0);
    CHECK(capital_delta({1, -1}) == 1.0);
    CHECK(capital_delta({1, 2}) == 7.0);
}

TEST_CASE("capital_delta lies between half and twice |p|^2") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 100000; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const double d = capital_delta(p);
        const double n2 = p.c1 * p.c1 + p.c2 * p.c2;
        REQUIRE(0.5 * n2 <= d * (1 + 1e-12));
        REQUIRE(d <= 2.0 * n2 * (1 + 1e-12));
    }
}

TEST_CASE("vector_field examples and equilibria") {
    CHECK(vector_field({0, 0}, {3, -1}) == Vec2{0, 0});
    CHECK(vector_field({1, 0}, {1, 1}) == Vec2{-1, 1});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 k{u(rng), u(rng)};
        REQUIRE(vector_field(k, k) == Vec2{0, 0});
    }
}

TEST_CASE("linearization examples") {
    const auto e11 = linearization({1, 1});
    CHECK_THAT(e11.lambda_plus, WithinAbs(1.0, 1e-15));
    CHECK_THAT(e11.lambda_minus, WithinAbs(-1.0, 1e-15));
    CHECK(rel_err(e11.v_minus, {1, -1}) < 1e-15);
    CHECK(rel_err(e11.v_plus, {1, 1}) < 1e-15);

    const auto e1m = linearization({1, -1});
    CHECK_THAT(e1m.lambda_plus, WithinRel(std::sqrt(3.0), 1e-15));
    CHECK_THAT(e1m.v_minus.c2, WithinAbs(-2.0 - std::sqrt(3.0), 1e-14));
    CHECK_THAT(e1m.v_plus.c2, WithinAbs(-2.0 + std::sqrt(3.0), 1e-14));

    const auto e01 = linearization({0, 1});
    CHECK_THAT(e01.lambda_plus, WithinAbs(1.0, 1e-15));
    CHECK(is_eigenpair({0, 1}, e01.v_minus, -1.0, 1e-14));
    CHECK(is_eigenpair({0, 1}, e01.v_plus, 1.0, 1e-14));
    CHECK_THAT(norm(e01.v_plus), WithinAbs(1.0, 1e-15));
    CHECK(e01.v_plus.c2 >= 0.0);
    CHECK(std::isnan(e01.alpha));

    try {
        linearization({0, 0});
        FAIL("expected ZeroSlopePair");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroSlopePair);
    }
}

TEST_CASE("eigen-structure holds for random slopes") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 10000; ++i) {
        Vec2 k{u(rng), u(rng)};
        if (i % 100 == 0) k.c1 = 0.0;
        if (k == Vec2{0, 0}) continue;
        const auto e = linearization(k);
        const double lam = std::sqrt(k.c1 * k.c1 + k.c2 * k.c2 - k.c1 * k.c2);
        REQUIRE(e.lambda_minus < 0.0);
        REQUIRE(e.lambda_plus > 0.0);
        REQUIRE_THAT(e.lambda_plus, WithinRel(lam, 1e-14));
        REQUIRE(e.lambda_minus == -e.lambda_plus);
        REQUIRE(is_eigenpair(k, e.v_minus, e.lambda_minus, 1e-10));
        REQUIRE(is_eigenpair(k, e.v_plus, e.lambda_plus, 1e-10));
        if (k.c1 > 0.0) {
            const double a = k.c2 / k.c1;
            const auto mm = a > 0 ? DirectionMap::GMinus : DirectionMap::gMinus;
            const auto mp = a > 0 ? DirectionMap::GPlus : DirectionMap::gPlus;
            if (a != 0.0) {
                REQUIRE_THAT(e.v_minus.c2, WithinAbs(direction_map(mm, a), 1e-12 * (1 + std::abs(e.v_minus.c2))));
                REQUIRE_THAT(e.v_plus.c2, WithinAbs(direction_map(mp, a), 1e-12 * (1 + std::abs(e.v_plus.c2))));
            }
        }
    }
}

TEST_CASE("direction maps: values, ranges, monotonicity, limits") {
    CHECK_THAT(direction_map(DirectionMap::GMinus, 1.0), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(direction_map(DirectionMap::GPlus, 1.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(direction_map(DirectionMap::GMinus, 0.5), WithinAbs(-0.5 - std::sqrt(0.75), 1e-15));
    CHECK_THAT(direction_map(DirectionMap::GMinus, 2.0), WithinAbs(1.0 - std::sqrt(3.0), 1e-15));

    CHECK_THAT(direction_map(DirectionMap::GMinus, 1e-9), WithinAbs(-2.0, 1e-6));
    CHECK_THAT(direction_map(DirectionMap::GPlus, 1e-9), WithinAbs(0.0, 1e-6));
    CHECK_THAT(direction_map(DirectionMap::GMinus, 1e9), WithinAbs(-0.5, 1e-6));
    CHECK_THAT(direction_map(DirectionMap::gPlus, -1e9), WithinAbs(-0.5, 1e-6));
    CHECK_THAT(direction_map(DirectionMap::gMinus, -1e-9), WithinAbs(-2.0, 1e-6));
    CHECK_THAT(direction_map(DirectionMap::gPlus, -1e-9), WithinAbs(0.0, 1e-6));

    for (auto [m, a] : {std::pair{DirectionMap::GMinus, -1.0}, {DirectionMap::GPlus, 0.0},
                        {DirectionMap::gMinus, 1.0}, {DirectionMap::gPlus, 0.0}}) {
        try {
            direction_map(m, a);
            FAIL("expected DomainViolation");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DomainViolation);
        }
    }

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lg(-8, 8);
    for (int i = 0; i < 10000; ++i) {
        double a1 = std::pow(10.0, lg(rng)), a2 = std::pow(10.0, lg(rng));
        if (a1 == a2) continue;
        if (a1 > a2) std::swap(a1, a2);
        const double gm1 = direction_map(DirectionMap::GMinus, a1), gm2 = direction_map(DirectionMap::GMinus, a2);
        const double gp1 = direction_map(DirectionMap::GPlus, a1), gp2 = direction_map(DirectionMap::GPlus, a2);
        REQUIRE(gm1 < gm2);
        REQUIRE(gp1 < gp2);
        REQUIRE((gm1 > -2.0 && gm2 < -0.5));
        REQUIRE(gp1 > 0.0);
        // negative domain: -a2 < -a1
        const double lm1 = direction_map(DirectionMap::gMinus, -a2), lm2 = direction_map(DirectionMap::gMinus, -a1);
        const double lp1 = direction_map(DirectionMap::gPlus, -a2), lp2 = direction_map(DirectionMap::gPlus, -a1);
        REQUIRE(lm1 < lm2);
        REQUIRE(lp1 < lp2);
        REQUIRE(lm2 < -2.0);
        REQUIRE((lp1 > -0.5 && lp2 < 0.0));
    }
}
