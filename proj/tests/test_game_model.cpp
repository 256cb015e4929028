#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"

#include "hjgame/game_model.hpp"

using namespace hjgame;
using Catch::Matchers::WithinAbs;

namespace {

CostSpec make(std::vector<double> b, std::vector<Vec2> k, Vec2 off = {}) {
    return validate_spec({std::move(b), std::move(k), off});
}

Vec2 polar(double deg) {
    const double t = deg * std::numbers::pi / 180.0;
    return {std::cos(t), std::sin(t)};
}

// Expected verdict for one breakpoint and open sectors a (left), b (right).
Regime table(int a, int b, double alpha0, double alpha1) {
    auto in = [](int s, std::initializer_list<int> set) {
        for (int v : set) if (v == s) return true;
        return false;
    };
    if ((in(a, {1, 2}) && in(b, {1, 2})) || (in(a, {5, 6}) && in(b, {5, 6}))) return Regime::CooperativeUnique;
    if ((a == 4 && b == 3) || (a == 7 && b == 8)) return Regime::ConflictingMany;
    if ((a == 3 && b == 4) || (a == 8 && b == 7)) return Regime::ConflictingNone;
    if (in(a, {5, 6}) && in(b, {1, 2}) && alpha0 != alpha1) return Regime::MixedMany;
    return Regime::UnsupportedCombination;
}

} // namespace

TEST_CASE("validate_spec accepts and rejects") {
    CHECK_NOTHROW(make({}, {{1, 1}}));
    CHECK_NOTHROW(make({0}, {{-2, 1}, {-1, 2}}));
    CHECK_THROWS_MATCHES(make({1, 0}, {{1, 1}, {1, 1}, {1, 1}}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == ErrorCode::NonIncreasingBreakpoints;
                         }));
    try {
        make({0}, {{1, 1}, {0, 0}});
        FAIL("expected ZeroSlopePair");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroSlopePair);
    }
    try {
        make({0}, {{1, 1}, {NAN, 1}});
        FAIL("expected NonFiniteEntry");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteEntry);
    }
    try {
        make({0}, {{1, 1}});
        FAIL("expected SlopeCountMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SlopeCountMismatch);
    }
}

TEST_CASE("eval_cost integrates the slopes from the offset") {
    const auto one = make({}, {{1, 1}});
    CHECK(eval_cost(one, Player::One, 2.0) == 2.0);
    const auto many = make({0}, {{-2, 1}, {-1, 2}});
    CHECK(eval_cost(many, Player::One, 1.0) == -1.0);
    CHECK(eval_cost(many, Player::One, -1.0) == 2.0);
    CHECK(eval_cost(many, Player::Two, -1.0) == -1.0);
    const auto off = make({0, 1}, {{1, 2}, {2, 1}, {1, 3}}, {0.5, -1});
    CHECK_THAT(eval_cost(off, Player::Two, 3.0), WithinAbs(-1.0 + 1.0 + 3.0 * 2.0, 1e-15));
    CHECK_THAT(eval_cost(off, Player::One, -2.0), WithinAbs(0.5 - 2.0, 1e-15));
}

TEST_CASE("eval_cost is Lipschitz with the largest slope") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> b{u(rng), u(rng), u(rng)};
        std::sort(b.begin(), b.end());
        std::vector<Vec2> k{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        const auto spec = make(b, k);
        for (Player pl : {Player::One, Player::Two}) {
            double bound = 0.0;
            for (const auto& kk : k) bound = std::max(bound, std::abs(kk[index_of(pl)]));
            for (int i = 0; i < 200; ++i) {
                const double x = 2 * u(rng), y = 2 * u(rng);
                if (x == y) continue;
                const double q = std::abs(eval_cost(spec, pl, x) - eval_cost(spec, pl, y)) / std::abs(x - y);
                REQUIRE(q <= bound * (1 + 1e-12) + 1e-12);
            }
        }
    }
}

TEST_CASE("classify_sector on examples and boundaries") {
    CHECK(classify_sector({1, 2}).index == 2);
    CHECK(classify_sector({-2, 1}).index == 4);
    CHECK(classify_sector({1, 1}).is_boundary());
    CHECK(classify_sector({0, 0}).is_boundary());
    CHECK(classify_sector({0, 3}).is_boundary());
    CHECK(classify_sector({-1, 0}).is_boundary());
    CHECK(classify_sector({1, -1}).is_boundary());
    CHECK(classify_sector({1, -2}).index == 7);
    CHECK(classify_sector({2, -1}).index == 8);
}

TEST_CASE("classify_sector does not depend on the radius") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> th(0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> lr(-6, 6);
    for (int i = 0; i < 10000; ++i) {
        const double t = th(rng);
        const Vec2 d{std::cos(t), std::sin(t)};
        const Sector s = classify_sector(d);
        const double r = std::pow(10.0, lr(rng));
        REQUIRE(classify_sector(r * d) == s);
    }
}

TEST_CASE("classify_regime examples") {
    CHECK(classify_regime(make({0, 1}, {{1, 2}, {2, 1}, {1, 3}})).regime == Regime::CooperativeUnique);
    CHECK(classify_regime(make({0}, {{-2, 1}, {-1, 2}})).regime == Regime::ConflictingMany);
    CHECK(classify_regime(make({0}, {{-1, 2}, {-2, 1}})).regime == Regime::ConflictingNone);
    CHECK(classify_regime(make({0}, {{-2, -1}, {1, 2}})).regime == Regime::MixedMany);
    CHECK(classify_regime(make({0}, {{-1, -2}, {1, 2}})).regime == Regime::UnsupportedCombination);
    CHECK(classify_regime(make({}, {{1, 1}})).regime == Regime::CooperativeUnique);
    CHECK(classify_regime(make({0}, {{-1, 1}, {-1, 2}})).regime == Regime::UnsupportedBoundary);
    CHECK(classify_regime(make({0}, {{0, 1}, {1, 2}})).regime == Regime::UnsupportedBoundary);
    CHECK(classify_regime(make({0, 1}, {{-2, 1}, {-1, 2}, {-2, 1}})).regime == Regime::UnsupportedCombination);
}

TEST_CASE("classify_regime matches the table on all 8x8 sector pairs") {
    for (int a = 1; a <= 8; ++a) {
        for (int b = 1; b <= 8; ++b) {
            const Vec2 k0 = 2.0 * polar((a - 1) * 45.0 + 20.0);
            const Vec2 k1 = 3.0 * polar((b - 1) * 45.0 + 25.0);
            REQUIRE(classify_sector(k0).index == a);
            REQUIRE(classify_sector(k1).index == b);
            const auto rr = classify_regime(make({0}, {k0, k1}));
            INFO("sectors " << a << "," << b);
            CHECK(rr.regime == table(a, b, k0.c2 / k0.c1, k1.c2 / k1.c1));
            CHECK(rr.per_interval_sectors.size() == 2);
            CHECK_FALSE(rr.notes.empty());
        }
    }
}

TEST_CASE("classify_regime ignores a common shift of the breakpoints") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 500; ++i) {
        const Vec2 k0{u(rng), u(rng)}, k1{u(rng), u(rng)};
        const double shift = 10 * u(rng);
        CHECK(classify_regime(make({0}, {k0, k1})).regime == classify_regime(make({shift}, {k0, k1})).regime);
    }
}
