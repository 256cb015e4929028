#include <cmath>
#include <cstring>
#include <random>

#include "catch_amalgamated.hpp"

#include "hjgame/builders.hpp"
#include "hjgame/io.hpp"

using namespace hjgame;
using Catch::Matchers::WithinAbs;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_CASE("fmt gives the shortest round-tripping form") {
    CHECK(io::fmt(0.1) == "0.1");
    CHECK(io::fmt(-2.0) == "-2");
    CHECK(io::fmt(1e-300) == "1e-300");
    CHECK(io::fmt(std::numeric_limits<double>::infinity()) == "inf");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
        REQUIRE(same_bits(std::stod(io::fmt(v)), v));
    }
}

TEST_CASE("fnv1a known values") {
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(io::hex64(0xabcull) == "0000000000000abc");
}

TEST_CASE("spec round trip is bit exact") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
        CostSpec s;
        const int n = i % 4;
        double b = u(rng);
        for (int k = 0; k < n; ++k) {
            s.breakpoints.push_back(b);
            b += 0.1 + std::abs(u(rng));
        }
        for (int k = 0; k <= n; ++k) s.slopes.push_back({u(rng), u(rng)});
        s.offsets = {u(rng), u(rng)};
        s = validate_spec(s);
        const std::string text = io::serialize_spec(s);
        const CostSpec back = io::parse_spec(text);
        REQUIRE(back.breakpoints.size() == s.breakpoints.size());
        for (std::size_t k = 0; k < s.breakpoints.size(); ++k) REQUIRE(same_bits(back.breakpoints[k], s.breakpoints[k]));
        for (std::size_t k = 0; k < s.slopes.size(); ++k) {
            REQUIRE(same_bits(back.slopes[k].c1, s.slopes[k].c1));
            REQUIRE(same_bits(back.slopes[k].c2, s.slopes[k].c2));
        }
        REQUIRE(same_bits(back.offsets.c1, s.offsets.c1));
        REQUIRE(io::serialize_spec(back) == text);
    }
}

TEST_CASE("config parsing") {
    const auto s = io::parse_spec(R"({"breakpoints":[0],"slopes":[[1,2],[2,1]]})");
    CHECK(s.offsets == Vec2{0, 0});
    CHECK(code_of([] { io::parse_spec("{bad"); }) == ErrorCode::ConfigParse);
    CHECK(code_of([] { io::parse_spec("[1,2]"); }) == ErrorCode::ConfigParse);
    CHECK(code_of([] { io::parse_spec(R"({"breakpoints":[0],"slopes":[[1,2,3],[2,1]]})"); }) ==
          ErrorCode::ConfigParse);
    CHECK(code_of([] { io::parse_spec(R"({"breakpoints":["a"],"slopes":[[1,2],[2,1]]})"); }) ==
          ErrorCode::ConfigParse);
    // Well-formed JSON but an invalid spec.
    CHECK(code_of([] { io::parse_spec(R"({"breakpoints":[0],"slopes":[[1,2]]})"); }) != ErrorCode::ConfigParse);
    CHECK(code_of([] { io::read_file("/nonexistent/dir/file.json"); }) == ErrorCode::Io);
}

TEST_CASE("orbit CSV has the header, one row per sample and the termination trailer") {
    StopConditions st;
    st.s_span = 1.0;
    const Orbit o = integrate({0.5, 0.5}, {1, 2}, Direction::Forward, st);
    const std::string csv = io::orbit_csv(o);
    CHECK(csv.rfind("s,p1,p2,x,delta\n", 0) == 0);
    CHECK(csv.find("# termination=" + to_string(o.termination) + "\n") != std::string::npos);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == o.size() + 2);
}

TEST_CASE("solution CSV and metadata load back into an equivalent solution") {
    const auto spec = validate_spec({{0}, {{-2, 1}, {-1, 2}}, {0.5, -0.25}});
    const auto sol = build_conflicting_family(spec, {-0.05, 0.05});
    const std::string csv = io::solution_csv(sol);
    const io::json meta = io::json::parse(io::solution_json(sol).dump());
    const auto back = io::load_solution(csv, meta);

    CHECK(back.regime == sol.regime);
    CHECK(back.spec.offsets == spec.offsets);
    CHECK(back.left_tail.kind == sol.left_tail.kind);
    CHECK(back.left_tail.value == sol.left_tail.value);
    CHECK(back.right_tail.value == sol.right_tail.value);
    REQUIRE(back.profile.size() == sol.profile.size());
    for (std::size_t i = 0; i < sol.profile.size(); ++i) {
        REQUIRE(same_bits(back.profile[i].x, sol.profile[i].x));
        REQUIRE(back.profile[i].u == sol.profile[i].u);
    }
    for (double x = -3.0; x <= 3.0; x += 0.0137) {
        REQUIRE(norm(back.p_at(x) - sol.p_at(x)) < 1e-3);
    }
    CHECK(norm(back.p_at(100.0) - spec.slopes[1]) < 1e-9);
    CHECK(io::solution_csv(back) == csv);

    // Without a stored spec the fallback is used, and without either it fails.
    io::json bare = meta;
    bare.erase("spec");
    CHECK(io::load_solution(csv, bare, spec).spec.slopes == spec.slopes);
    CHECK(code_of([&] { io::load_solution(csv, bare); }) == ErrorCode::ConfigParse);
    CHECK(code_of([&] { io::load_solution("x,y\n1,2\n", meta); }) == ErrorCode::ConfigParse);
    CHECK(code_of([&] { io::load_solution("x,p1,p2,u1,u2,piece_index\n1,2,3\n", meta); }) ==
          ErrorCode::ConfigParse);
}

TEST_CASE("jump rows split the loaded profile") {
    const auto spec = validate_spec({{}, {{1, 2}}, {}});
    constexpr double inf = std::numeric_limits<double>::infinity();
    AdmissibleSolution sol;
    sol.spec = spec;
    sol.pieces.push_back(Piece::constant(spec.slopes[0], {1, 2}, -inf, 0.0));
    sol.pieces.push_back(Piece::constant(spec.slopes[0], {-1, -2}, 0.0, inf));
    sol.jumps.push_back({0.0, {1, 2}, {-1, -2}});
    sol.left_tail = {TailKind::Constant, {1, 2}};
    sol.right_tail = {TailKind::Constant, {-1, -2}};
    sol = finalize(sol);
    const auto back = io::load_solution(io::solution_csv(sol), io::solution_json(sol));
    REQUIRE(back.jumps.size() == 1);
    CHECK(back.jumps[0].right == Vec2{-1, -2});
    CHECK(back.pieces.size() == 2);
    CHECK(back.p_at(-0.5) == Vec2{1, 2});
    CHECK(back.p_at(0.5) == Vec2{-1, -2});
}

TEST_CASE("serialized solutions are reproducible") {
    const auto spec = validate_spec({{0, 1}, {{1, 2}, {2, 1}, {1, 3}}, {}});
    const auto a = build_cooperative(spec);
    const auto b = build_cooperative(spec);
    CHECK(io::solution_csv(a) == io::solution_csv(b));
    CHECK(io::solution_json(a).dump(2) == io::solution_json(b).dump(2));
}
