// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [path/to/hjgame path/to/cooperative.json]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "hjgame/hjgame.hpp"

using namespace hjgame;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Check {
    std::ostringstream why;
    bool ok = true;
    void operator()(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            why << " [failed: " << what << "]";
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const CostSpec kOne = validate_spec({{}, {{1, 1}}, {}});

Outcome c1() {
    Check ck;
    const auto sol = build_cooperative(kOne);
    double worst = 0.0;
    for (const auto& r : sol.profile) {
        worst = std::max({worst, std::abs(r.u.c1 - (r.x - 1.5)), std::abs(r.u.c2 - (r.x - 1.5))});
    }
    ck(worst <= 1e-12, "u = x - 3/2");
    ck(sol.report.hj_residual_sup <= 1e-12, "residual");
    double jerr = 0.0;
    for (double y : {-2.0, 0.0, 1.0, 5.0}) {
        const auto run = simulate_closed_loop(sol, y, 40.0);
        jerr = std::max({jerr, std::abs(run.costs.c1 - (y - 1.5)), std::abs(run.costs.c2 - (y - 1.5))});
    }
    ck(jerr <= 1e-6, "J = y - 3/2");
    ck.why << " max|u-(x-1.5)|=" << num(worst) << " residual=" << num(sol.report.hj_residual_sup)
           << " max|J-(y-1.5)|=" << num(jerr);
    return {ck.ok, ck.why.str()};
}

Outcome c2() {
    Check ck;
    const auto spec = validate_spec({{0, 1}, {{1, 2}, {2, 1}, {1, 3}}, {}});
    const auto sol = build_cooperative(spec);
    const auto rep = check_admissibility(sol, {});
    ck(rep.admissible, "admissible");
    ck(rep.hj_residual_sup <= 1e-6, "residual on [-50,50]");
    ck(sol.jumps.empty(), "no jumps");
    ck(sol.left_tail.kind == TailKind::Constant && sol.right_tail.kind == TailKind::Constant, "linear tails");
    std::size_t checked = 0;
    Vec2 entry = spec.slopes[0];
    for (const auto& pc : sol.pieces) {
        if (pc.kind != PieceKind::Orbit) continue;
        const InvariantBox box = invariant_box(pc.slopes, entry);
        for (const auto& s : pc.orbit.samples) {
            ck(box.contains(s.p, 1e-9), "invariant box");
            ++checked;
        }
        entry = pc.orbit.samples.back().p;
    }
    ck(checked > 0, "orbit pieces present");
    ck.why << " residual=" << num(rep.hj_residual_sup) << " pieces=" << sol.pieces.size()
           << " box samples=" << checked;
    return {ck.ok, ck.why.str()};
}

Outcome c3() {
    Check ck;
    const auto spec = validate_spec({{0}, {{-2, 1}, {-1, 2}}, {}});
    std::vector<AdmissibleSolution> fam;
    for (double c : {0.02, 0.05, 0.08}) {
        fam.push_back(build_conflicting_family(spec, {-c, c}));
        ck(fam.back().report.admissible, "member admissible");
    }
    double least = INFINITY;
    for (std::size_t a = 0; a < fam.size(); ++a) {
        for (std::size_t b = a + 1; b < fam.size(); ++b) {
            double d = 0.0;
            for (int k = 0; k <= 10000; ++k) {
                const double x = -5.0 + 1e-3 * k;
                d = std::max(d, norm(fam[a].p_at(x) - fam[b].p_at(x)));
            }
            least = std::min(least, d);
        }
    }
    ck(least > 1e-3, "pairwise sup distance");
    ck.why << " min pairwise sup=" << num(least);
    for (const auto& s : fam) ck.why << " datum=(" << num(s.datum->c1) << "," << num(s.datum->c2) << ")";
    return {ck.ok, ck.why.str()};
}

Outcome c4() {
    Check ck;
    const auto spec = validate_spec({{0}, {{-1, 2}, {-2, 1}}, {}});
    ck(classify_regime(spec).regime == Regime::ConflictingNone, "regime");
    const auto cert = certify_nonexistence(spec, 100);
    ck(cert.probes.size() == 100 && cert.inconsistent_count == 100, "100/100 inconsistent");
    ck.why << " inconsistent=" << cert.inconsistent_count << "/" << cert.probes.size();
    return {ck.ok, ck.why.str()};
}

Outcome c5() {
    Check ck;
    const auto spec = validate_spec({{0}, {{-2, -1}, {1, 2}}, {}});
    const auto [lo, hi] = mixed_ratio_bounds(spec);
    // Lower root of g^2 + 2(1-a) g - a = 0.
    auto g = [](double a) { return (a - 1.0) - std::sqrt(a * a - a + 1.0); };
    const double lo_direct = g(0.5);
    const double hi_direct = g(2.0);
    ck(std::abs(lo_direct - (-0.5 - std::sqrt(0.75))) <= 1e-15, "direct formula at 1/2");
    ck(std::abs(hi_direct - (1.0 - std::sqrt(3.0))) <= 1e-15, "direct formula at 2");
    ck(std::abs(lo - lo_direct) <= 1e-12, "lower bound");
    ck(std::abs(hi - hi_direct) <= 1e-12, "upper bound");
    const auto sol = build_mixed_family(spec, {-0.1, 0.1});
    ck(sol.report.admissible, "p_in=(-0.1,0.1) admissible");
    bool rejected = false;
    try {
        build_mixed_family(spec, {-0.1, 0.05});
    } catch (const Error& e) {
        rejected = e.code() == ErrorCode::DatumOutsideFamily;
    }
    ck(rejected, "ratio -0.5 rejected");
    ck.why << " bounds=(" << num(lo) << "," << num(hi) << ") datum=(" << num(sol.datum->c1) << ","
           << num(sol.datum->c2) << ")";
    return {ck.ok, ck.why.str()};
}

Outcome c6() {
    Check ck;
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-10, 10);
    double worst = 0.0;
    int done = 0;
    while (done < 10000) {
        const Vec2 k{u(rng), u(rng)};
        if (k == Vec2{0, 0}) continue;
        ++done;
        const auto e = linearization(k);
        ck(e.lambda_minus < 0.0 && e.lambda_plus > 0.0, "eigenvalue signs");
        for (const auto& [v, lam] : {std::pair{e.v_minus, e.lambda_minus}, {e.v_plus, e.lambda_plus}}) {
            const Vec2 hv{(k.c1 - k.c2) * v.c1 + k.c1 * v.c2, k.c2 * v.c1 + (k.c2 - k.c1) * v.c2};
            worst = std::max(worst, norm(hv - lam * v) / std::max(1.0, std::abs(lam) * norm(v)));
        }
    }
    ck(worst <= 1e-10, "H v = lambda v");

    std::uniform_real_distribution<double> lg(-8, 8);
    bool mono = true;
    for (int i = 0; i < 10000; ++i) {
        double a1 = std::pow(10.0, lg(rng)), a2 = std::pow(10.0, lg(rng));
        if (a1 == a2) continue;
        if (a1 > a2) std::swap(a1, a2);
        mono = mono && direction_map(DirectionMap::GMinus, a1) < direction_map(DirectionMap::GMinus, a2);
        mono = mono && direction_map(DirectionMap::GPlus, a1) < direction_map(DirectionMap::GPlus, a2);
        mono = mono && direction_map(DirectionMap::gMinus, -a2) < direction_map(DirectionMap::gMinus, -a1);
        mono = mono && direction_map(DirectionMap::gPlus, -a2) < direction_map(DirectionMap::gPlus, -a1);
    }
    ck(mono, "strict monotonicity");

    const double lim[][3] = {
        {0, 1e-9, -2.0}, {1, 1e-9, 0.0}, {0, 1e9, -0.5}, {2, -1e-9, -2.0}, {3, -1e-9, 0.0}, {3, -1e9, -0.5}};
    const DirectionMap maps[] = {DirectionMap::GMinus, DirectionMap::GPlus, DirectionMap::gMinus, DirectionMap::gPlus};
    double lerr = 0.0;
    for (const auto& l : lim) {
        lerr = std::max(lerr, std::abs(direction_map(maps[static_cast<int>(l[0])], l[1]) - l[2]));
    }
    ck(lerr <= 1e-6, "limit values");
    ck.why << " max eigen residual=" << num(worst) << " max limit error=" << num(lerr);
    return {ck.ok, ck.why.str()};
}

Outcome c7() {
    Check ck;
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const double d = capital_delta(p);
        const double n2 = p.c1 * p.c1 + p.c2 * p.c2;
        if (!(0.5 * n2 <= d * (1 + 1e-12) && d <= 2.0 * n2 * (1 + 1e-12))) ++bad;
    }
    ck(bad == 0, "bounds");
    ck.why << " violations=" << bad << "/100000";
    return {ck.ok, ck.why.str()};
}

Outcome c8() {
    Check ck;
    const auto sol = build_cooperative(kOne);
    GridParams g;  // dx = 1e-3 on [-10, 10]
    double gmax = 0.0;
    for (double y : {0.0, 1.0}) {
        const auto [d1, d2] = deviation_gap(sol, kOne, y, g);
        gmax = std::max({gmax, std::abs(d1.gap), std::abs(d2.gap)});
    }
    ck(gmax <= 5e-2, "|gap| <= 5e-2");

    auto err = [&](double dx) {
        GridParams h = g;
        h.dx = dx;
        const auto br = best_response(kOne, [](double) { return 1.0; }, Player::One, h);
        return std::abs(br.value_at(1.0) - (1.0 - 1.5));
    };
    const double e1 = err(1e-3), e2 = err(5e-4);
    ck(e1 / e2 >= 1.8, "halving ratio");

    SimulationOptions bad;
    bad.control_offset = {0.3, 0.0};
    const auto [b1, b2] = deviation_gap(sol, kOne, 1.0, g, bad);
    ck(b1.gap >= 2e-2, "corrupted player gap");
    ck.why << " max|gap|=" << num(gmax) << " err(1e-3)=" << num(e1) << " err(5e-4)=" << num(e2)
           << " ratio=" << num(e1 / e2) << " corrupted gap=" << num(b1.gap) << " other=" << num(b2.gap);
    return {ck.ok, ck.why.str()};
}

Outcome c9() {
    Check ck;
    try {
        const auto res = build_periodic({{-1, 2}, {-2, 1}});
        const double l = res.cost.period();
        double worst = 0.0;
        for (double x = res.cost.x_minus; x <= res.cost.x_minus + 2 * l; x += 1e-3) {
            worst = std::max(worst, norm(res.solution.p_at(x + l) - res.solution.p_at(x)));
        }
        ck(worst <= 1e-6, "periodicity");
        ck(res.solution.report.admissible, "admissible");
        ck.why << " crossing found, period=" << num(l) << " sup|p(x+l)-p(x)|=" << num(worst);
    } catch (const Error& e) {
        ck(e.code() == ErrorCode::NoIntersection, std::string("unexpected error: ") + e.what());
        ck.why << " recorded outcome: NoIntersection for K0=(-1,2), K1=(-2,1)";
        // Same construction where the manifolds do cross.
        const auto res = build_periodic({{-0.685, 0.729}, {-0.790, 0.613}});
        const double l = res.cost.period();
        double worst = 0.0;
        for (double x = res.cost.x_minus; x <= res.cost.x_minus + 2 * l; x += 1e-3) {
            worst = std::max(worst, norm(res.solution.p_at(x + l) - res.solution.p_at(x)));
        }
        ck(worst <= 1e-6 && res.solution.report.admissible, "crossing pair");
        ck.why << "; crossing pair K0=(-0.685,0.729), K1=(-0.790,0.613): period=" << num(l)
               << " sup|p(x+l)-p(x)|=" << num(worst) << " admissible=" << res.solution.report.admissible;
    }
    return {ck.ok, ck.why.str()};
}

Outcome c10(const std::string& cli, const std::string& config) {
    Check ck;
    if (cli.empty() || config.empty()) return {false, " CLI path and config not given"};
    const fs::path base = fs::temp_directory_path() / ("hjgame_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    fs::create_directories(base);
    for (const char* run : {"a", "b"}) {
        const std::string cmd =
            "\"" + cli + "\" solve --config \"" + config + "\" --out \"" + (base / run).string() + "\" >/dev/null";
        ck(std::system(cmd.c_str()) == 0, std::string("solve run ") + run);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        const std::string name = entry.path().filename().string();
        if (name == "run.json") continue;  // carries the timestamp
        const std::string other = (base / "b" / name).string();
        ck(fs::exists(other), name + " missing in second run");
        if (!fs::exists(other)) continue;
        ck(io::read_file(entry.path().string()) == io::read_file(other), name + " differs");
        ++compared;
    }
    ck(compared >= 3, "artifacts written");
    fs::remove_all(base);
    ck.why << " identical artifacts=" << compared;
    return {ck.ok, ck.why.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::string config = argc > 2 ? argv[2] : "";
    const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria{
        {1, "closed-form value match", 5, c1},
        {2, "cooperative gluing", 10, c2},
        {3, "conflicting family", 30, c3},
        {4, "nonexistence certificate", 60, c4},
        {5, "mixed family", 30, c5},
        {6, "eigen-structure suite", 0, c6},
        {7, "determinant bounds", 0, c7},
        {8, "Nash deviation certification", 120, c8},
        {9, "periodic construction", 0, c9},
        {10, "CLI determinism", 0, [&] { return c10(cli, config); }},
    };
    int failed = 0;
    for (const auto& [id, name, budget, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out = {false, std::string(" exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget > 0 && secs >= budget) {
            out.pass = false;
            out.detail += " [over time budget " + num(budget) + " s]";
        }
        if (!out.pass) ++failed;
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << num(secs)
                  << " s)" << out.detail << "\n";
    }
    std::cout << (10 - failed) << "/10 criteria passed\n";
    return failed == 0 ? 0 : 1;
}
