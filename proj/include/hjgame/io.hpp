// Config parsing and deterministic CSV / JSON serialization of every result
// type. Floats are written in shortest round-trip form.
#ifndef HJGAME_IO_HPP
#define HJGAME_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "builders.hpp"
#include "core.hpp"
#include "game_model.hpp"
#include "nash.hpp"
#include "orbit.hpp"
#include "solution.hpp"

namespace hjgame::io {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline json vec_json(const Vec2& v) { return json::array({v.c1, v.c2}); }

// Finite numbers as numbers, infinities as null.
inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline Vec2 vec_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorCode::ConfigParse, std::string(what) + " must be a pair of numbers");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

// ---- config ---------------------------------------------------------------

inline CostSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigParse, "config must be a JSON object");
    CostSpec spec;
    if (!j.contains("breakpoints") || !j["breakpoints"].is_array()) {
        throw Error(ErrorCode::ConfigParse, "\"breakpoints\" must be an array of numbers");
    }
    for (const auto& b : j["breakpoints"]) {
        if (!b.is_number()) throw Error(ErrorCode::ConfigParse, "\"breakpoints\" must be an array of numbers");
        spec.breakpoints.push_back(b.get<double>());
    }
    if (!j.contains("slopes") || !j["slopes"].is_array()) {
        throw Error(ErrorCode::ConfigParse, "\"slopes\" must be an array of [k1, k2] pairs");
    }
    for (const auto& k : j["slopes"]) spec.slopes.push_back(vec_from(k, "each slope"));
    if (j.contains("offsets")) spec.offsets = vec_from(j["offsets"], "\"offsets\"");
    return validate_spec(std::move(spec));
}

inline json spec_to_json(const CostSpec& spec) {
    json j;
    j["breakpoints"] = spec.breakpoints;
    j["slopes"] = json::array();
    for (const auto& k : spec.slopes) j["slopes"].push_back(vec_json(k));
    j["offsets"] = vec_json(spec.offsets);
    return j;
}

inline CostSpec parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigParse, e.what());
    }
    return spec_from_json(j);
}

/// Canonical serialization: sorted keys, fixed layout.
inline std::string serialize_spec(const CostSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

// ---- regime ---------------------------------------------------------------

inline json regime_json(const RegimeReport& rr) {
    json j;
    j["regime"] = to_string(rr.regime);
    j["sectors"] = json::array();
    for (auto s : rr.per_interval_sectors) j["sectors"].push_back(to_string(s));
    j["notes"] = rr.notes;
    return j;
}

// ---- orbits ---------------------------------------------------------------

inline std::string orbit_csv(const Orbit& o) {
    std::string out = "s,p1,p2,x,delta\n";
    for (const auto& ps : o.samples) {
        out += fmt(ps.s) + "," + fmt(ps.p.c1) + "," + fmt(ps.p.c2) + "," + fmt(ps.x) + "," +
               fmt(capital_delta(ps.p)) + "\n";
    }
    out += "# termination=" + to_string(o.termination) + "\n";
    return out;
}

// ---- solutions ------------------------------------------------------------

inline std::string solution_csv(const AdmissibleSolution& sol) {
    std::string out = "x,p1,p2,u1,u2,piece_index\n";
    for (const auto& r : sol.profile) {
        out += fmt(r.x) + "," + fmt(r.p.c1) + "," + fmt(r.p.c2) + "," + fmt(r.u.c1) + "," + fmt(r.u.c2) + "," +
               std::to_string(r.piece) + "\n";
    }
    return out;
}

inline json tail_json(const Tail& t) {
    json j;
    j["kind"] = to_string(t.kind);
    if (t.kind == TailKind::Constant) j["p"] = vec_json(t.value);
    return j;
}

inline Tail tail_from(const json& j) {
    Tail t;
    const std::string kind = j.value("kind", "Unknown");
    if (kind == "Constant") {
        t.kind = TailKind::Constant;
        t.value = vec_from(j.at("p"), "tail p");
    } else if (kind == "Periodic") {
        t.kind = TailKind::Periodic;
    }
    return t;
}

inline json tolerances_json(const AdmissibilityTolerances& t) {
    return {{"residual", t.residual},
            {"jump", t.jump},
            {"window", json::array({t.window_lo, t.window_hi})},
            {"grid_step", t.grid_step}};
}

inline json report_json(const AdmissibilityReport& r) {
    json j;
    j["verdict"] = r.admissible ? "admissible" : "inadmissible";
    j["reason"] = to_string(r.reason);
    j["hj_residual_sup"] = r.hj_residual_sup;
    j["growth_constant"] = num_or_null(r.growth_constant);
    j["grid_points"] = r.grid_points;
    j["jump_checks"] = json::array();
    for (const auto& jc : r.jump_checks) {
        j["jump_checks"].push_back({{"x", jc.x},
                                    {"right_sum", jc.right_sum},
                                    {"reflection_error", jc.reflection_error},
                                    {"passed", jc.passed},
                                    {"reason", to_string(jc.reason)}});
    }
    return j;
}

inline json solution_json(const AdmissibleSolution& sol) {
    json j;
    j["regime"] = to_string(sol.regime);
    j["construction"] = sol.construction;
    j["spec"] = spec_to_json(sol.spec);
    if (sol.datum) j["datum"] = vec_json(*sol.datum);
    j["period"] = sol.period ? json(*sol.period) : json(nullptr);
    j["jumps"] = json::array();
    for (const auto& jp : sol.jumps) {
        j["jumps"].push_back({{"x", jp.x}, {"left", vec_json(jp.left)}, {"right", vec_json(jp.right)}});
    }
    j["tails"] = {{"left", tail_json(sol.left_tail)}, {"right", tail_json(sol.right_tail)}};
    j["pieces"] = json::array();
    for (std::size_t i = 0; i < sol.pieces.size(); ++i) {
        const Piece& pc = sol.pieces[i];
        json pj{{"index", i},
                {"kind", to_string(pc.kind)},
                {"x_lo", num_or_null(pc.x_lo)},
                {"x_hi", num_or_null(pc.x_hi)},
                {"slopes", vec_json(pc.slopes)}};
        if (pc.kind == PieceKind::Constant) pj["p"] = vec_json(pc.value);
        else pj["termination"] = to_string(pc.orbit.termination);
        j["pieces"].push_back(pj);
    }
    j["report"] = report_json(sol.report);
    j["tolerances"] = tolerances_json(sol.tolerances);
    return j;
}

/// Reads a solution written as solution.csv plus admissibility.json. The
/// profile becomes tabulated pieces (linear interpolation), split at jumps.
/// The spec stored with the solution wins over `fallback`.
inline AdmissibleSolution load_solution(const std::string& csv_text, const json& meta,
                                        const std::optional<CostSpec>& fallback = std::nullopt) {
    AdmissibleSolution sol;
    if (meta.contains("spec")) sol.spec = spec_from_json(meta["spec"]);
    else if (fallback) sol.spec = *fallback;
    else throw Error(ErrorCode::ConfigParse, "solution metadata carries no spec and none was supplied");
    const CostSpec& spec = sol.spec;
    sol.construction = meta.value("construction", std::string("loaded"));
    const std::string regime = meta.value("regime", std::string());
    for (Regime r : {Regime::CooperativeUnique, Regime::ConflictingMany, Regime::ConflictingNone, Regime::MixedMany,
                     Regime::Periodic, Regime::UnsupportedBoundary, Regime::UnsupportedCombination}) {
        if (to_string(r) == regime) sol.regime = r;
    }
    if (meta.contains("tails")) {
        sol.left_tail = tail_from(meta["tails"].at("left"));
        sol.right_tail = tail_from(meta["tails"].at("right"));
    }
    if (meta.contains("period") && meta["period"].is_number()) sol.period = meta["period"].get<double>();
    if (meta.contains("jumps")) {
        for (const auto& jp : meta["jumps"]) {
            sol.jumps.push_back({jp.at("x").get<double>(), vec_from(jp.at("left"), "jump left"),
                                 vec_from(jp.at("right"), "jump right")});
        }
    }

    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,p1,p2,u1,u2,piece_index", 0) != 0) {
        throw Error(ErrorCode::ConfigParse, "solution CSV lacks the expected header");
    }
    std::vector<ProfileRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ProfileRow r;
        double vals[5];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (double& v : vals) {
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc() || res.ptr == end || *res.ptr != ',') {
                throw Error(ErrorCode::ConfigParse, "malformed solution CSV row: " + line);
            }
            p = res.ptr + 1;
        }
        const auto res = std::from_chars(p, end, r.piece);
        if (res.ec != std::errc()) throw Error(ErrorCode::ConfigParse, "malformed solution CSV row: " + line);
        r.x = vals[0];
        r.p = {vals[1], vals[2]};
        r.u = {vals[3], vals[4]};
        rows.push_back(r);
    }
    if (rows.size() < 2) throw Error(ErrorCode::ConfigParse, "solution CSV needs at least two rows");

    // Split at repeated x (jump points), one tabulated polyline per stretch.
    std::size_t start = 0;
    auto flush = [&](std::size_t stop) {
        Orbit o;
        o.has_field = false;
        for (std::size_t i = start; i < stop; ++i) o.samples.push_back({rows[i].p, static_cast<double>(i), rows[i].x});
        if (o.samples.size() == 1) o.samples.push_back(o.samples.back());
        o.slopes = spec.slopes_at(o.samples.front().x);
        sol.pieces.push_back(Piece::from_orbit(std::move(o)));
    };
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].x == rows[i - 1].x) {
            flush(i);
            start = i;
        }
    }
    flush(rows.size());
    sol.profile = std::move(rows);
    if (meta.contains("tolerances")) {
        const auto& t = meta["tolerances"];
        sol.tolerances.residual = t.value("residual", sol.tolerances.residual);
        sol.tolerances.jump = t.value("jump", sol.tolerances.jump);
        sol.tolerances.grid_step = t.value("grid_step", sol.tolerances.grid_step);
        if (t.contains("window")) {
            sol.tolerances.window_lo = t["window"][0].get<double>();
            sol.tolerances.window_hi = t["window"][1].get<double>();
        }
    }
    return sol;
}

// ---- certificates and periodic costs -------------------------------------

inline json certificate_json(const NonexistenceCertificate& c) {
    json j;
    j["regime"] = to_string(c.regime);
    j["argument"] = c.argument;
    j["radius"] = c.radius;
    j["probe_count"] = c.probes.size();
    j["inconsistent_count"] = c.inconsistent_count;
    j["probes"] = json::array();
    for (const auto& p : c.probes) {
        json pj{{"p", vec_json(p.p)},
                {"forward", to_string(p.forward)},
                {"inconsistent", p.inconsistent},
                {"reason", p.reason}};
        pj["backward"] = p.backward ? json(to_string(*p.backward)) : json(nullptr);
        j["probes"].push_back(pj);
    }
    return j;
}

inline json periodic_cost_json(const PeriodicCost& c, const CostSpec& finite) {
    return {{"k0", vec_json(c.k0)},
            {"k1", vec_json(c.k1)},
            {"x_minus", c.x_minus},
            {"x_plus", c.x_plus},
            {"period", c.period()},
            {"finite_spec", spec_to_json(finite)}};
}

// ---- closed loop and deviations ------------------------------------------

inline std::string trajectory_csv(const ClosedLoopRun& run, const CostSpec& spec) {
    std::string out = "t,x,alpha1,alpha2,running_cost1,running_cost2\n";
    for (const auto& s : run.trajectory) {
        out += fmt(s.t) + "," + fmt(s.x) + "," + fmt(s.alpha.c1) + "," + fmt(s.alpha.c2) + "," +
               fmt(discounted_running_cost(spec, Player::One, s.x, s.alpha)) + "," +
               fmt(discounted_running_cost(spec, Player::Two, s.x, s.alpha)) + "\n";
    }
    return out;
}

inline json run_json(const ClosedLoopRun& run) {
    return {{"y", run.y},
            {"horizon", run.horizon},
            {"samples", run.trajectory.size()},
            {"final_x", run.trajectory.back().x},
            {"final_t", run.trajectory.back().t},
            {"settled", run.settled},
            {"costs", vec_json(run.costs)}};
}

inline json deviation_json(const DeviationReport& d) {
    return {{"player", static_cast<int>(d.player)},
            {"y", d.y},
            {"nash_cost", d.nash_cost},
            {"best_response_value", d.best_response_value},
            {"gap", d.gap},
            {"tau", d.tau},
            {"clamped", d.clamped},
            {"control_bound_hit", d.control_bound_hit}};
}

} // namespace hjgame::io

#endif
