// hjgame: command-line front end for the two-player HJ solver.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hjgame/hjgame.hpp"

namespace fs = std::filesystem;
using hjgame::Error;
using hjgame::ErrorCode;
using hjgame::Vec2;
using json = nlohmann::json;
namespace io = hjgame::io;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRegime = 3;
constexpr int kExitConstruction = 4;
constexpr int kExitNonConvergence = 5;

int exit_code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonIncreasingBreakpoints:
    case ErrorCode::ZeroSlopePair:
    case ErrorCode::NonFiniteEntry:
    case ErrorCode::SlopeCountMismatch:
    case ErrorCode::ConfigParse:
    case ErrorCode::Io:
    case ErrorCode::InvalidGrid:
    case ErrorCode::InvalidHorizon:
    case ErrorCode::InvalidStopConditions:
    case ErrorCode::PreconditionViolation:
        return kExitUsage;
    case ErrorCode::RegimeMismatch: return kExitRegime;
    case ErrorCode::NonConvergence: return kExitNonConvergence;
    default: return kExitConstruction;
    }
}

struct Options {
    std::string config;
    std::string out;
    std::optional<double> tol_residual;
    std::optional<double> tol_jump;
    std::optional<double> grid_dx;
    std::vector<double> window;

    // family
    std::vector<double> pin;
    std::optional<int> count;
    bool extra = false;
    // nonexist
    int probes = 100;
    // verify / simulate / export
    std::string solution;
    std::vector<double> ys{0.0, 1.0};
    std::vector<double> offset;
    std::vector<double> grid_window{-10.0, 10.0};
    double margin = 25.0;
    int controls = 401;
    double horizon = 40.0;
    double gap_warn = 1e-2;
    std::string format = "csv";
};

// Everything a command writes goes through here so the manifest is complete.
class Run {
public:
    Run(std::string command, const Options& o, const std::optional<hjgame::CostSpec>& spec)
        : command_(std::move(command)) {
        canonical_ = spec ? io::serialize_spec(*spec) : std::string();
        hash_ = io::hex64(io::fnv1a(canonical_));
        const std::string stamp = utc_stamp();
        if (o.out.empty()) {
            id_ = stamp + "-" + hash_.substr(0, 8);
            dir_ = fs::path("runs") / id_;
        } else {
            dir_ = o.out;
            id_ = stamp + "-" + hash_.substr(0, 8);
        }
        created_ = stamp;
        fs::create_directories(dir_);
        if (spec) write("config.json", canonical_);
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& rel, const std::string& content) {
        const fs::path p = dir_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        io::write_file(p.string(), content);
        outputs_.push_back(rel);
    }

    void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

    void param(const std::string& k, json v) { params_[k] = std::move(v); }

    void finish(const hjgame::AdmissibilityTolerances& tol) {
        json m;
        m["run_id"] = id_;
        m["created_utc"] = created_;
        m["config_hash"] = hash_;
        m["command"] = command_;
        m["parameters"] = params_;
        m["tolerances"] = io::tolerances_json(tol);
        std::sort(outputs_.begin(), outputs_.end());
        m["outputs"] = outputs_;
        io::write_file((dir_ / "run.json").string(), m.dump(2) + "\n");
        std::cout << "artifacts: " << dir_.string() << "\n";
    }

private:
    static std::string utc_stamp() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
        return buf;
    }

    std::string command_;
    std::string canonical_;
    std::string hash_;
    std::string id_;
    std::string created_;
    fs::path dir_;
    json params_ = json::object();
    std::vector<std::string> outputs_;
};

hjgame::CostSpec load_config(const std::string& path) {
    if (path.empty()) throw Error(ErrorCode::ConfigParse, "--config is required");
    return io::parse_spec(io::read_file(path));
}

hjgame::AdmissibilityTolerances tolerances(const Options& o) {
    hjgame::AdmissibilityTolerances t;
    if (o.tol_residual) t.residual = *o.tol_residual;
    if (o.tol_jump) t.jump = *o.tol_jump;
    if (o.window.size() == 2) {
        t.window_lo = o.window[0];
        t.window_hi = o.window[1];
    }
    return t;
}

hjgame::BuildOptions build_options(const Options& o) {
    hjgame::BuildOptions b;
    b.tolerances = tolerances(o);
    if (o.grid_dx) b.tolerances.grid_step = *o.grid_dx;
    return b;
}

void write_solution(Run& run, const std::string& prefix, const hjgame::AdmissibleSolution& sol) {
    run.write(prefix + "solution.csv", io::solution_csv(sol));
    run.write_json(prefix + "admissibility.json", io::solution_json(sol));
}

void print_verdict(const std::string& label, const hjgame::AdmissibleSolution& sol) {
    std::printf("%s: %s (residual %.3g, reason %s, %zu pieces)\n", label.c_str(),
                sol.report.admissible ? "admissible" : "inadmissible", sol.report.hj_residual_sup,
                hjgame::to_string(sol.report.reason).c_str(), sol.pieces.size());
}

std::string regime_summary(hjgame::Regime r) {
    using hjgame::Regime;
    switch (r) {
    case Regime::CooperativeUnique: return "exactly one admissible solution (command: solve)";
    case Regime::ConflictingMany: return "infinitely many admissible solutions expected (command: family)";
    case Regime::ConflictingNone: return "no admissible solution exists (command: nonexist)";
    case Regime::MixedMany: return "infinitely many admissible solutions expected (command: family)";
    case Regime::Periodic: return "periodic costs (command: periodic)";
    case Regime::UnsupportedBoundary: return "a slope pair lies on a sector boundary; no construction applies";
    case Regime::UnsupportedCombination: return "no construction covers this sector combination";
    }
    return "";
}

int cmd_classify(const Options& o) {
    const auto spec = load_config(o.config);
    const auto rr = hjgame::classify_regime(spec);
    Run run("classify", o, spec);
    for (std::size_t i = 0; i < rr.per_interval_sectors.size(); ++i) {
        std::printf("interval %zu: K=(%s, %s) sector %s\n", i, io::fmt(spec.slopes[i].c1).c_str(),
                    io::fmt(spec.slopes[i].c2).c_str(), hjgame::to_string(rr.per_interval_sectors[i]).c_str());
    }
    std::printf("%s: %s\n", hjgame::to_string(rr.regime).c_str(), regime_summary(rr.regime).c_str());
    if (!rr.notes.empty()) std::printf("note: %s\n", rr.notes.c_str());
    run.write_json("regime.json", io::regime_json(rr));
    run.finish(tolerances(o));
    return 0;
}

int cmd_solve(const Options& o) {
    const auto spec = load_config(o.config);
    const auto bo = build_options(o);
    const auto sol = hjgame::build_cooperative(spec, bo);
    Run run("solve", o, spec);
    write_solution(run, "", sol);
    print_verdict("solution", sol);
    run.finish(bo.tolerances);
    return sol.report.admissible ? 0 : kExitConstruction;
}

Vec2 family_datum(const hjgame::CostSpec& spec, hjgame::Regime regime, double c) {
    if (regime == hjgame::Regime::MixedMany) {
        const auto [lo, hi] = hjgame::mixed_ratio_bounds(spec);
        const double r = 0.5 * (lo + hi);
        return {-c, -r * c};
    }
    const bool a4 = hjgame::classify_sector(spec.slopes[0]).index == 4;
    return a4 ? Vec2{-c, c} : Vec2{c, -c};
}

hjgame::AdmissibleSolution build_member(const hjgame::CostSpec& spec, hjgame::Regime regime, const Vec2& p,
                                        const hjgame::BuildOptions& bo) {
    if (regime == hjgame::Regime::MixedMany) return hjgame::build_mixed_family(spec, p, bo);
    return hjgame::build_conflicting_family(spec, p, bo);
}

int cmd_family(const Options& o) {
    const auto spec = load_config(o.config);
    const auto bo = build_options(o);
    const auto regime = hjgame::classify_regime(spec).regime;
    if (regime != hjgame::Regime::ConflictingMany && regime != hjgame::Regime::MixedMany) {
        throw Error(ErrorCode::RegimeMismatch, "family needs a ConflictingMany or MixedMany spec, got " +
                                                   hjgame::to_string(regime));
    }
    if (!o.pin.empty() && o.pin.size() != 2) throw Error(ErrorCode::ConfigParse, "--pin takes p1,p2");
    if (o.count && *o.count < 1) throw Error(ErrorCode::ConfigParse, "--count must be positive");
    Run run("family", o, spec);
    int status = 0;
    if (!o.pin.empty()) {
        const Vec2 p{o.pin[0], o.pin[1]};
        run.param("pin", io::vec_json(p));
        const auto sol = build_member(spec, regime, p, bo);
        write_solution(run, "", sol);
        print_verdict("member", sol);
        if (!sol.report.admissible) status = kExitConstruction;
    } else {
        const int n = o.count.value_or(3);
        run.param("count", n);
        for (int k = 0; k < n; ++k) {
            const double c = 0.08 * std::pow(0.5, k);
            const auto sol = build_member(spec, regime, family_datum(spec, regime, c), bo);
            write_solution(run, "member_" + std::to_string(k) + "/", sol);
            print_verdict("member " + std::to_string(k) + " datum (" + io::fmt(sol.datum->c1) + ", " +
                              io::fmt(sol.datum->c2) + ")",
                          sol);
            if (!sol.report.admissible) status = kExitConstruction;
        }
    }
    if (o.extra) {
        run.param("extra", true);
        if (regime != hjgame::Regime::ConflictingMany) {
            throw Error(ErrorCode::RegimeMismatch, "--extra needs a ConflictingMany spec");
        }
        const auto extra = hjgame::build_conflicting_extra(spec, bo);
        if (extra) {
            write_solution(run, "extra/", *extra);
            print_verdict("extra", *extra);
        } else {
            std::printf("extra: the origin manifolds do not cross\n");
            run.write_json("extra/outcome.json", {{"outcome", "NoIntersection"}});
        }
    }
    run.finish(bo.tolerances);
    return status;
}

int cmd_nonexist(const Options& o) {
    const auto spec = load_config(o.config);
    const auto bo = build_options(o);
    if (o.probes < 1) throw Error(ErrorCode::ConfigParse, "--probes must be positive");
    const auto cert = hjgame::certify_nonexistence(spec, static_cast<std::size_t>(o.probes), bo);
    Run run("nonexist", o, spec);
    run.param("probes", o.probes);
    run.write_json("certificate.json", io::certificate_json(cert));
    std::printf("%zu/%zu probes inconsistent with admissibility\n", cert.inconsistent_count, cert.probes.size());
    run.finish(bo.tolerances);
    return 0;
}

int cmd_periodic(const Options& o) {
    const auto spec = load_config(o.config);
    if (spec.slopes.size() < 2) throw Error(ErrorCode::ConfigParse, "periodic needs slopes [K0, K1]");
    const auto bo = build_options(o);
    Run run("periodic", o, spec);
    try {
        const auto res = hjgame::build_periodic({spec.slopes[0], spec.slopes[1]}, bo);
        run.write_json("periodic.json", {{"outcome", "Constructed"},
                                         {"cost", io::periodic_cost_json(res.cost, res.solution.spec)}});
        write_solution(run, "", res.solution);
        std::printf("period %s (x- = %s, x+ = %s)\n", io::fmt(res.cost.period()).c_str(),
                    io::fmt(res.cost.x_minus).c_str(), io::fmt(res.cost.x_plus).c_str());
        print_verdict("solution", res.solution);
        run.finish(bo.tolerances);
        return res.solution.report.admissible ? 0 : kExitConstruction;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoIntersection) throw;
        run.write_json("periodic.json", {{"outcome", "NoIntersection"}, {"message", e.what()}});
        run.finish(bo.tolerances);
        throw;
    }
}

hjgame::AdmissibleSolution load_artifact(const Options& o) {
    if (o.solution.empty()) throw Error(ErrorCode::Io, "--solution <dir> is required");
    const fs::path dir(o.solution);
    const std::string csv = io::read_file((dir / "solution.csv").string());
    json meta;
    try {
        meta = json::parse(io::read_file((dir / "admissibility.json").string()));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigParse, e.what());
    }
    std::optional<hjgame::CostSpec> fallback;
    if (!o.config.empty()) fallback = load_config(o.config);
    return io::load_solution(csv, meta, fallback);
}

Vec2 offset_of(const Options& o) {
    if (o.offset.empty()) return {};
    if (o.offset.size() != 2) throw Error(ErrorCode::ConfigParse, "--offset takes o1,o2");
    return {o.offset[0], o.offset[1]};
}

int cmd_verify(const Options& o) {
    const auto sol = load_artifact(o);
    if (o.grid_window.size() != 2) throw Error(ErrorCode::ConfigParse, "--grid-window takes lo,hi");
    hjgame::GridParams grid;
    grid.x_lo = o.grid_window[0];
    grid.x_hi = o.grid_window[1];
    grid.dx = o.grid_dx.value_or(1e-3);
    grid.margin = o.margin;
    grid.n_controls = static_cast<std::size_t>(std::max(o.controls, 0));
    hjgame::SimulationOptions sim;
    sim.control_offset = offset_of(o);

    Run run("verify", o, sol.spec);
    run.param("solution", o.solution);
    run.param("y", o.ys);
    run.param("offset", io::vec_json(sim.control_offset));
    run.param("grid", {{"x_lo", grid.x_lo}, {"x_hi", grid.x_hi}, {"dx", grid.dx}, {"margin", grid.margin},
                       {"controls", grid.n_controls}});
    json reports = json::array();
    json warnings = json::array();
    std::printf("%10s %6s %14s %14s %12s\n", "y", "player", "nash_cost", "best_value", "gap");
    for (double y : o.ys) {
        const auto [d1, d2] = hjgame::deviation_gap(sol, sol.spec, y, grid, sim, o.horizon);
        for (const auto* d : {&d1, &d2}) {
            json j = io::deviation_json(*d);
            std::printf("%10s %6d %14.8f %14.8f %12.3e\n", io::fmt(y).c_str(), static_cast<int>(d->player),
                        d->nash_cost, d->best_response_value, d->gap);
            if (std::abs(d->gap) > o.gap_warn) {
                const std::string w = "player " + std::to_string(static_cast<int>(d->player)) + " at y=" +
                                      io::fmt(y) + " can gain " + io::fmt(d->gap) + " by deviating";
                j["warning"] = w;
                warnings.push_back(w);
            }
            if (d->control_bound_hit) {
                const std::string w = "best response hit the control bound at y=" + io::fmt(y);
                j["warning_control_bound"] = w;
                warnings.push_back(w);
            }
            reports.push_back(j);
        }
    }
    for (const auto& w : warnings) std::printf("warning: %s\n", w.get<std::string>().c_str());
    run.write_json("deviation.json", {{"reports", reports}, {"gap_warning_threshold", o.gap_warn},
                                      {"warnings", warnings}});
    run.finish(sol.tolerances);
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto sol = load_artifact(o);
    hjgame::SimulationOptions sim;
    sim.control_offset = offset_of(o);
    Run run("simulate", o, sol.spec);
    run.param("solution", o.solution);
    run.param("y", o.ys);
    run.param("horizon", o.horizon);
    json runs = json::array();
    for (std::size_t k = 0; k < o.ys.size(); ++k) {
        const auto r = hjgame::simulate_closed_loop(sol, o.ys[k], o.horizon, sim);
        run.write("trajectory_" + std::to_string(k) + ".csv", io::trajectory_csv(r, sol.spec));
        runs.push_back(io::run_json(r));
        std::printf("y=%s J1=%.10f J2=%.10f%s\n", io::fmt(r.y).c_str(), r.costs.c1, r.costs.c2,
                    r.settled ? " (settled)" : "");
    }
    run.write_json("closed_loop.json", {{"runs", runs}});
    run.finish(sol.tolerances);
    return 0;
}

// Phase-plane paths: the profile rows split at jumps, plus equilibria.
std::vector<std::vector<Vec2>> phase_paths(const hjgame::AdmissibleSolution& sol) {
    std::vector<std::vector<Vec2>> paths(1);
    for (std::size_t i = 0; i < sol.profile.size(); ++i) {
        if (i > 0 && sol.profile[i].x == sol.profile[i - 1].x) paths.emplace_back();
        paths.back().push_back(sol.profile[i].p);
    }
    return paths;
}

std::vector<std::pair<std::string, Vec2>> markers(const hjgame::AdmissibleSolution& sol) {
    std::vector<std::pair<std::string, Vec2>> m{{"origin", {}}};
    std::vector<Vec2> seen;
    for (std::size_t j = 0; j < sol.spec.slopes.size(); ++j) {
        const Vec2 k = sol.spec.slopes[j];
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
        seen.push_back(k);
        m.push_back({"K" + std::to_string(seen.size() - 1), k});
    }
    return m;
}

int cmd_export(const Options& o) {
    const auto sol = load_artifact(o);
    Run run("export", o, sol.spec);
    run.param("solution", o.solution);
    run.param("format", o.format);
    const auto paths = phase_paths(sol);
    const auto marks = markers(sol);
    if (o.format == "csv") {
        run.write("profile.csv", io::solution_csv(sol));
        std::string ph = "path,p1,p2\n";
        for (std::size_t i = 0; i < paths.size(); ++i) {
            for (const auto& p : paths[i]) ph += std::to_string(i) + "," + io::fmt(p.c1) + "," + io::fmt(p.c2) + "\n";
        }
        run.write("phase.csv", ph);
        std::string mk = "label,p1,p2\n";
        for (const auto& [label, p] : marks) mk += label + "," + io::fmt(p.c1) + "," + io::fmt(p.c2) + "\n";
        run.write("markers.csv", mk);
    } else {
        json j;
        j["phase"]["paths"] = json::array();
        for (const auto& path : paths) {
            json pts = json::array();
            for (const auto& p : path) pts.push_back(io::vec_json(p));
            j["phase"]["paths"].push_back(pts);
        }
        j["phase"]["markers"] = json::array();
        for (const auto& [label, p] : marks) j["phase"]["markers"].push_back({{"label", label}, {"p", io::vec_json(p)}});
        json prof;
        for (const char* k : {"x", "p1", "p2", "u1", "u2"}) prof[k] = json::array();
        for (const auto& r : sol.profile) {
            prof["x"].push_back(r.x);
            prof["p1"].push_back(r.p.c1);
            prof["p2"].push_back(r.p.c2);
            prof["u1"].push_back(r.u.c1);
            prof["u2"].push_back(r.u.c2);
        }
        j["profile"] = prof;
        run.write_json("plot.json", j);
    }
    run.finish(sol.tolerances);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regime classification, admissible solutions and Nash checks for two-player HJ systems"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "cost spec JSON");
        if (config_required) c->required();
        sub->add_option("--out", o.out, "output directory (default runs/<run id>)");
        sub->add_option("--tol-residual", o.tol_residual, "HJ residual tolerance");
        sub->add_option("--tol-jump", o.tol_jump, "jump condition tolerance");
        sub->add_option("--grid-dx", o.grid_dx, "profile grid step (verify: HJB grid step)");
        sub->add_option("--window", o.window, "profile window lo,hi")->delimiter(',')->expected(2);
    };
    auto artifact = [&](CLI::App* sub) {
        sub->add_option("--solution", o.solution, "directory with solution.csv and admissibility.json")->required();
    };

    auto* classify = app.add_subcommand("classify", "sectors and regime of a spec");
    common(classify, true);
    auto* solve = app.add_subcommand("solve", "unique solution for cooperative costs");
    common(solve, true);
    auto* family = app.add_subcommand("family", "members of a solution family");
    common(family, true);
    auto* pin = family->add_option("--pin", o.pin, "datum p1,p2")->delimiter(',')->expected(2);
    family->add_option("--count", o.count, "number of members (data 0.08 * 0.5^k)")->excludes(pin);
    family->add_flag("--extra", o.extra, "also build the solution through the origin manifolds");
    auto* nonexist = app.add_subcommand("nonexist", "nonexistence certificate");
    common(nonexist, true);
    nonexist->add_option("--probes", o.probes, "number of probe points");
    auto* periodic = app.add_subcommand("periodic", "periodic solution for slopes [K0, K1]");
    common(periodic, true);
    auto* verify = app.add_subcommand("verify", "best-response deviation gaps");
    common(verify, false);
    artifact(verify);
    verify->add_option("--y", o.ys, "initial states")->delimiter(',');
    verify->add_option("--grid-window", o.grid_window, "HJB window lo,hi")->delimiter(',')->expected(2);
    verify->add_option("--margin", o.margin, "HJB grid margin beyond the window");
    verify->add_option("--controls", o.controls, "number of control samples");
    verify->add_option("--horizon", o.horizon, "closed-loop horizon");
    verify->add_option("--offset", o.offset, "add o1,o2 to the feedback controls")->delimiter(',')->expected(2);
    verify->add_option("--gap-warn", o.gap_warn, "gap above which a warning is recorded");
    auto* simulate = app.add_subcommand("simulate", "closed-loop trajectories");
    common(simulate, false);
    artifact(simulate);
    simulate->add_option("--y", o.ys, "initial states")->delimiter(',');
    simulate->add_option("--horizon", o.horizon, "time horizon");
    simulate->add_option("--offset", o.offset, "add o1,o2 to the feedback controls")->delimiter(',')->expected(2);
    auto* exp = app.add_subcommand("export", "plot-ready data");
    common(exp, false);
    artifact(exp);
    exp->add_option("--format", o.format, "csv or svg-data")->check(CLI::IsMember({"csv", "svg-data"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*classify) return cmd_classify(o);
        if (*solve) return cmd_solve(o);
        if (*family) return cmd_family(o);
        if (*nonexist) return cmd_nonexist(o);
        if (*periodic) return cmd_periodic(o);
        if (*verify) return cmd_verify(o);
        if (*simulate) return cmd_simulate(o);
        if (*exp) return cmd_export(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error [Io]: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
