// Closed-loop simulation under the feedback alpha_i = -p_i(x), discounted
// cost evaluation, and unilateral best responses on a grid.
#ifndef HJGAME_NASH_HPP
#define HJGAME_NASH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "core.hpp"
#include "game_model.hpp"
#include "ode.hpp"
#include "solution.hpp"

namespace hjgame {

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
    Vec2 alpha;
};

struct SimulationOptions {
    ode::StepperOptions stepper{1e-10, 1e-10, 1e-3, 0.01, 1e-14};
    double settle_speed = 1e-9;  // |dx/dt| below this ...
    double settle_time = 1.0;    // ... for this long ends the run
    Vec2 control_offset;         // alpha_i = -p_i(x) + offset_i
};

struct ClosedLoopRun {
    double y = 0.0;
    double horizon = 0.0;
    std::vector<TrajectorySample> trajectory;
    Vec2 costs;
    bool settled = false;
};

inline double discounted_running_cost(const CostSpec& spec, Player player, double x, const Vec2& alpha) {
    const double a = alpha[index_of(player)];
    return eval_cost(spec, player, x) + 0.5 * a * a;
}

/// Integral of exp(-t) times the running cost, taking the cost linear in t
/// inside each step and integrating the discount exactly. Past the last
/// sample the cost is extrapolated linearly (constant when settled).
inline double evaluate_cost(const std::vector<TrajectorySample>& traj, const CostSpec& spec, Player player,
                            bool settled = false) {
    if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "no samples to integrate");
    double total = 0.0;
    double g_prev = discounted_running_cost(spec, player, traj[0].x, traj[0].alpha);
    double slope = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double ta = traj[i - 1].t;
        const double h = traj[i].t - ta;
        const double g = discounted_running_cost(spec, player, traj[i].x, traj[i].alpha);
        if (h > 0.0) {
            const double ea = std::exp(-ta);
            const double w0 = -std::expm1(-h);             // int_0^h e^-s ds
            const double w1 = w0 - h * std::exp(-h);       // int_0^h s e^-s ds
            slope = (g - g_prev) / h;
            total += ea * (g_prev * w0 + slope * w1);
        }
        g_prev = g;
    }
    if (settled || traj.size() < 2) slope = 0.0;
    total += std::exp(-traj.back().t) * (g_prev + slope);
    return total;
}

/// x-range on which the solution's feedback is known: the whole line when
/// both tails are described, otherwise the covered range.
inline std::pair<double, double> reliable_window(const AdmissibleSolution& sol) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const bool tails = sol.left_tail.kind != TailKind::Unknown && sol.right_tail.kind != TailKind::Unknown;
    if (tails) return {-inf, inf};
    return {sol.covered_lo(), sol.covered_hi()};
}

/// Runs dx/dt = alpha_1 + alpha_2 from x(0) = y up to the horizon (or until
/// the state settles) and evaluates both players' discounted costs.
inline ClosedLoopRun simulate_closed_loop(const AdmissibleSolution& sol, double y, double horizon,
                                          const SimulationOptions& opts = {}) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorCode::InvalidHorizon, "horizon must be positive and finite");
    }
    const auto [w_lo, w_hi] = reliable_window(sol);
    if (!(y >= w_lo && y <= w_hi)) throw Error(ErrorCode::WindowEscape, "initial state outside the profiled window");

    auto controls = [&](double x) {
        const Vec2 p = sol.p_at(x);
        return Vec2{-p.c1 + opts.control_offset.c1, -p.c2 + opts.control_offset.c2};
    };
    auto rhs = [&](double, const ode::State<1>& s) {
        const Vec2 a = controls(s[0]);
        return ode::State<1>{a.c1 + a.c2};
    };
    ode::DormandPrince45<1, decltype(rhs)> stepper(rhs, opts.stepper);

    ClosedLoopRun run;
    run.y = y;
    run.horizon = horizon;
    double t = 0.0;
    ode::State<1> s{y};
    ode::State<1> f = stepper.eval(t, s);
    double h = opts.stepper.initial_step;
    double slow_since = std::abs(f[0]) < opts.settle_speed ? 0.0 : -1.0;
    run.trajectory.push_back({t, y, controls(y)});
    while (t < horizon) {
        h = std::min(h, horizon - t);
        ode::StepResult<1> st;
        try {
            st = stepper.step(t, s, f, h);
        } catch (const Error& e) {
            // Trapped against a discontinuity of the feedback: the state stays.
            if (e.code() != ErrorCode::StepSizeUnderflow) throw;
            run.settled = true;
            break;
        }
        t = st.t1;
        s = st.y1;
        f = st.f1;
        if (!(s[0] >= w_lo && s[0] <= w_hi)) {
            throw Error(ErrorCode::WindowEscape, "trajectory left the profiled window at t=" + std::to_string(t));
        }
        run.trajectory.push_back({t, s[0], controls(s[0])});
        if (std::abs(f[0]) < opts.settle_speed) {
            if (slow_since < 0.0) slow_since = t;
            if (t - slow_since >= opts.settle_time) {
                run.settled = true;
                break;
            }
        } else {
            slow_since = -1.0;
        }
    }
    run.costs = {evaluate_cost(run.trajectory, sol.spec, Player::One, run.settled),
                 evaluate_cost(run.trajectory, sol.spec, Player::Two, run.settled)};
    return run;
}

/// Policy: improve the control at every node, then evaluate that policy
/// exactly (Howard iteration). Jacobi: plain value iteration.
enum class SweepMode { Policy, Jacobi };

struct GridParams {
    double x_lo = -10.0;
    double x_hi = 10.0;
    double dx = 1e-3;
    double margin = 25.0;                 // grid extends this far beyond [x_lo, x_hi]
    std::size_t n_controls = 401;
    std::optional<double> control_bound;  // A; defaults to 2 max|p| + 1
    double tolerance = 1e-11;             // sup-norm change that ends the iteration
    std::size_t max_iterations = 20000;
    SweepMode mode = SweepMode::Policy;
    bool allow_unconverged = false;
};

struct BestResponse {
    double x0 = 0.0;   // first grid node
    double dx = 0.0;
    double tau = 0.0;
    double control_bound = 0.0;
    std::vector<double> v;
    std::vector<double> sweep_changes;   // sup-norm change per sweep
    std::size_t iterations = 0;
    bool converged = false;
    bool clamped = false;                // some foot point was clamped at a grid edge
    bool control_bound_hit = false;      // optimal control at +/- A inside [x_lo, x_hi]

    double value_at(double x) const {
        const double r = (x - x0) / dx;
        const auto n = v.size();
        if (r <= 0.0) return v.front();
        if (r >= static_cast<double>(n - 1)) return v.back();
        const auto k = static_cast<std::size_t>(r);
        const double th = r - static_cast<double>(k);
        return (1.0 - th) * v[k] + th * v[std::min(k + 1, n - 1)];
    }
};

/// Stationary discounted HJB of one player against a frozen opponent drift:
///   v(x) = min_a { tau (h(x) + a^2/2) + (1 - tau) v(x + tau (a - p_opp(x))) }
/// with linear interpolation. tau = dx / (A + max|p_opp|) keeps every foot
/// point within one cell, so each node's value is affine in one neighbour.
inline BestResponse best_response(const CostSpec& spec, const std::function<double(double)>& p_opp, Player player,
                                  const GridParams& grid) {
    if (!(grid.dx > 0.0) || !(grid.x_hi > grid.x_lo) || grid.n_controls < 2 || grid.margin < 0.0) {
        throw Error(ErrorCode::InvalidGrid, "grid needs dx > 0, x_hi > x_lo, margin >= 0 and two controls");
    }
    BestResponse br;
    br.dx = grid.dx;
    br.x0 = grid.x_lo - grid.margin;
    const auto n = static_cast<std::size_t>(std::ceil((grid.x_hi + grid.margin - br.x0) / grid.dx - 1e-9)) + 1;
    std::vector<double> hx(n), po(n);
    double max_opp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = br.x0 + static_cast<double>(k) * grid.dx;
        hx[k] = eval_cost(spec, player, x);
        po[k] = p_opp(x);
        max_opp = std::max(max_opp, std::abs(po[k]));
    }
    br.control_bound = grid.control_bound.value_or(2.0 * max_opp + 1.0);
    const double a_max = br.control_bound;
    br.tau = grid.dx / (a_max + max_opp);
    const double tau = br.tau;
    std::vector<double> controls(grid.n_controls);
    for (std::size_t c = 0; c < grid.n_controls; ++c) {
        controls[c] = -a_max + 2.0 * a_max * static_cast<double>(c) / static_cast<double>(grid.n_controls - 1);
    }
    const std::size_t k_lo = static_cast<std::size_t>(std::llround(grid.margin / grid.dx));
    const std::size_t k_hi = std::min(n - 1, k_lo + static_cast<std::size_t>(std::llround((grid.x_hi - grid.x_lo) / grid.dx)));

    // Start from the value of standing still against the opponent drift.
    br.v = hx;

    // Node update with the neighbour value substituted linearly:
    // v_k = c + d v_{k+dir}, minimized over the controls.
    struct Choice {
        double value = 0.0;
        double c = 0.0;
        double d = 0.0;
        int dir = 0;
        std::size_t control = 0;
    };
    auto improve = [&](std::size_t k, const std::vector<double>& src) {
        Choice best;
        best.value = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < controls.size(); ++c) {
            const double a = controls[c];
            const double fl = a - po[k];
            double theta = std::min(1.0, std::abs(fl) * tau / grid.dx);
            int dir = fl > 0.0 ? 1 : (fl < 0.0 ? -1 : 0);
            if ((dir > 0 && k + 1 == n) || (dir < 0 && k == 0)) dir = 0; // clamped foot
            if (dir == 0) theta = 0.0;
            const double den = 1.0 - (1.0 - tau) * (1.0 - theta);
            const double cc = tau * (hx[k] + 0.5 * a * a) / den;
            const double dd = (1.0 - tau) * theta / den;
            const double nb = dir == 0 ? 0.0 : src[static_cast<std::size_t>(static_cast<long>(k) + dir)];
            const double val = cc + dd * nb;
            if (val < best.value) best = {val, cc, dd, dir, c};
        }
        return best;
    };

    std::vector<Choice> policy(n);
    std::vector<double> old;
    for (std::size_t it = 0; it < grid.max_iterations; ++it) {
        old = br.v;
        for (std::size_t k = 0; k < n; ++k) policy[k] = improve(k, old);
        if (grid.mode == SweepMode::Jacobi) {
            for (std::size_t k = 0; k < n; ++k) br.v[k] = policy[k].value;
        } else {
            // Exact evaluation of the policy. Every node depends on at most one
            // neighbour, so the only cycles are pairs pointing at each other;
            // solve those, then follow right-pointing chains leftwards and
            // left-pointing chains rightwards.
            std::vector<char> done(n, 0);
            for (std::size_t k = 0; k < n; ++k) {
                if (policy[k].dir == 0) {
                    br.v[k] = policy[k].c;
                    done[k] = 1;
                } else if (policy[k].dir > 0 && policy[k + 1].dir < 0) {
                    const Choice& a = policy[k];
                    const Choice& b = policy[k + 1];
                    br.v[k] = (a.c + a.d * b.c) / (1.0 - a.d * b.d);
                    br.v[k + 1] = b.c + b.d * br.v[k];
                    done[k] = done[k + 1] = 1;
                }
            }
            for (std::size_t m = n; m-- > 0;) {
                if (!done[m] && policy[m].dir > 0) br.v[m] = policy[m].c + policy[m].d * br.v[m + 1];
            }
            for (std::size_t m = 0; m < n; ++m) {
                if (!done[m] && policy[m].dir < 0) br.v[m] = policy[m].c + policy[m].d * br.v[m - 1];
            }
        }
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(br.v[k] - old[k]));
        br.sweep_changes.push_back(change);
        br.iterations = it + 1;
        if (change <= grid.tolerance) {
            br.converged = true;
            break;
        }
    }
    if (!br.converged && !grid.allow_unconverged) {
        throw Error(ErrorCode::NonConvergence, "value iteration did not settle within " +
                                                   std::to_string(grid.max_iterations) + " sweeps");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Choice ch = improve(k, br.v);
        const bool at_bound = ch.control == 0 || ch.control + 1 == controls.size();
        if (at_bound && k >= k_lo && k <= k_hi) br.control_bound_hit = true;
        const double drift = controls[ch.control] - po[k];
        if ((k == 0 && drift < 0.0) || (k == n - 1 && drift > 0.0)) br.clamped = true;
    }
    return br;
}

struct DeviationReport {
    Player player = Player::One;
    double y = 0.0;
    double nash_cost = 0.0;
    double best_response_value = 0.0;
    double gap = 0.0;
    double tau = 0.0;
    bool clamped = false;
    bool control_bound_hit = false;
};

/// Largest |p| over the solution's profile rows (or its pieces' samples).
inline double profile_scale(const AdmissibleSolution& sol) {
    double m = 0.0;
    for (const auto& r : sol.profile) m = std::max({m, std::abs(r.p.c1), std::abs(r.p.c2)});
    for (const auto& pc : sol.pieces) {
        if (pc.kind == PieceKind::Constant) m = std::max({m, std::abs(pc.value.c1), std::abs(pc.value.c2)});
        for (const auto& s : pc.orbit.samples) m = std::max({m, std::abs(s.p.c1), std::abs(s.p.c2)});
    }
    return m;
}

/// Cost of each player under the candidate feedback against the value of
/// its best response to the other player's feedback.
inline std::pair<DeviationReport, DeviationReport> deviation_gap(const AdmissibleSolution& sol, const CostSpec& spec,
                                                                 double y, GridParams grid,
                                                                 const SimulationOptions& sim = {},
                                                                 double horizon = 40.0) {
    if (!(y > grid.x_lo && y < grid.x_hi)) {
        throw Error(ErrorCode::PreconditionViolation, "initial state must lie inside the grid window");
    }
    if (!grid.control_bound) grid.control_bound = 2.0 * profile_scale(sol) + 1.0;
    AdmissibleSolution run_sol = sol;
    run_sol.spec = spec;
    const ClosedLoopRun run = simulate_closed_loop(run_sol, y, horizon, sim);
    std::array<DeviationReport, 2> out;
    for (Player pl : {Player::One, Player::Two}) {
        const std::size_t j = index_of(other(pl));
        const double off = sim.control_offset[j];
        auto p_opp = [&](double x) { return sol.p_at(x)[j] - off; };
        const BestResponse br = best_response(spec, p_opp, pl, grid);
        DeviationReport& d = out[index_of(pl)];
        d.player = pl;
        d.y = y;
        d.nash_cost = run.costs[index_of(pl)];
        d.best_response_value = br.value_at(y);
        d.gap = d.nash_cost - d.best_response_value;
        d.tau = br.tau;
        d.clamped = br.clamped;
        d.control_bound_hit = br.control_bound_hit;
    }
    return {out[0], out[1]};
}

} // namespace hjgame

#endif
