// Constructions of admissible solutions for each supported regime, plus the
// numerical nonexistence certificate.
#ifndef HJGAME_BUILDERS_HPP
#define HJGAME_BUILDERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "game_model.hpp"
#include "orbit.hpp"
#include "phase_dynamics.hpp"
#include "solution.hpp"

namespace hjgame {

struct BuildOptions {
    AdmissibilityTolerances tolerances;
    IntegratorOptions integrator;
    StopConditions stop;
    int max_halvings = 20;              // family data: retries at half the radius
    double crossing_exclude_radius = 1e-4;
    double box_slack = 1e-9;
};

/// The invariant box {p in [0, 2 C1]^2, p1 + p2 >= C2 / 2} for an interval
/// with slopes k entered at p_entry.
struct InvariantBox {
    double c1 = 0.0;
    double c2 = 0.0;

    bool contains(const Vec2& p, double slack = 0.0) const {
        const double sc = slack * std::max(1.0, c1);
        return p.c1 >= -sc && p.c2 >= -sc && p.c1 <= 2.0 * c1 + sc && p.c2 <= 2.0 * c1 + sc &&
               p.c1 + p.c2 >= 0.5 * c2 - sc;
    }
};

inline InvariantBox invariant_box(const Vec2& k, const Vec2& entry) {
    return {std::max({k.c1, k.c2, 0.5 * entry.c1, 0.5 * entry.c2}), std::min({k.c1, k.c2, entry.c1 + entry.c2})};
}

namespace detail {

inline void require_regime(const CostSpec& spec, std::initializer_list<Regime> allowed, const char* what) {
    const RegimeReport rr = classify_regime(spec);
    if (std::find(allowed.begin(), allowed.end(), rr.regime) == allowed.end()) {
        throw Error(ErrorCode::RegimeMismatch,
                    std::string(what) + " does not apply to regime " + to_string(rr.regime));
    }
}

inline bool positive_cooperative(const CostSpec& spec) { return spec.slopes.front().c1 > 0.0; }

// Orbit across [x_from, x_to] without equilibrium stop, so that the piece
// always reaches the far breakpoint.
inline Orbit cross_interval(const Vec2& p_entry, const Vec2& k, double x_from, double x_to, const BuildOptions& opts) {
    StopConditions st = opts.stop;
    st.equilibrium_radius = 0.0;
    st.x_stop = x_to;
    const double d = std::max(1e-12, std::min(capital_delta(p_entry), capital_delta(k)));
    st.s_span = std::max(st.s_span, 4.0 * std::abs(x_to - x_from) / d + 100.0);
    const Direction dir = x_to > x_from ? Direction::Forward : Direction::Backward;
    Orbit o = integrate(p_entry, k, dir, st, opts.integrator, x_from);
    if (o.termination != Termination::CrossedBreakpoint) {
        throw Error(ErrorCode::ConvergenceFailure, "orbit stopped (" + to_string(o.termination) +
                                                       ") before reaching x=" + std::to_string(x_to));
    }
    return o;
}

inline void check_box(const Orbit& o, const Vec2& k, const Vec2& entry, bool mirrored, double slack) {
    const InvariantBox box = mirrored ? invariant_box(-k, -entry) : invariant_box(k, entry);
    for (const auto& smp : o.samples) {
        if (!box.contains(mirrored ? -smp.p : smp.p, slack)) {
            throw Error(ErrorCode::InvariantBoxViolation,
                        "sample (" + std::to_string(smp.p.c1) + ", " + std::to_string(smp.p.c2) + ") at x=" +
                            std::to_string(smp.x) + " left the invariant box");
        }
    }
}

} // namespace detail

/// Unique admissible solution for cooperative costs. For slopes in A1/A2 the
/// first interval carries p = K0 and each later interval continues the
/// previous endpoint forward; the last one runs to its equilibrium. Slopes
/// in A5/A6 are handled by the mirror image: p = K^N on the last interval and
/// backward continuation to the left.
inline AdmissibleSolution build_cooperative(const CostSpec& spec, const BuildOptions& opts = {}) {
    detail::require_regime(spec, {Regime::CooperativeUnique}, "cooperative construction");
    constexpr double inf = std::numeric_limits<double>::infinity();
    AdmissibleSolution sol;
    sol.spec = spec;
    sol.regime = Regime::CooperativeUnique;
    sol.construction = "cooperative";
    const auto& bp = spec.breakpoints;
    const auto& ks = spec.slopes;
    const std::size_t n = bp.size();

    if (n == 0) {
        sol.pieces.push_back(Piece::constant(ks[0], ks[0], -inf, inf));
    } else if (detail::positive_cooperative(spec)) {
        sol.pieces.push_back(Piece::constant(ks[0], ks[0], -inf, bp[0]));
        Vec2 entry = ks[0];
        for (std::size_t j = 1; j < n; ++j) {
            Orbit o = detail::cross_interval(entry, ks[j], bp[j - 1], bp[j], opts);
            detail::check_box(o, ks[j], entry, false, opts.box_slack);
            entry = o.samples.back().p;
            sol.pieces.push_back(Piece::from_orbit(std::move(o)));
        }
        StopConditions st = opts.stop;
        st.x_stop.reset();
        Orbit last = integrate(entry, ks[n], Direction::Forward, st, opts.integrator, bp[n - 1]);
        if (last.termination != Termination::ReachedEquilibrium && norm(entry - ks[n]) > st.equilibrium_radius) {
            throw Error(ErrorCode::ConvergenceFailure,
                        "last orbit ended with " + to_string(last.termination) + " instead of its equilibrium");
        }
        detail::check_box(last, ks[n], entry, false, opts.box_slack);
        sol.pieces.push_back(Piece::from_orbit(std::move(last)));
        sol.pieces.push_back(Piece::constant(ks[n], ks[n], sol.pieces.back().x_hi, inf));
    } else {
        std::vector<Piece> rev;
        rev.push_back(Piece::constant(ks[n], ks[n], bp[n - 1], inf));
        Vec2 entry = ks[n];
        for (std::size_t j = n - 1; j >= 1; --j) {
            Orbit o = detail::cross_interval(entry, ks[j], bp[j], bp[j - 1], opts);
            detail::check_box(o, ks[j], entry, true, opts.box_slack);
            entry = o.samples.front().p;
            rev.push_back(Piece::from_orbit(std::move(o)));
        }
        StopConditions st = opts.stop;
        st.x_stop.reset();
        Orbit first = integrate(entry, ks[0], Direction::Backward, st, opts.integrator, bp[0]);
        if (first.termination != Termination::ReachedEquilibrium && norm(entry - ks[0]) > st.equilibrium_radius) {
            throw Error(ErrorCode::ConvergenceFailure,
                        "first orbit ended with " + to_string(first.termination) + " instead of its equilibrium");
        }
        detail::check_box(first, ks[0], entry, true, opts.box_slack);
        rev.push_back(Piece::from_orbit(std::move(first)));
        rev.push_back(Piece::constant(ks[0], ks[0], -inf, rev.back().x_lo));
        sol.pieces.assign(rev.rbegin(), rev.rend());
    }
    sol.left_tail = {TailKind::Constant, ks.front()};
    sol.right_tail = {TailKind::Constant, ks.back()};
    return finalize(std::move(sol), opts.tolerances);
}

namespace detail {

// Two-sided heteroclinic profile through the datum at the breakpoint:
// backward under K0 to K0, forward under K1 to K1. Returns nothing when
// either side fails to reach its equilibrium.
inline std::optional<AdmissibleSolution> two_sided(const CostSpec& spec, const Vec2& datum, Regime regime,
                                                   const char* name, const BuildOptions& opts) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double b = spec.breakpoints.front();
    const Vec2 k0 = spec.slopes[0];
    const Vec2 k1 = spec.slopes[1];
    StopConditions st = opts.stop;
    st.x_stop.reset();
    Orbit back = integrate(datum, k0, Direction::Backward, st, opts.integrator, b);
    if (back.termination != Termination::ReachedEquilibrium) return std::nullopt;
    Orbit fwd = integrate(datum, k1, Direction::Forward, st, opts.integrator, b);
    if (fwd.termination != Termination::ReachedEquilibrium) return std::nullopt;

    AdmissibleSolution sol;
    sol.spec = spec;
    sol.regime = regime;
    sol.construction = name;
    sol.datum = datum;
    sol.pieces.push_back(Piece::constant(k0, k0, -inf, back.samples.front().x));
    sol.pieces.push_back(Piece::from_orbit(std::move(back)));
    sol.pieces.push_back(Piece::from_orbit(std::move(fwd)));
    sol.pieces.push_back(Piece::constant(k1, k1, sol.pieces.back().x_hi, inf));
    sol.left_tail = {TailKind::Constant, k0};
    sol.right_tail = {TailKind::Constant, k1};
    return sol;
}

inline AdmissibleSolution shrink_until_built(const CostSpec& spec, const Vec2& p_in, Regime regime, const char* name,
                                             const BuildOptions& opts) {
    Vec2 datum = p_in;
    for (int attempt = 0; attempt <= opts.max_halvings; ++attempt) {
        if (auto sol = two_sided(spec, datum, regime, name, opts)) return finalize(std::move(*sol), opts.tolerances);
        datum *= 0.5;
    }
    throw Error(ErrorCode::ConvergenceFailure, "no datum on the ray through the requested one reached both "
                                               "equilibria after " + std::to_string(opts.max_halvings) + " halvings");
}

} // namespace detail

/// Sign pattern of family data for a conflicting spec: p1 < 0 < p2 when the
/// left slopes lie in A4, mirrored (p1 > 0 > p2) for the player-swapped A7.
inline bool family_datum_valid(const CostSpec& spec, const Vec2& p) {
    if (!is_finite(p) || std::abs(p.c1 + p.c2) > 1e-12 * norm(p)) return false;
    const bool a4 = classify_sector(spec.slopes[0]).index == 4;
    return a4 ? (p.c1 < 0.0 && 0.0 < p.c2) : (p.c1 > 0.0 && 0.0 > p.c2);
}

/// One member of the family of solutions for conflicting costs with a
/// repelling left equilibrium. The datum sits on the anti-diagonal at the
/// breakpoint; it is halved along its ray until both orbits converge.
inline AdmissibleSolution build_conflicting_family(const CostSpec& spec, const Vec2& p_in,
                                                   const BuildOptions& opts = {}) {
    detail::require_regime(spec, {Regime::ConflictingMany}, "conflicting family construction");
    if (!family_datum_valid(spec, p_in)) {
        throw Error(ErrorCode::DatumOutsideFamily, "datum must lie on p1 + p2 = 0 with the sign pattern of the "
                                                   "left slope sector");
    }
    return detail::shrink_until_built(spec, p_in, Regime::ConflictingMany, "conflicting-family", opts);
}

/// Open ratio interval (lo, hi) of p2/p1 for mixed-family data.
inline std::pair<double, double> mixed_ratio_bounds(const CostSpec& spec) {
    const double g0 = direction_map(DirectionMap::GMinus, slope_ratio(spec.slopes[0]));
    const double g1 = direction_map(DirectionMap::GMinus, slope_ratio(spec.slopes[1]));
    return {std::min(g0, g1), std::max(g0, g1)};
}

inline bool mixed_datum_valid(const CostSpec& spec, const Vec2& p) {
    if (!is_finite(p) || !(p.c1 < 0.0 && 0.0 < p.c2)) return false;
    const auto [lo, hi] = mixed_ratio_bounds(spec);
    const double r = p.c2 / p.c1;
    return lo < r && r < hi;
}

/// One member of the mixed-case family: datum in the cone between the two
/// G- directions, continued backward to K0 and forward to K1.
inline AdmissibleSolution build_mixed_family(const CostSpec& spec, const Vec2& p_in, const BuildOptions& opts = {}) {
    detail::require_regime(spec, {Regime::MixedMany}, "mixed family construction");
    if (!mixed_datum_valid(spec, p_in)) {
        const auto [lo, hi] = mixed_ratio_bounds(spec);
        throw Error(ErrorCode::DatumOutsideFamily, "datum needs p1 < 0 < p2 and p2/p1 in (" + std::to_string(lo) +
                                                       ", " + std::to_string(hi) + ")");
    }
    return detail::shrink_until_built(spec, p_in, Regime::MixedMany, "mixed-family", opts);
}

/// Crossing of an unstable branch of the origin under k_u with a stable
/// branch under k_s, both cut at the crossing and anchored so that it sits at
/// x = anchor. `unstable` then covers [x_minus, anchor] and `stable`
/// covers [anchor, x_plus].
struct ManifoldJunction {
    Orbit unstable;
    Orbit stable;
    Vec2 point;
    Side unstable_side = Side::Plus;
    Side stable_side = Side::Plus;
    double x_minus = 0.0;
    double x_plus = 0.0;
};

inline std::optional<ManifoldJunction> manifold_junction(const Vec2& k_u, const Vec2& k_s, double anchor,
                                                         const BuildOptions& opts = {}) {
    std::optional<ManifoldJunction> best;
    double best_norm = std::numeric_limits<double>::infinity();
    for (Side su : {Side::Plus, Side::Minus}) {
        const Orbit u = shoot_unstable(k_u, su, opts.stop, opts.integrator);
        for (Side ss : {Side::Plus, Side::Minus}) {
            const Orbit s = shoot_stable(k_s, ss, opts.stop, opts.integrator);
            const auto c = find_intersection(u, s, opts.crossing_exclude_radius);
            if (!c || norm(c->p) >= best_norm) continue;
            best_norm = norm(c->p);
            ManifoldJunction j;
            j.point = c->p;
            j.unstable_side = su;
            j.stable_side = ss;
            Orbit ut = truncate_after(u, c->segment_a, c->s_a, opts.integrator);
            Orbit sv = truncate_before(s, c->segment_b, c->s_b, opts.integrator);
            const std::size_t last = ut.size() - 1;
            j.unstable = reconstruct_x(std::move(ut), anchor, last);
            j.stable = reconstruct_x(std::move(sv), anchor, 0);
            j.x_minus = j.unstable.x_begin();
            j.x_plus = j.stable.x_end();
            best = std::move(j);
        }
    }
    return best;
}

namespace detail {

// The branch of a manifold of the origin that connects to the equilibrium.
inline Orbit connecting_branch(const Vec2& k, bool stable, const BuildOptions& opts) {
    for (Side side : {Side::Plus, Side::Minus}) {
        Orbit o = stable ? shoot_stable(k, side, opts.stop, opts.integrator)
                         : shoot_unstable(k, side, opts.stop, opts.integrator);
        if (o.termination == Termination::ReachedEquilibrium) return o;
    }
    throw Error(ErrorCode::ConvergenceFailure, std::string("no ") + (stable ? "stable" : "unstable") +
                                                   " branch of the origin reaches the equilibrium");
}

} // namespace detail

/// The additional solution through a crossing of the left unstable and right
/// stable manifolds of the origin, extended by the stable branch from K0 on
/// the left and the unstable branch to K1 on the right. Nothing when the
/// manifolds do not cross.
inline std::optional<AdmissibleSolution> build_conflicting_extra(const CostSpec& spec,
                                                                 const BuildOptions& opts = {}) {
    detail::require_regime(spec, {Regime::ConflictingMany}, "extra conflicting solution");
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double b = spec.breakpoints.front();
    const Vec2 k0 = spec.slopes[0];
    const Vec2 k1 = spec.slopes[1];
    auto junction = manifold_junction(k0, k1, b, opts);
    if (!junction) return std::nullopt;

    Orbit left = anchor_origin_limit(detail::connecting_branch(k0, true, opts), junction->x_minus, true);
    Orbit right = anchor_origin_limit(detail::connecting_branch(k1, false, opts), junction->x_plus, false);

    AdmissibleSolution sol;
    sol.spec = spec;
    sol.regime = Regime::ConflictingMany;
    sol.construction = "conflicting-extra";
    sol.datum = junction->point;
    sol.pieces.push_back(Piece::constant(k0, k0, -inf, left.samples.front().x));
    sol.pieces.push_back(Piece::from_orbit(std::move(left)));
    sol.pieces.push_back(Piece::from_orbit(std::move(junction->unstable)));
    sol.pieces.push_back(Piece::from_orbit(std::move(junction->stable)));
    sol.pieces.push_back(Piece::from_orbit(std::move(right)));
    sol.pieces.push_back(Piece::constant(k1, k1, sol.pieces.back().orbit.samples.back().x, inf));
    sol.left_tail = {TailKind::Constant, k0};
    sol.right_tail = {TailKind::Constant, k1};
    return finalize(std::move(sol), opts.tolerances);
}

struct Probe {
    Vec2 p;
    Termination forward = Termination::SpanExhausted;         // under the right dynamics
    std::optional<Termination> backward;                      // under the left dynamics, if needed
    bool inconsistent = false;
    std::string reason;
};

struct NonexistenceCertificate {
    Regime regime = Regime::ConflictingNone;
    std::string argument;
    double radius = 0.0;
    std::vector<Probe> probes;
    std::size_t inconsistent_count = 0;
};

/// Probe points: centres of an m x m grid of cells on [-r, r]^2 (m even, so
/// no centre falls on the origin), taken row by row.
inline std::vector<Vec2> probe_grid(std::size_t n, double r) {
    std::vector<Vec2> pts;
    if (n == 0) return pts;
    auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    if (m % 2 == 1) ++m;
    const double cell = 2.0 * r / static_cast<double>(m);
    for (std::size_t i = 0; i < m && pts.size() < n; ++i) {
        for (std::size_t j = 0; j < m && pts.size() < n; ++j) {
            pts.push_back({-r + (static_cast<double>(j) + 0.5) * cell, -r + (static_cast<double>(i) + 0.5) * cell});
        }
    }
    return pts;
}

/// Verdict for conflicting costs with an attracting left equilibrium, with
/// probe orbits as numerical corroboration. A bounded forward orbit under the
/// right dynamics must end at the origin; such a probe is then continued
/// backward under the left dynamics, which must blow up.
inline NonexistenceCertificate certify_nonexistence(const CostSpec& spec, std::size_t n_probes,
                                                    const BuildOptions& opts = {}) {
    detail::require_regime(spec, {Regime::ConflictingNone}, "nonexistence certificate");
    NonexistenceCertificate cert;
    cert.argument = "a solution bounded as x -> +inf must approach the origin along the stable manifold of the "
                    "right dynamics; continued to the left it diverges, so no admissible solution exists";
    const Vec2 k0 = spec.slopes[0];
    const Vec2 k1 = spec.slopes[1];
    cert.radius = 2.0 * std::max({std::abs(k0.c1), std::abs(k0.c2), std::abs(k1.c1), std::abs(k1.c2)});
    StopConditions st = opts.stop;
    st.x_stop.reset();
    for (const Vec2& p : probe_grid(n_probes, cert.radius)) {
        Probe pr;
        pr.p = p;
        pr.forward = integrate(p, k1, Direction::Forward, st, opts.integrator).termination;
        if (pr.forward == Termination::BlowUp) {
            pr.inconsistent = true;
            pr.reason = "forward orbit blows up";
        } else {
            pr.backward = integrate(p, k0, Direction::Backward, st, opts.integrator).termination;
            pr.inconsistent = *pr.backward == Termination::BlowUp;
            pr.reason = pr.inconsistent ? "bounded forward, backward orbit blows up" : "undetermined";
        }
        if (pr.inconsistent) ++cert.inconsistent_count;
        cert.probes.push_back(std::move(pr));
    }
    return cert;
}

/// Costs repeating with period l = x_plus - x_minus: slopes K0 on
/// ]x_minus + n l, n l[ and K1 on ]n l, x_plus + n l[.
struct PeriodicCost {
    Vec2 k0;
    Vec2 k1;
    double x_minus = 0.0;
    double x_plus = 0.0;

    double period() const { return x_plus - x_minus; }

    Vec2 slopes_at(double x) const {
        const double l = period();
        const double t = x - l * std::floor((x - x_minus) / l);
        return t < 0.0 ? k0 : k1;
    }

    /// Finite spec agreeing with the periodic costs on [lo, hi].
    CostSpec to_spec(double lo, double hi) const {
        const double l = period();
        CostSpec spec;
        const long n_lo = static_cast<long>(std::floor((lo - x_plus) / l)) - 1;
        const long n_hi = static_cast<long>(std::ceil((hi - x_minus) / l)) + 1;
        for (long n = n_lo; n <= n_hi; ++n) {
            for (double b : {x_minus + static_cast<double>(n) * l, static_cast<double>(n) * l}) {
                if (b >= lo && b <= hi) spec.breakpoints.push_back(b);
            }
        }
        std::sort(spec.breakpoints.begin(), spec.breakpoints.end());
        spec.breakpoints.erase(std::unique(spec.breakpoints.begin(), spec.breakpoints.end()), spec.breakpoints.end());
        const auto& bp = spec.breakpoints;
        if (bp.empty()) {
            spec.slopes.push_back(slopes_at(0.5 * (lo + hi)));
            return spec;
        }
        spec.slopes.push_back(slopes_at(bp.front() - 0.25 * l));
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) spec.slopes.push_back(slopes_at(0.5 * (bp[i] + bp[i + 1])));
        spec.slopes.push_back(slopes_at(bp.back() + 0.25 * l));
        return spec;
    }
};

struct PeriodicSpec {
    Vec2 k0;
    Vec2 k1;
};

struct PeriodicResult {
    PeriodicCost cost;
    AdmissibleSolution solution;
};

/// Periodic solution for slopes K0 in A3, K1 in A4: the unstable branch under
/// K0 from the origin to the crossing q, then the stable branch under K1 from
/// q back to the origin, repeated with period l. Throws NoIntersection when
/// the two manifolds never cross.
inline PeriodicResult build_periodic(const PeriodicSpec& ps, const BuildOptions& opts = {}) {
    if (classify_sector(ps.k0).index != 3 || classify_sector(ps.k1).index != 4) {
        throw Error(ErrorCode::PreconditionViolation, "periodic construction needs K0 in A3 and K1 in A4, got " +
                                                          to_string(classify_sector(ps.k0)) + " and " +
                                                          to_string(classify_sector(ps.k1)));
    }
    auto junction = manifold_junction(ps.k0, ps.k1, 0.0, opts);
    if (!junction) {
        throw Error(ErrorCode::NoIntersection, "the unstable manifold under K0 and the stable manifold under K1 "
                                               "do not cross");
    }
    PeriodicResult res;
    res.cost = {ps.k0, ps.k1, junction->x_minus, junction->x_plus};
    const double l = res.cost.period();
    const double margin = 2.0 * l + 40.0;
    AdmissibleSolution sol;
    sol.spec = res.cost.to_spec(opts.tolerances.window_lo - margin, opts.tolerances.window_hi + margin);
    sol.regime = Regime::Periodic;
    sol.construction = "periodic";
    sol.datum = junction->point;
    sol.pieces.push_back(Piece::from_orbit(std::move(junction->unstable)));
    sol.pieces.push_back(Piece::from_orbit(std::move(junction->stable)));
    sol.pieces[0].x_hi = 0.0;
    sol.pieces[1].x_lo = 0.0;
    sol.period = l;
    sol.left_tail = {TailKind::Periodic, {}};
    sol.right_tail = {TailKind::Periodic, {}};
    res.solution = finalize(std::move(sol), opts.tolerances);
    return res;
}

} // namespace hjgame

#endif
