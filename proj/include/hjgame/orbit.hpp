// Orbits of the rescaled system within one interval's dynamics: adaptive
// integration with stop events, stable/unstable manifold shooting at the
// origin saddle, polyline intersection of two orbits, and recovery of the
// physical coordinate x along an orbit (dx/ds = Delta(p)).
#ifndef HJGAME_ORBIT_HPP
#define HJGAME_ORBIT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "ode.hpp"
#include "phase_dynamics.hpp"

namespace hjgame {

struct PhaseState {
    Vec2 p;
    double s = 0.0;
    double x = 0.0;
};

enum class Termination { ReachedEquilibrium, ReachedOrigin, BlowUp, SpanExhausted, CrossedBreakpoint };

inline std::string to_string(Termination t) {
    switch (t) {
    case Termination::ReachedEquilibrium: return "ReachedEquilibrium";
    case Termination::ReachedOrigin: return "ReachedOrigin";
    case Termination::BlowUp: return "BlowUp";
    case Termination::SpanExhausted: return "SpanExhausted";
    case Termination::CrossedBreakpoint: return "CrossedBreakpoint";
    }
    return "Unknown";
}

enum class ManifoldTag { None, StableOfOrigin, UnstableOfOrigin };
enum class Direction { Forward, Backward };
enum class Side { Plus, Minus };

/// Where an orbit end meets the origin in x. The remaining x-length beyond
/// the last sample is finite because Delta decays exponentially in s.
struct OriginLimit {
    double x_limit = 0.0;
    double tail = 0.0;       // |x_limit - x of the end sample|
    double tail_error = 0.0; // disagreement between the fitted and linearized decay rates
};

struct Orbit {
    Vec2 slopes;                       // K of the generating dynamics
    std::vector<PhaseState> samples;   // ordered by increasing s
    Termination termination = Termination::SpanExhausted;
    double termination_value = std::numeric_limits<double>::quiet_NaN(); // blow-up s or crossed x
    ManifoldTag manifold_tag = ManifoldTag::None;
    /// Forward: integrated from samples.front(), termination describes the back.
    /// Backward: integrated from samples.back(), termination describes the front.
    Direction direction = Direction::Forward;
    /// False for hand-built polylines; interpolation is then linear.
    bool has_field = true;
    std::optional<OriginLimit> front_limit;
    std::optional<OriginLimit> back_limit;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double x_begin() const { return front_limit ? front_limit->x_limit : samples.front().x; }
    double x_end() const { return back_limit ? back_limit->x_limit : samples.back().x; }
};

struct StopConditions {
    double s_span = 1000.0;
    double blowup_radius = 1e6;
    double origin_radius = 1e-8;
    double equilibrium_radius = 1e-8;
    std::optional<double> x_stop;
    std::size_t max_steps = 4'000'000;
};

using IntegratorOptions = ode::StepperOptions;

namespace detail {

using OrbitState = ode::State<3>;

struct OrbitRhs {
    Vec2 k;
    OrbitState operator()(double, const OrbitState& y) const {
        const Vec2 p{y[0], y[1]};
        const Vec2 f = vector_field(p, k);
        return {f.c1, f.c2, capital_delta(p)};
    }
};

using OrbitStepper = ode::DormandPrince45<3, OrbitRhs>;

inline OrbitStepper make_stepper(const Vec2& k, const IntegratorOptions& opts) {
    return OrbitStepper(OrbitRhs{k}, opts, {0, 0, 1});
}

inline ode::StepResult<3> segment(const Orbit& orbit, std::size_t i) {
    const PhaseState& a = orbit.samples[i];
    const PhaseState& b = orbit.samples[i + 1];
    const OrbitRhs rhs{orbit.slopes};
    ode::StepResult<3> st;
    st.t0 = a.s;
    st.t1 = b.s;
    st.y0 = {a.p.c1, a.p.c2, a.x};
    st.y1 = {b.p.c1, b.p.c2, b.x};
    st.f0 = rhs(a.s, st.y0);
    st.f1 = rhs(b.s, st.y1);
    return st;
}

inline PhaseState to_phase(double s, const OrbitState& y) { return {{y[0], y[1]}, s, y[2]}; }

// Decay rate of Delta at one end of an orbit, fitted on the samples whose
// Delta lies within a factor 10 of the end value.
inline std::optional<double> fitted_delta_rate(const Orbit& orbit, bool at_back) {
    const auto& smp = orbit.samples;
    const std::size_t n = smp.size();
    if (n < 3) return std::nullopt;
    const double d_end = capital_delta(at_back ? smp.back().p : smp.front().p);
    if (!(d_end > 0.0)) return std::nullopt;
    double ss = 0, sd = 0, sss = 0, ssd = 0;
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const PhaseState& ps = at_back ? smp[n - 1 - j] : smp[j];
        const double d = capital_delta(ps.p);
        if (!(d > 0.0) || d > 10.0 * d_end) break;
        const double ld = std::log(d);
        ss += ps.s;
        sd += ld;
        sss += ps.s * ps.s;
        ssd += ps.s * ld;
        ++m;
    }
    if (m < 3) return std::nullopt;
    const double denom = m * sss - ss * ss;
    if (denom <= 0.0) return std::nullopt;
    const double slope = (m * ssd - ss * sd) / denom;
    if (!std::isfinite(slope) || slope == 0.0) return std::nullopt;
    return std::abs(slope);
}

} // namespace detail

/// Finite x-limit at the origin end of an orbit (back end if at_back).
/// Near the saddle Delta ~ exp(-c |s|), so the remaining x-length is
/// Delta_end / c. The rate is fitted on the last decade of Delta and
/// compared with the linearized rate 2 |lambda|.
inline OriginLimit origin_limit(const Orbit& orbit, bool at_back) {
    const PhaseState& end = at_back ? orbit.samples.back() : orbit.samples.front();
    const double d_end = capital_delta(end.p);
    const double linear_rate = 2.0 * linearization(orbit.slopes).lambda_plus;
    const auto fitted = detail::fitted_delta_rate(orbit, at_back);
    const double rate = fitted.value_or(linear_rate);
    OriginLimit lim;
    lim.tail = d_end / rate;
    lim.tail_error = std::abs(d_end / rate - d_end / linear_rate);
    lim.x_limit = at_back ? end.x + lim.tail : end.x - lim.tail;
    return lim;
}

/// Integrates (dp/ds, dx/ds) = (vector_field(p, K), Delta(p)) from p0 at
/// (s, x) = (0, x0) until the first stop condition triggers. Backward
/// integration runs toward negative s; its samples are still returned in
/// increasing s, ending with the initial point.
inline Orbit integrate(const Vec2& p0, const Vec2& k, Direction direction, const StopConditions& stop = {},
                       const IntegratorOptions& opts = {}, double x0 = 0.0) {
    if (!(stop.s_span > 0.0) || !(stop.blowup_radius > stop.origin_radius) || stop.origin_radius < 0.0 ||
        stop.equilibrium_radius < 0.0 || !is_finite(p0)) {
        throw Error(ErrorCode::InvalidStopConditions, "inconsistent stop conditions or initial point");
    }
    const double dir = direction == Direction::Forward ? 1.0 : -1.0;
    if (stop.x_stop && dir * (*stop.x_stop - x0) <= 0.0) {
        throw Error(ErrorCode::InvalidStopConditions, "x_stop lies behind the initial point");
    }

    Orbit orbit;
    orbit.slopes = k;
    orbit.direction = direction;
    auto stepper = detail::make_stepper(k, opts);

    const bool started_off_origin = norm(p0) > stop.origin_radius;
    const bool started_off_equilibrium = norm(p0 - k) > stop.equilibrium_radius;

    detail::OrbitState y{p0.c1, p0.c2, x0};
    detail::OrbitState f = stepper.eval(0.0, y);
    double s = 0.0;
    double h = dir * opts.initial_step;
    std::vector<PhaseState> out;
    out.push_back(detail::to_phase(s, y));

    Termination term = Termination::SpanExhausted;
    double term_value = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t n = 0;; ++n) {
        if (n >= stop.max_steps) break;
        const double remaining = stop.s_span - std::abs(s);
        if (remaining <= 0.0) break;
        if (std::abs(h) > remaining) h = dir * remaining;
        const double h_used_cap = h;
        auto st = stepper.step(s, y, f, h);
        (void)h_used_cap;

        if (stop.x_stop && dir * (st.y1[2] - *stop.x_stop) >= 0.0) {
            // Locate the crossing on the Hermite interpolant of x(s), then
            // land on it with one exact step from the start of the interval.
            double lo = st.t0, hi = st.t1;
            for (int it = 0; it < 200 && lo != hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                if (dir * (ode::hermite(st, 2, mid) - *stop.x_stop) >= 0.0) hi = mid;
                else lo = mid;
            }
            auto exact = stepper.fixed_step(st.t0, st.y0, st.f0, hi - st.t0);
            exact.y1[2] = *stop.x_stop;
            out.push_back(detail::to_phase(exact.t1, exact.y1));
            term = Termination::CrossedBreakpoint;
            term_value = *stop.x_stop;
            break;
        }

        s = st.t1;
        y = st.y1;
        f = st.f1;
        out.push_back(detail::to_phase(s, y));
        const Vec2 p{y[0], y[1]};
        const double r = norm(p);
        if (r >= stop.blowup_radius) {
            // Riccati-type growth |p|' ~ |p|^2: remaining s to blow-up ~ |p| / |p|'.
            const Vec2 fp{f[0], f[1]};
            const double rate = std::abs(dot(p, fp)) / r;
            term = Termination::BlowUp;
            term_value = s + dir * (rate > 0.0 ? r / rate : 0.0);
            break;
        }
        if (started_off_origin && r <= stop.origin_radius) {
            term = Termination::ReachedOrigin;
            break;
        }
        if (started_off_equilibrium && norm(p - k) <= stop.equilibrium_radius) {
            term = Termination::ReachedEquilibrium;
            break;
        }
    }

    if (direction == Direction::Backward) std::reverse(out.begin(), out.end());
    orbit.samples = std::move(out);
    orbit.termination = term;
    orbit.termination_value = term_value;
    if (term == Termination::ReachedOrigin) {
        if (direction == Direction::Forward) orbit.back_limit = origin_limit(orbit, true);
        else orbit.front_limit = origin_limit(orbit, false);
    }
    return orbit;
}

/// Offset of manifold shots from the saddle, scaled by the saddle rate.
inline double manifold_offset(const Vec2& k) { return 1e-6 * linearization(k).lambda_plus; }

namespace detail {

inline IntegratorOptions shooting_options(IntegratorOptions opts, double eps) {
    // Absolute tolerance must resolve the initial offset itself.
    opts.abs_tol = std::min(opts.abs_tol, opts.rel_tol * eps);
    return opts;
}

inline Vec2 unit(const Vec2& v) { return (1.0 / norm(v)) * v; }

} // namespace detail

/// Branch of the unstable manifold of the origin leaving along +/- v_plus.
/// s = 0 and x = 0 at the first sample; the front origin limit is set.
inline Orbit shoot_unstable(const Vec2& k, Side side, const StopConditions& stop = {},
                            const IntegratorOptions& opts = {}, std::optional<double> offset = std::nullopt) {
    const EigenData e = linearization(k);
    const double eps = offset.value_or(manifold_offset(k));
    const Vec2 p0 = (side == Side::Plus ? eps : -eps) * detail::unit(e.v_plus);
    Orbit orbit = integrate(p0, k, Direction::Forward, stop, detail::shooting_options(opts, eps));
    orbit.manifold_tag = ManifoldTag::UnstableOfOrigin;
    orbit.front_limit = origin_limit(orbit, false);
    return orbit;
}

/// Branch of the stable manifold of the origin arriving along +/- v_minus.
/// Read in increasing s the orbit approaches the origin; the last sample
/// has s = 0 and x = 0 and the back origin limit is set.
inline Orbit shoot_stable(const Vec2& k, Side side, const StopConditions& stop = {},
                          const IntegratorOptions& opts = {}, std::optional<double> offset = std::nullopt) {
    const EigenData e = linearization(k);
    const double eps = offset.value_or(manifold_offset(k));
    const Vec2 p0 = (side == Side::Plus ? eps : -eps) * detail::unit(e.v_minus);
    Orbit orbit = integrate(p0, k, Direction::Backward, stop, detail::shooting_options(opts, eps));
    orbit.manifold_tag = ManifoldTag::StableOfOrigin;
    orbit.back_limit = origin_limit(orbit, true);
    return orbit;
}

/// Shifts x so that samples[anchor_index].x == anchor_x (origin limits move
/// along).
inline Orbit reconstruct_x(Orbit orbit, double anchor_x, std::size_t anchor_index) {
    if (anchor_index >= orbit.samples.size()) {
        throw Error(ErrorCode::AnchorOutOfRange, "anchor index " + std::to_string(anchor_index) +
                                                     " beyond " + std::to_string(orbit.samples.size()) +
                                                     " samples");
    }
    const double shift = anchor_x - orbit.samples[anchor_index].x;
    for (auto& ps : orbit.samples) ps.x += shift;
    if (orbit.front_limit) orbit.front_limit->x_limit += shift;
    if (orbit.back_limit) orbit.back_limit->x_limit += shift;
    return orbit;
}

/// Shifts x so that the front (or back) origin limit sits at anchor_x.
inline Orbit anchor_origin_limit(Orbit orbit, double anchor_x, bool at_back) {
    const auto& lim = at_back ? orbit.back_limit : orbit.front_limit;
    if (!lim) throw Error(ErrorCode::AnchorOutOfRange, "orbit end does not reach the origin");
    const double shift = anchor_x - lim->x_limit;
    for (auto& ps : orbit.samples) ps.x += shift;
    if (orbit.front_limit) orbit.front_limit->x_limit += shift;
    if (orbit.back_limit) orbit.back_limit->x_limit += shift;
    return orbit;
}

/// State at parameter s inside segment i (Hermite, or linear for polylines).
inline PhaseState state_at_s(const Orbit& orbit, std::size_t i, double s) {
    const PhaseState& a = orbit.samples[i];
    const PhaseState& b = orbit.samples[i + 1];
    if (!orbit.has_field) {
        const double t = b.s == a.s ? 0.0 : (s - a.s) / (b.s - a.s);
        return {a.p + t * (b.p - a.p), s, a.x + t * (b.x - a.x)};
    }
    const auto st = detail::segment(orbit, i);
    return {{ode::hermite(st, 0, s), ode::hermite(st, 1, s)}, s, ode::hermite(st, 2, s)};
}

/// Exact state at parameter s inside segment i, obtained by one RK step from
/// the segment start. Used to cut orbits at located points.
inline PhaseState exact_state_at_s(const Orbit& orbit, std::size_t i, double s,
                                   const IntegratorOptions& opts = {}) {
    if (!orbit.has_field) return state_at_s(orbit, i, s);
    const auto stepper = detail::make_stepper(orbit.slopes, opts);
    const PhaseState& a = orbit.samples[i];
    const detail::OrbitState y{a.p.c1, a.p.c2, a.x};
    const auto res = stepper.fixed_step(a.s, y, stepper.eval(a.s, y), s - a.s);
    return detail::to_phase(s, res.y1);
}

/// p at physical coordinate x, for x within [front sample x, back sample x].
/// Values beyond the sampled range but inside an origin limit clamp to the
/// end sample.
inline Vec2 p_at_x(const Orbit& orbit, double x) {
    const auto& smp = orbit.samples;
    if (x <= smp.front().x) return smp.front().p;
    if (x >= smp.back().x) return smp.back().p;
    const auto it = std::upper_bound(smp.begin(), smp.end(), x,
                                     [](double v, const PhaseState& ps) { return v < ps.x; });
    const std::size_t i = static_cast<std::size_t>(it - smp.begin()) - 1;
    const PhaseState& a = smp[i];
    const PhaseState& b = smp[i + 1];
    if (b.x == a.x) return a.p;
    if (!orbit.has_field) {
        const double t = (x - a.x) / (b.x - a.x);
        return a.p + t * (b.p - a.p);
    }
    const auto st = detail::segment(orbit, i);
    double lo = a.s, hi = b.s;
    for (int it2 = 0; it2 < 100; ++it2) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (ode::hermite(st, 2, mid) < x) lo = mid;
        else hi = mid;
    }
    const double s = 0.5 * (lo + hi);
    return {ode::hermite(st, 0, s), ode::hermite(st, 1, s)};
}

/// Keeps the part of the orbit up to parameter s inside segment i; the new
/// last sample is the exact state at s.
inline Orbit truncate_after(Orbit orbit, std::size_t i, double s, const IntegratorOptions& opts = {}) {
    const PhaseState cut = exact_state_at_s(orbit, i, s, opts);
    orbit.samples.resize(i + 1);
    if (s > orbit.samples.back().s) orbit.samples.push_back(cut);
    else orbit.samples.back() = cut;
    orbit.back_limit.reset();
    return orbit;
}

/// Keeps the part of the orbit from parameter s inside segment i onwards.
inline Orbit truncate_before(Orbit orbit, std::size_t i, double s, const IntegratorOptions& opts = {}) {
    const PhaseState cut = exact_state_at_s(orbit, i, s, opts);
    std::vector<PhaseState> kept;
    kept.push_back(cut);
    for (std::size_t j = i + 1; j < orbit.samples.size(); ++j) {
        if (orbit.samples[j].s > cut.s) kept.push_back(orbit.samples[j]);
    }
    orbit.samples = std::move(kept);
    orbit.front_limit.reset();
    return orbit;
}

struct Crossing {
    Vec2 p;
    std::size_t segment_a = 0;
    double s_a = 0.0;
    std::size_t segment_b = 0;
    double s_b = 0.0;
};

namespace detail {

struct Box {
    double lo1, hi1, lo2, hi2;
    bool overlaps(const Box& o) const { return lo1 <= o.hi1 && o.lo1 <= hi1 && lo2 <= o.hi2 && o.lo2 <= hi2; }
};

inline Box chunk_box(const Orbit& o, std::size_t first, std::size_t last) {
    Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t j = first; j <= last; ++j) {
        b.lo1 = std::min(b.lo1, o.samples[j].p.c1);
        b.hi1 = std::max(b.hi1, o.samples[j].p.c1);
        b.lo2 = std::min(b.lo2, o.samples[j].p.c2);
        b.hi2 = std::max(b.hi2, o.samples[j].p.c2);
    }
    return b;
}

// Chord intersection of segments [a0,a1] and [b0,b1]; parameters in [0,1].
inline std::optional<std::pair<double, double>> chord_crossing(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                                                               const Vec2& b1) {
    const Vec2 da = a1 - a0;
    const Vec2 db = b1 - b0;
    const double denom = cross(da, db);
    const double scale = norm(da) * norm(db);
    if (scale == 0.0 || std::abs(denom) <= 1e-14 * scale) return std::nullopt;
    const Vec2 w = b0 - a0;
    const double t = cross(w, db) / denom;
    const double u = cross(w, da) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return std::make_pair(t, u);
}

// Refines a chord crossing on the Hermite arcs of both segments by damped
// Newton iteration in the segment parameters, followed by bisection along
// arc A on the signed side of arc B when Newton leaves the segments.
inline Crossing refine_crossing(const Orbit& a, std::size_t i, const Orbit& b, std::size_t j, double t, double u) {
    const PhaseState& a0 = a.samples[i];
    const PhaseState& a1 = a.samples[i + 1];
    const PhaseState& b0 = b.samples[j];
    const PhaseState& b1 = b.samples[j + 1];
    Crossing c;
    c.segment_a = i;
    c.segment_b = j;
    c.s_a = a0.s + t * (a1.s - a0.s);
    c.s_b = b0.s + u * (b1.s - b0.s);
    c.p = a0.p + t * (a1.p - a0.p);
    if (!a.has_field || !b.has_field) return c;

    const auto sa = segment(a, i);
    const auto sb = segment(b, j);
    auto pa = [&](double s) { return Vec2{ode::hermite(sa, 0, s), ode::hermite(sa, 1, s)}; };
    auto pb = [&](double s) { return Vec2{ode::hermite(sb, 0, s), ode::hermite(sb, 1, s)}; };
    auto da = [&](double s) { return Vec2{ode::hermite_derivative(sa, 0, s), ode::hermite_derivative(sa, 1, s)}; };
    auto db = [&](double s) { return Vec2{ode::hermite_derivative(sb, 0, s), ode::hermite_derivative(sb, 1, s)}; };

    double s1 = c.s_a, s2 = c.s_b;
    const double lo1 = std::min(a0.s, a1.s), hi1 = std::max(a0.s, a1.s);
    const double lo2 = std::min(b0.s, b1.s), hi2 = std::max(b0.s, b1.s);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const Vec2 r = pa(s1) - pb(s2);
        if (norm(r) < 1e-15 * std::max(1.0, norm(pa(s1)))) {
            ok = true;
            break;
        }
        const Vec2 ja = da(s1);
        const Vec2 jb = -db(s2);
        const double det = cross(ja, jb);
        if (det == 0.0) break;
        // Solve [ja jb] [d1 d2]^T = -r
        const double d1 = -cross(r, jb) / det;
        const double d2 = -cross(ja, r) / det;
        s1 += d1;
        s2 += d2;
        if (s1 < lo1 - 1e-12 * (hi1 - lo1 + 1) || s1 > hi1 + 1e-12 * (hi1 - lo1 + 1) ||
            s2 < lo2 - 1e-12 * (hi2 - lo2 + 1) || s2 > hi2 + 1e-12 * (hi2 - lo2 + 1)) {
            break;
        }
        if (std::abs(d1) + std::abs(d2) < 1e-16 * (1.0 + std::abs(s1) + std::abs(s2))) {
            ok = true;
            break;
        }
    }
    if (ok && s1 >= lo1 && s1 <= hi1 && s2 >= lo2 && s2 <= hi2) {
        c.s_a = s1;
        c.s_b = s2;
        c.p = pa(s1);
        return c;
    }
    // Bisection on arc A against the chord of arc B.
    auto side = [&](double s) { return cross(b1.p - b0.p, pa(s) - b0.p); };
    double lo = a0.s, hi = a1.s;
    double flo = side(lo);
    if (flo * side(hi) > 0.0) return c;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = side(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    c.s_a = 0.5 * (lo + hi);
    c.p = pa(c.s_a);
    const Vec2 db_chord = b1.p - b0.p;
    const double uu = std::clamp(dot(c.p - b0.p, db_chord) / dot(db_chord, db_chord), 0.0, 1.0);
    c.s_b = b0.s + uu * (b1.s - b0.s);
    return c;
}

} // namespace detail

/// A point where the polylines through the samples of a and b cross, refined
/// on the interpolating arcs. Among several crossings the one with smallest
/// |p| is returned; crossings with |p| <= exclude_radius are ignored (two
/// manifold branches always meet at the saddle itself).
inline std::optional<Crossing> find_intersection(const Orbit& a, const Orbit& b, double exclude_radius = 0.0) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    constexpr std::size_t chunk = 32;
    const std::size_t na = a.size() - 1;
    const std::size_t nb = b.size() - 1;
    std::vector<detail::Box> boxes_b;
    for (std::size_t j = 0; j < nb; j += chunk) boxes_b.push_back(detail::chunk_box(b, j, std::min(nb, j + chunk)));

    std::optional<Crossing> best;
    for (std::size_t i0 = 0; i0 < na; i0 += chunk) {
        const std::size_t i1 = std::min(na, i0 + chunk);
        const detail::Box box_a = detail::chunk_box(a, i0, i1);
        for (std::size_t cb = 0; cb < boxes_b.size(); ++cb) {
            if (!box_a.overlaps(boxes_b[cb])) continue;
            const std::size_t j0 = cb * chunk;
            const std::size_t j1 = std::min(nb, j0 + chunk);
            for (std::size_t i = i0; i < i1; ++i) {
                for (std::size_t j = j0; j < j1; ++j) {
                    const auto tu = detail::chord_crossing(a.samples[i].p, a.samples[i + 1].p, b.samples[j].p,
                                                           b.samples[j + 1].p);
                    if (!tu) continue;
                    const Vec2 chord_p = a.samples[i].p + tu->first * (a.samples[i + 1].p - a.samples[i].p);
                    if (norm(chord_p) <= exclude_radius) continue;
                    if (best && norm(chord_p) >= norm(best->p) + 1e-9) continue;
                    Crossing c = detail::refine_crossing(a, i, b, j, tu->first, tu->second);
                    if (norm(c.p) <= exclude_radius) continue;
                    if (!best || norm(c.p) < norm(best->p)) best = c;
                }
            }
        }
    }
    return best;
}

} // namespace hjgame

#endif
