// Piecewise gradient profiles x -> p(x) over the whole line, the value
// functions they induce, and the admissibility check.
#ifndef HJGAME_SOLUTION_HPP
#define HJGAME_SOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "game_model.hpp"
#include "orbit.hpp"
#include "phase_dynamics.hpp"

namespace hjgame {

enum class PieceKind { Constant, Orbit, Tabulated };

inline std::string to_string(PieceKind k) {
    switch (k) {
    case PieceKind::Constant: return "Constant";
    case PieceKind::Orbit: return "Orbit";
    case PieceKind::Tabulated: return "Tabulated";
    }
    return "Unknown";
}

/// One stretch [x_lo, x_hi] of a profile. Constant pieces may extend to
/// +/- infinity; orbit pieces cover the x-range of their samples extended
/// to their origin limits.
struct Piece {
    PieceKind kind = PieceKind::Constant;
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();
    Vec2 slopes;   // K of the dynamics governing this stretch
    Vec2 value;    // p for Constant pieces
    Orbit orbit;   // samples for Orbit and Tabulated pieces

    static Piece constant(const Vec2& k, const Vec2& p, double lo, double hi) {
        Piece pc;
        pc.kind = PieceKind::Constant;
        pc.slopes = k;
        pc.value = p;
        pc.x_lo = lo;
        pc.x_hi = hi;
        return pc;
    }

    static Piece from_orbit(Orbit o) {
        Piece pc;
        pc.kind = o.has_field ? PieceKind::Orbit : PieceKind::Tabulated;
        pc.slopes = o.slopes;
        pc.x_lo = o.x_begin();
        pc.x_hi = o.x_end();
        pc.orbit = std::move(o);
        return pc;
    }

    Vec2 p_at(double x) const { return kind == PieceKind::Constant ? value : p_at_x(orbit, x); }

    /// True when p on this piece follows the field of `slopes`.
    bool has_field() const { return kind != PieceKind::Tabulated; }
};

struct Jump {
    double x = 0.0;
    Vec2 left;
    Vec2 right;
};

enum class TailKind { Constant, Periodic, Unknown };

inline std::string to_string(TailKind k) {
    switch (k) {
    case TailKind::Constant: return "Constant";
    case TailKind::Periodic: return "Periodic";
    case TailKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

/// Behaviour of p beyond the last piece on one side.
struct Tail {
    TailKind kind = TailKind::Unknown;
    Vec2 value; // p on a constant tail
};

struct ProfileRow {
    double x = 0.0;
    Vec2 p;
    Vec2 u;
    int piece = 0;
};

enum class InadmissibleReason { None, Residual, Growth, JumpSign, JumpReflection, JumpWeakOnly };

inline std::string to_string(InadmissibleReason r) {
    switch (r) {
    case InadmissibleReason::None: return "None";
    case InadmissibleReason::Residual: return "Residual";
    case InadmissibleReason::Growth: return "Growth";
    case InadmissibleReason::JumpSign: return "JumpSign";
    case InadmissibleReason::JumpReflection: return "JumpReflection";
    case InadmissibleReason::JumpWeakOnly: return "JumpWeakOnly";
    }
    return "Unknown";
}

struct JumpCheck {
    double x = 0.0;
    double right_sum = 0.0;        // p1(y+) + p2(y+)
    double reflection_error = 0.0; // max_i |p_i(y-) + p_i(y+)|
    bool passed = false;
    InadmissibleReason reason = InadmissibleReason::None;
};

struct AdmissibilityTolerances {
    double residual = 1e-6;
    double jump = 1e-8;
    double window_lo = -50.0;
    double window_hi = 50.0;
    double grid_step = 1e-3;

    friend bool operator==(const AdmissibilityTolerances&, const AdmissibilityTolerances&) = default;
};

struct AdmissibilityReport {
    double hj_residual_sup = 0.0;
    double growth_constant = 0.0;
    Tail left_tail;
    Tail right_tail;
    std::vector<JumpCheck> jump_checks;
    bool admissible = false;
    InadmissibleReason reason = InadmissibleReason::None;
    std::size_t grid_points = 0;
};

struct AdmissibleSolution {
    CostSpec spec;
    Regime regime = Regime::UnsupportedCombination;
    std::vector<Piece> pieces; // ordered by x, contiguous
    std::vector<Jump> jumps;
    Tail left_tail;
    Tail right_tail;
    std::optional<double> period;
    std::string construction;   // name of the builder that produced it
    std::optional<Vec2> datum;  // family datum actually used
    AdmissibilityTolerances tolerances;
    std::vector<ProfileRow> profile;
    AdmissibilityReport report;

    double covered_lo() const { return pieces.front().x_lo; }
    double covered_hi() const { return pieces.back().x_hi; }

    /// Index of the piece used at x (the right one at a shared endpoint).
    std::size_t piece_index(double x) const {
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
            if (x < pieces[i].x_hi) return i;
        }
        return pieces.size() - 1;
    }

    /// Maps x into the covered range when the profile is periodic.
    double reduce(double x) const {
        if (!period) return x;
        const double lo = covered_lo();
        const double l = *period;
        if (x >= lo && x < lo + l) return x;
        const double r = x - l * std::floor((x - lo) / l);
        return std::clamp(r, lo, std::nextafter(lo + l, lo));
    }

    /// p(x); at a jump point the right limit.
    Vec2 p_at(double x) const {
        const double xr = reduce(x);
        if (!period) {
            if (xr < covered_lo() && left_tail.kind == TailKind::Constant) return left_tail.value;
            if (xr > covered_hi() && right_tail.kind == TailKind::Constant) return right_tail.value;
        }
        return pieces[piece_index(xr)].p_at(xr);
    }

    /// Left limit p(x-) (differs from p_at only at jump points).
    Vec2 p_left(double x) const {
        for (const auto& j : jumps) {
            if (j.x == x) return j.left;
        }
        return p_at(x);
    }
};

/// u_i = h_i - p1 p2 - p_i^2 / 2.
inline Vec2 algebraic_values(const Vec2& h, const Vec2& p) {
    const double cross_term = p.c1 * p.c2;
    return {h.c1 - cross_term - 0.5 * p.c1 * p.c1, h.c2 - cross_term - 0.5 * p.c2 * p.c2};
}

namespace detail {

// x-coordinates of all stored samples and piece boundaries inside [lo, hi],
// repeated over periods when the profile is periodic.
inline std::vector<double> structural_points(const AdmissibleSolution& sol, double lo, double hi) {
    std::vector<double> pts;
    auto add_shifted = [&](double shift) {
        for (const auto& pc : sol.pieces) {
            for (double xb : {pc.x_lo, pc.x_hi}) {
                if (std::isfinite(xb) && xb + shift >= lo && xb + shift <= hi) pts.push_back(xb + shift);
            }
            if (pc.kind == PieceKind::Constant) continue;
            for (const auto& smp : pc.orbit.samples) {
                const double x = smp.x + shift;
                if (x >= lo && x <= hi) pts.push_back(x);
            }
        }
    };
    if (sol.period) {
        const double l = *sol.period;
        const long n_lo = static_cast<long>(std::floor((lo - sol.covered_hi()) / l));
        const long n_hi = static_cast<long>(std::ceil((hi - sol.covered_lo()) / l));
        for (long n = n_lo; n <= n_hi; ++n) add_shifted(static_cast<double>(n) * l);
    } else {
        add_shifted(0.0);
    }
    return pts;
}

} // namespace detail

/// Samples x -> (p, u) on the union of a uniform grid of the given step over
/// [lo, hi] and every structural point of the profile. A jump point yields two
/// rows at the same x: the left limit, then the right limit.
inline std::vector<ProfileRow> reconstruct_values(const AdmissibleSolution& sol, double lo, double hi,
                                                  double step) {
    if (!(step > 0.0) || !(hi > lo)) throw Error(ErrorCode::InvalidGrid, "profile grid needs step > 0 and hi > lo");
    std::vector<double> xs;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    xs.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) xs.push_back(lo + static_cast<double>(k) * step);
    if (xs.back() < hi) xs.push_back(hi);
    const auto extra = detail::structural_points(sol, lo, hi);
    xs.insert(xs.end(), extra.begin(), extra.end());
    for (const auto& j : sol.jumps) {
        if (j.x >= lo && j.x <= hi) xs.push_back(j.x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<ProfileRow> rows;
    rows.reserve(xs.size() + sol.jumps.size());
    for (double x : xs) {
        const Vec2 h = eval_costs(sol.spec, x);
        const int piece = static_cast<int>(sol.piece_index(sol.reduce(x)));
        for (const auto& j : sol.jumps) {
            if (j.x == x) rows.push_back({x, j.left, algebraic_values(h, j.left), std::max(0, piece - 1)});
        }
        const Vec2 p = sol.p_at(x);
        rows.push_back({x, p, algebraic_values(h, p), piece});
    }
    return rows;
}

namespace detail {

// dp/dx along the dynamics with slope pair k, or nothing where the correction
// term would be unreliable (close to the origin, where dp/dx is unbounded).
inline std::optional<Vec2> slope_in_x(const Vec2& p, const Vec2& k) {
    const double d = capital_delta(p);
    if (!(d > 1e-6)) return std::nullopt;
    return (1.0 / d) * vector_field(p, k);
}

} // namespace detail

/// Largest deviation, over the rows, between the increments of the algebraic
/// values u_i and the integral of p_i (u_i' = p_i for a solution). The
/// integral uses the trapezoid rule with endpoint-derivative correction on
/// field-following pieces and compensated summation.
inline double hj_residual(const AdmissibleSolution& sol, const std::vector<ProfileRow>& rows) {
    if (rows.size() < 2) return 0.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = 0.0, comp = 0.0;
        const double u0 = rows.front().u[i];
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const ProfileRow& a = rows[r - 1];
            const ProfileRow& b = rows[r];
            const double h = b.x - a.x;
            if (h > 0.0) {
                double term = 0.5 * h * (a.p[i] + b.p[i]);
                const double xm = sol.reduce(0.5 * (a.x + b.x));
                const Piece& pc = sol.pieces[sol.piece_index(xm)];
                if (pc.has_field()) {
                    const auto da = detail::slope_in_x(a.p, pc.slopes);
                    const auto db = detail::slope_in_x(b.p, pc.slopes);
                    if (da && db) term -= h * h / 12.0 * ((*db)[i] - (*da)[i]);
                }
                // Neumaier summation.
                const double t = sum + term;
                comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
                sum = t;
            }
            sup = std::max(sup, std::abs((b.u[i] - u0) - (sum + comp)));
        }
    }
    return sup;
}

inline JumpCheck check_jump(const Jump& j, double tol) {
    JumpCheck jc;
    jc.x = j.x;
    jc.right_sum = j.right.c1 + j.right.c2;
    jc.reflection_error = std::max(std::abs(j.left.c1 + j.right.c1), std::abs(j.left.c2 + j.right.c2));
    const bool sign_ok = jc.right_sum <= tol;
    const bool reflect_ok = jc.reflection_error <= tol;
    const bool weak_ok = sign_ok || j.left.c1 + j.left.c2 >= -tol;
    jc.passed = sign_ok && reflect_ok;
    if (!jc.passed) {
        if (!reflect_ok) jc.reason = weak_ok ? InadmissibleReason::JumpWeakOnly : InadmissibleReason::JumpReflection;
        else jc.reason = InadmissibleReason::JumpSign;
    }
    return jc;
}

/// Checks the solution's profile rows (recomputed on the tolerances' window
/// and grid) for the HJ identity, linear growth with linear tails, and the
/// two-player jump condition.
inline AdmissibilityReport check_admissibility(const AdmissibleSolution& sol, const AdmissibilityTolerances& tol,
                                               const std::vector<ProfileRow>& rows) {
    AdmissibilityReport rep;
    rep.grid_points = rows.size();
    rep.left_tail = sol.left_tail;
    rep.right_tail = sol.right_tail;
    rep.hj_residual_sup = hj_residual(sol, rows);
    double c = 0.0;
    for (const auto& r : rows) {
        const double g = std::max(std::abs(r.u.c1), std::abs(r.u.c2)) / (1.0 + std::abs(r.x));
        c = std::isfinite(g) ? std::max(c, g) : std::numeric_limits<double>::infinity();
    }
    rep.growth_constant = c;
    for (const auto& j : sol.jumps) rep.jump_checks.push_back(check_jump(j, tol.jump));

    rep.admissible = true;
    if (!(rep.hj_residual_sup <= tol.residual)) {
        rep.admissible = false;
        rep.reason = InadmissibleReason::Residual;
        return rep;
    }
    const bool tails_linear = sol.left_tail.kind != TailKind::Unknown && sol.right_tail.kind != TailKind::Unknown;
    if (!std::isfinite(rep.growth_constant) || !tails_linear) {
        rep.admissible = false;
        rep.reason = InadmissibleReason::Growth;
        return rep;
    }
    for (const auto& jc : rep.jump_checks) {
        if (!jc.passed) {
            rep.admissible = false;
            rep.reason = jc.reason;
            return rep;
        }
    }
    return rep;
}

inline AdmissibilityReport check_admissibility(const AdmissibleSolution& sol, const AdmissibilityTolerances& tol) {
    return check_admissibility(sol, tol, reconstruct_values(sol, tol.window_lo, tol.window_hi, tol.grid_step));
}

/// Fills the profile and report of a freshly assembled solution.
inline AdmissibleSolution finalize(AdmissibleSolution sol, const AdmissibilityTolerances& tol = {}) {
    sol.tolerances = tol;
    sol.profile = reconstruct_values(sol, tol.window_lo, tol.window_hi, tol.grid_step);
    sol.report = check_admissibility(sol, tol, sol.profile);
    return sol;
}

} // namespace hjgame

#endif
