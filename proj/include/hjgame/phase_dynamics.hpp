// The rescaled gradient dynamics of one interval, its linearization at the
// origin, and the eigendirection maps G-, g-, G+, g+.
#ifndef HJGAME_PHASE_DYNAMICS_HPP
#define HJGAME_PHASE_DYNAMICS_HPP

#include <array>
#include <cmath>
#include <limits>

#include "core.hpp"

namespace hjgame {

/// det of Lambda(p) = [[p1+p2, p1], [p2, p1+p2]].
inline double capital_delta(const Vec2& p) {
    const double s = p.c1 + p.c2;
    return s * s - p.c1 * p.c2;
}

/// Right-hand side of the rescaled system dp/ds for slope pair K.
inline Vec2 vector_field(const Vec2& p, const Vec2& k) {
    // Grouped so that p = K cancels exactly.
    return {p.c1 * (k.c1 - p.c1) + (k.c1 * p.c2 - k.c2 * p.c1),
            p.c2 * (k.c2 - p.c2) + (k.c2 * p.c1 - k.c1 * p.c2)};
}

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Vec2 operator*(const Vec2& v) const { return {a11 * v.c1 + a12 * v.c2, a21 * v.c1 + a22 * v.c2}; }
};

/// Jacobian of vector_field with respect to p.
inline Mat2 field_jacobian(const Vec2& p, const Vec2& k) {
    return {k.c1 - k.c2 - 2.0 * p.c1, k.c1, k.c2, k.c2 - k.c1 - 2.0 * p.c2};
}

struct EigenData {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    Vec2 v_minus;
    Vec2 v_plus;
    /// kappa2 / kappa1; NaN when kappa1 = 0.
    double alpha = std::numeric_limits<double>::quiet_NaN();
};

enum class DirectionMap { GMinus, gMinus, GPlus, gPlus };

/// alpha - 1 -/+ sqrt(alpha^2 - alpha + 1) on the half-line where the named
/// map is defined (alpha > 0 for G, alpha < 0 for g).
inline double direction_map(DirectionMap which, double alpha) {
    const bool positive_domain = which == DirectionMap::GMinus || which == DirectionMap::GPlus;
    if (!std::isfinite(alpha) || (positive_domain ? !(alpha > 0.0) : !(alpha < 0.0))) {
        throw Error(ErrorCode::DomainViolation, "alpha outside the domain of the requested direction map");
    }
    const bool minus = which == DirectionMap::GMinus || which == DirectionMap::gMinus;
    const double root = std::sqrt(alpha * alpha - alpha + 1.0);
    constexpr double switch_at = 1e4;
    // The conjugate form avoids cancellation where alpha - 1 and the root
    // nearly cancel.
    if (minus && alpha > switch_at) return -alpha / (alpha - 1.0 + root);
    if (!minus && alpha < -switch_at) return -alpha / (alpha - 1.0 - root);
    return minus ? alpha - 1.0 - root : alpha - 1.0 + root;
}

namespace detail {

// Minus/plus branch of the direction maps, dispatched on the sign of alpha.
inline double branch(bool minus, double alpha) {
    if (alpha > 0.0) return direction_map(minus ? DirectionMap::GMinus : DirectionMap::GPlus, alpha);
    if (alpha < 0.0) return direction_map(minus ? DirectionMap::gMinus : DirectionMap::gPlus, alpha);
    return minus ? -2.0 : 0.0; // limits at alpha -> 0
}

// Unit eigenvector for eigenvalue mu of a general 2x2 matrix, with the sign
// fixed so that the second component is >= 0 (first > 0 if the second is 0).
inline Vec2 unit_eigenvector(const Mat2& h, double mu) {
    Vec2 v{h.a12, mu - h.a11};
    const Vec2 alt{mu - h.a22, h.a21};
    if (norm(alt) > norm(v)) v = alt;
    v *= 1.0 / norm(v);
    if (v.c2 < 0.0 || (v.c2 == 0.0 && v.c1 < 0.0)) v = -v;
    return v;
}

} // namespace detail

inline Mat2 origin_linearization(const Vec2& k) { return {k.c1 - k.c2, k.c1, k.c2, k.c2 - k.c1}; }

/// Eigen-structure of the saddle at the origin. For kappa1 != 0 the
/// eigenvectors are (1, (kappa2 - kappa1 -/+ lambda) / kappa1); for
/// kappa1 = 0 they come from a direct 2x2 solve, normalized to unit length.
inline EigenData linearization(const Vec2& k) {
    if (k.c1 == 0.0 && k.c2 == 0.0) throw Error(ErrorCode::ZeroSlopePair, "linearization needs K != (0,0)");
    EigenData e;
    const double lambda = std::sqrt(k.c1 * k.c1 + k.c2 * k.c2 - k.c1 * k.c2);
    e.lambda_minus = -lambda;
    e.lambda_plus = lambda;
    if (k.c1 != 0.0) {
        e.alpha = k.c2 / k.c1;
        // (kappa2 - kappa1 -/+ lambda) / kappa1 = alpha - 1 -/+ sign(kappa1) * root
        const bool flip = k.c1 < 0.0;
        e.v_minus = {1.0, detail::branch(!flip, e.alpha)};
        e.v_plus = {1.0, detail::branch(flip, e.alpha)};
    } else {
        const Mat2 h = origin_linearization(k);
        e.v_minus = detail::unit_eigenvector(h, e.lambda_minus);
        e.v_plus = detail::unit_eigenvector(h, e.lambda_plus);
    }
    return e;
}

} // namespace hjgame

#endif
