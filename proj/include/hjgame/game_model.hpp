// Game specification: piecewise-linear running costs, sector geometry of the
// slope pairs, and the regime classification that selects a construction.
#ifndef HJGAME_GAME_MODEL_HPP
#define HJGAME_GAME_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"

namespace hjgame {

/// Piecewise-linear costs h1, h2. On the j-th interval ]x_j, x_{j+1}[ (with
/// x_0 = -inf and x_{N+1} = +inf) the derivatives are the constant pair
/// slopes[j]. The costs themselves are fixed by their values at x = 0.
struct CostSpec {
    std::vector<double> breakpoints;
    std::vector<Vec2> slopes;
    Vec2 offsets{};

    std::size_t interval_count() const { return slopes.size(); }

    /// Index of the interval containing x. A breakpoint belongs to the
    /// interval on its right.
    std::size_t interval_of(double x) const {
        return static_cast<std::size_t>(
            std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin());
    }

    Vec2 slopes_at(double x) const { return slopes[interval_of(x)]; }

    friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

/// Checks every CostSpec invariant and returns the spec unchanged.
inline CostSpec validate_spec(CostSpec raw) {
    for (double b : raw.breakpoints) {
        if (!std::isfinite(b)) throw Error(ErrorCode::NonFiniteEntry, "breakpoint is not finite");
    }
    for (std::size_t i = 1; i < raw.breakpoints.size(); ++i) {
        if (!(raw.breakpoints[i - 1] < raw.breakpoints[i])) {
            throw Error(ErrorCode::NonIncreasingBreakpoints,
                        "breakpoint " + std::to_string(i) + " does not exceed its predecessor");
        }
    }
    if (raw.slopes.size() != raw.breakpoints.size() + 1) {
        throw Error(ErrorCode::SlopeCountMismatch,
                    "expected " + std::to_string(raw.breakpoints.size() + 1) + " slope pairs, got " +
                        std::to_string(raw.slopes.size()));
    }
    for (std::size_t j = 0; j < raw.slopes.size(); ++j) {
        if (!is_finite(raw.slopes[j])) {
            throw Error(ErrorCode::NonFiniteEntry, "slope pair " + std::to_string(j) + " is not finite");
        }
        if (raw.slopes[j].c1 == 0.0 && raw.slopes[j].c2 == 0.0) {
            throw Error(ErrorCode::ZeroSlopePair, "slope pair " + std::to_string(j) + " is (0,0)");
        }
    }
    if (!is_finite(raw.offsets)) throw Error(ErrorCode::NonFiniteEntry, "offsets are not finite");
    return raw;
}

namespace detail {

// Integral of the piecewise-constant derivative of component i over [a, b], a <= b.
inline double integrate_slope(const CostSpec& spec, std::size_t i, double a, double b) {
    double total = 0.0;
    double left = a;
    std::size_t j = spec.interval_of(a);
    while (left < b) {
        const double right = j < spec.breakpoints.size() ? std::min(b, spec.breakpoints[j]) : b;
        total += spec.slopes[j][i] * (right - left);
        left = right;
        ++j;
    }
    return total;
}

} // namespace detail

/// h_i(x) = h_i(0) + integral of h_i' from 0 to x.
inline double eval_cost(const CostSpec& spec, Player player, double x) {
    const std::size_t i = index_of(player);
    if (x >= 0.0) return spec.offsets[i] + detail::integrate_slope(spec, i, 0.0, x);
    return spec.offsets[i] - detail::integrate_slope(spec, i, x, 0.0);
}

inline Vec2 eval_costs(const CostSpec& spec, double x) {
    return {eval_cost(spec, Player::One, x), eval_cost(spec, Player::Two, x)};
}

/// One of the eight open cones of angular width pi/4, or the boundary set
/// (axes, diagonals and the origin).
struct Sector {
    int index = 0; // 1..8, 0 for the boundary

    static constexpr Sector boundary() { return {0}; }
    constexpr bool is_boundary() const { return index == 0; }
    friend constexpr bool operator==(Sector, Sector) = default;
};

inline constexpr double kSectorAngleTolerance = 1e-12;

inline Sector classify_sector(const Vec2& point) {
    if (point.c1 == 0.0 && point.c2 == 0.0) return Sector::boundary();
    constexpr double quarter = std::numbers::pi / 4.0;
    double theta = std::atan2(point.c2, point.c1);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    const double k = std::round(theta / quarter);
    if (std::abs(theta - k * quarter) <= kSectorAngleTolerance) return Sector::boundary();
    const int idx = static_cast<int>(std::floor(theta / quarter)) + 1;
    return {std::clamp(idx, 1, 8)};
}

inline std::string to_string(Sector s) {
    return s.is_boundary() ? std::string("Boundary") : "A" + std::to_string(s.index);
}

enum class Regime {
    CooperativeUnique,
    ConflictingMany,
    ConflictingNone,
    MixedMany,
    Periodic,
    UnsupportedBoundary,
    UnsupportedCombination,
};

inline std::string to_string(Regime r) {
    switch (r) {
    case Regime::CooperativeUnique: return "CooperativeUnique";
    case Regime::ConflictingMany: return "ConflictingMany";
    case Regime::ConflictingNone: return "ConflictingNone";
    case Regime::MixedMany: return "MixedMany";
    case Regime::Periodic: return "Periodic";
    case Regime::UnsupportedBoundary: return "UnsupportedBoundary";
    case Regime::UnsupportedCombination: return "UnsupportedCombination";
    }
    return "Unknown";
}

struct RegimeReport {
    std::vector<Sector> per_interval_sectors;
    Regime regime = Regime::UnsupportedCombination;
    std::string notes;
};

/// Ratio kappa2 / kappa1 of a slope pair.
inline double slope_ratio(const Vec2& k) { return k.c2 / k.c1; }

namespace detail {

inline bool in_sectors(Sector s, std::initializer_list<int> allowed) {
    return std::find(allowed.begin(), allowed.end(), s.index) != allowed.end();
}

} // namespace detail

/// Assigns the regime from the sector of every slope pair.
///
/// The equilibrium K of an interval's phase dynamics is attracting when
/// kappa1 + kappa2 > 0 (sectors A3, A8 among the conflicting ones) and
/// repelling otherwise (A4, A7). A family of solutions needs a repelling K on
/// the left and an attracting K on the right, so the conflicting pairs with
/// many solutions are (A4, A3) and its player-swapped image (A7, A8); the
/// reversed orders admit none.
inline RegimeReport classify_regime(const CostSpec& spec) {
    RegimeReport report;
    report.per_interval_sectors.reserve(spec.slopes.size());
    for (const auto& k : spec.slopes) report.per_interval_sectors.push_back(classify_sector(k));
    const auto& sec = report.per_interval_sectors;

    // The diagonal between A1 and A2 (and between A5 and A6) lies inside the
    // open quadrant where the cooperative construction works unchanged.
    const auto& ks = spec.slopes;
    const bool all_pos = std::all_of(ks.begin(), ks.end(), [](const Vec2& k) { return k.c1 > 0.0 && k.c2 > 0.0; });
    const bool all_neg = std::all_of(ks.begin(), ks.end(), [](const Vec2& k) { return k.c1 < 0.0 && k.c2 < 0.0; });
    if (!ks.empty() && (all_pos || all_neg)) {
        report.regime = Regime::CooperativeUnique;
        report.notes = "cooperative costs: a unique admissible solution exists (glued interval by interval)";
        return report;
    }
    if (std::any_of(sec.begin(), sec.end(), [](Sector s) { return s.is_boundary(); })) {
        report.regime = Regime::UnsupportedBoundary;
        report.notes = "a slope pair lies on an axis or diagonal; the existence results need open sectors";
        return report;
    }
    if (sec.size() == 2) {
        const Sector s0 = sec[0];
        const Sector s1 = sec[1];
        if ((s0.index == 4 && s1.index == 3) || (s0.index == 7 && s1.index == 8)) {
            report.regime = Regime::ConflictingMany;
            report.notes = "conflicting costs, repelling equilibrium on the left: infinitely many admissible "
                           "solutions expected";
            return report;
        }
        if ((s0.index == 3 && s1.index == 4) || (s0.index == 8 && s1.index == 7)) {
            report.regime = Regime::ConflictingNone;
            report.notes = "conflicting costs, attracting equilibrium on the left: no admissible solution exists";
            return report;
        }
        if (detail::in_sectors(s0, {5, 6}) && detail::in_sectors(s1, {1, 2})) {
            const double a0 = slope_ratio(spec.slopes[0]);
            const double a1 = slope_ratio(spec.slopes[1]);
            if (std::abs(a0 - a1) > 1e-12 * std::max(std::abs(a0), std::abs(a1))) {
                report.regime = Regime::MixedMany;
                report.notes = "mixed costs (decreasing then increasing, distinct slope ratios): infinitely many "
                               "admissible solutions expected";
                return report;
            }
            report.regime = Regime::UnsupportedCombination;
            report.notes = "mixed costs with equal slope ratios: both equilibria on one line through the origin";
            return report;
        }
    }
    report.regime = Regime::UnsupportedCombination;
    report.notes = "sector combination not covered by the available constructions";
    return report;
}

} // namespace hjgame

#endif
