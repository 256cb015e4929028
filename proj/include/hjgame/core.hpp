// Basic value types and the error type shared by every hjgame module.
#ifndef HJGAME_CORE_HPP
#define HJGAME_CORE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hjgame {

/// A point of the (p1, p2) gradient plane. Also used for slope pairs
/// K = (kappa1, kappa2) and per-player quantities (u1, u2), (h1, h2).
struct Vec2 {
    double c1 = 0.0;
    double c2 = 0.0;

    constexpr double operator[](std::size_t i) const { return i == 0 ? c1 : c2; }
    constexpr double& operator[](std::size_t i) { return i == 0 ? c1 : c2; }

    constexpr Vec2& operator+=(const Vec2& o) { c1 += o.c1; c2 += o.c2; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { c1 -= o.c1; c2 -= o.c2; return *this; }
    constexpr Vec2& operator*=(double a) { c1 *= a; c2 *= a; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.c1, -a.c2}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(const Vec2& v) { return std::hypot(v.c1, v.c2); }
inline double dot(const Vec2& a, const Vec2& b) { return a.c1 * b.c1 + a.c2 * b.c2; }
/// z-component of the planar cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.c1 * b.c2 - a.c2 * b.c1; }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.c1) && std::isfinite(v.c2); }

/// Players are numbered 1 and 2 throughout the public API.
enum class Player { One = 1, Two = 2 };

inline std::size_t index_of(Player p) { return p == Player::One ? 0 : 1; }
inline Player other(Player p) { return p == Player::One ? Player::Two : Player::One; }

enum class ErrorCode {
    NonIncreasingBreakpoints,
    ZeroSlopePair,
    NonFiniteEntry,
    SlopeCountMismatch,
    ConfigParse,
    DomainViolation,
    StepSizeUnderflow,
    InvalidStopConditions,
    AnchorOutOfRange,
    RegimeMismatch,
    InvariantBoxViolation,
    DatumOutsideFamily,
    ConvergenceFailure,
    NoIntersection,
    PreconditionViolation,
    WindowEscape,
    InvalidHorizon,
    EmptyTrajectory,
    InvalidGrid,
    NonConvergence,
    Io,
};

inline std::string_view to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonIncreasingBreakpoints: return "NonIncreasingBreakpoints";
    case ErrorCode::ZeroSlopePair: return "ZeroSlopePair";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::SlopeCountMismatch: return "SlopeCountMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::InvalidStopConditions: return "InvalidStopConditions";
    case ErrorCode::AnchorOutOfRange: return "AnchorOutOfRange";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::InvariantBoxViolation: return "InvariantBoxViolation";
    case ErrorCode::DatumOutsideFamily: return "DatumOutsideFamily";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::WindowEscape: return "WindowEscape";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hjgame

#endif
