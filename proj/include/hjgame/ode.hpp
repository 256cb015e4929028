// Adaptive Dormand-Prince 5(4) stepper on fixed-size states.
#ifndef HJGAME_ODE_HPP
#define HJGAME_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "core.hpp"

namespace hjgame::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepperOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 0.05;
    double min_step = 1e-14;
};

/// Components sharing a group id are measured by their common maximum
/// magnitude in the relative part of the error scale. This keeps a vector
/// quantity whose individual components cross zero from forcing tiny steps.
template <std::size_t N>
using ErrorGroups = std::array<int, N>;

template <std::size_t N>
struct StepResult {
    double t0 = 0.0, t1 = 0.0;
    State<N> y0{}, y1{};
    State<N> f0{}, f1{};
};

/// Cubic Hermite interpolation of component i inside an accepted step.
template <std::size_t N>
double hermite(const StepResult<N>& st, std::size_t i, double t) {
    const double h = st.t1 - st.t0;
    if (h == 0.0) return st.y0[i];
    const double th = (t - st.t0) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double h00 = 2 * th3 - 3 * th2 + 1;
    const double h10 = th3 - 2 * th2 + th;
    const double h01 = -2 * th3 + 3 * th2;
    const double h11 = th3 - th2;
    return h00 * st.y0[i] + h10 * h * st.f0[i] + h01 * st.y1[i] + h11 * h * st.f1[i];
}

/// Derivative of the Hermite interpolant of component i.
template <std::size_t N>
double hermite_derivative(const StepResult<N>& st, std::size_t i, double t) {
    const double h = st.t1 - st.t0;
    if (h == 0.0) return st.f0[i];
    const double th = (t - st.t0) / h;
    const double th2 = th * th;
    const double d00 = (6 * th2 - 6 * th) / h;
    const double d10 = 3 * th2 - 4 * th + 1;
    const double d01 = (-6 * th2 + 6 * th) / h;
    const double d11 = 3 * th2 - 2 * th;
    return d00 * st.y0[i] + d10 * st.f0[i] + d01 * st.y1[i] + d11 * st.f1[i];
}

template <std::size_t N, class Rhs>
class DormandPrince45 {
public:
    DormandPrince45(Rhs rhs, StepperOptions opts) : rhs_(std::move(rhs)), opts_(opts) {
        for (std::size_t i = 0; i < N; ++i) groups_[i] = static_cast<int>(i);
    }
    DormandPrince45(Rhs rhs, StepperOptions opts, ErrorGroups<N> groups)
        : rhs_(std::move(rhs)), opts_(opts), groups_(groups) {}

    const StepperOptions& options() const { return opts_; }
    State<N> eval(double t, const State<N>& y) const { return rhs_(t, y); }

    /// One fixed step of the fifth-order solution, no error control.
    StepResult<N> fixed_step(double t, const State<N>& y, const State<N>& f, double h) const {
        State<N> err{};
        return raw_step(t, y, f, h, err);
    }

    /// Advances from (t, y) by an accepted step whose size starts at h_try
    /// (negative for backward integration). On return h_try holds the
    /// proposed next step.
    StepResult<N> step(double t, const State<N>& y, const State<N>& f, double& h_try) const {
        const double dir = h_try < 0.0 ? -1.0 : 1.0;
        double h = dir * std::min(std::abs(h_try), opts_.max_step);
        for (;;) {
            if (std::abs(h) < opts_.min_step * std::max(1.0, std::abs(t))) {
                throw Error(ErrorCode::StepSizeUnderflow, "adaptive step fell below the minimum at t=" +
                                                              std::to_string(t));
            }
            State<N> err{};
            StepResult<N> res = raw_step(t, y, f, h, err);
            double acc = 0.0;
            bool finite = true;
            State<N> mag{};
            for (std::size_t i = 0; i < N; ++i) {
                const double m = std::max(std::abs(y[i]), std::abs(res.y1[i]));
                for (std::size_t j = 0; j < N; ++j) {
                    if (groups_[j] == groups_[i]) mag[j] = std::max(mag[j], m);
                }
            }
            for (std::size_t i = 0; i < N; ++i) {
                if (!std::isfinite(res.y1[i])) finite = false;
                const double sc = opts_.abs_tol + opts_.rel_tol * mag[i];
                acc += (err[i] / sc) * (err[i] / sc);
            }
            const double e = finite ? std::sqrt(acc / N) : std::numeric_limits<double>::infinity();
            if (e <= 1.0) {
                const double grow = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
                h_try = dir * std::min(std::abs(h) * grow, opts_.max_step);
                return res;
            }
            const double shrink = std::isfinite(e) ? std::clamp(0.9 * std::pow(e, -0.25), 0.1, 0.9) : 0.1;
            h *= shrink;
        }
    }

private:
    StepResult<N> raw_step(double t, const State<N>& y, const State<N>& k1, double h, State<N>& err) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;

        State<N> tmp{};
        auto stage = [&](auto&& combine) {
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
            return tmp;
        };
        const State<N> k2 = rhs_(t + c2 * h, stage([&](std::size_t i) { return a21 * k1[i]; }));
        const State<N> k3 = rhs_(t + c3 * h, stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }));
        const State<N> k4 =
            rhs_(t + c4 * h, stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }));
        const State<N> k5 = rhs_(t + c5 * h, stage([&](std::size_t i) {
                                     return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
                                 }));
        const State<N> k6 = rhs_(t + h, stage([&](std::size_t i) {
                                     return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
                                 }));
        StepResult<N> res;
        res.t0 = t;
        res.t1 = t + h;
        res.y0 = y;
        res.f0 = k1;
        for (std::size_t i = 0; i < N; ++i) {
            res.y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        }
        res.f1 = rhs_(t + h, res.y1);
        for (std::size_t i = 0; i < N; ++i) {
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * res.f1[i]);
        }
        return res;
    }

    Rhs rhs_;
    StepperOptions opts_;
    ErrorGroups<N> groups_{};
};

} // namespace hjgame::ode

#endif
