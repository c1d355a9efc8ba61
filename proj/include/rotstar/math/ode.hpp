/** \file ode.hpp
    \brief Adaptive embedded Runge--Kutta integration (Dormand--Prince 5(4))
    with event location on dense (cubic Hermite) output.
*/
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "rotstar/math/roots.hpp"

namespace rotstar::math {

template <std::size_t N>
using OdeState = std::array<double, N>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h_initial = 0.0;  ///< 0 selects automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 500000;
};

enum class OdeStatus { reached_end, event, max_steps };

template <std::size_t N>
struct OdeResult {
    OdeStatus status = OdeStatus::reached_end;
    double t = 0.0;
    OdeState<N> y{};
    std::size_t n_steps = 0;
};

namespace detail {

/// Cubic Hermite value on a step [t0, t0+h] at fraction th in [0,1].
template <std::size_t N>
OdeState<N> hermite(const OdeState<N>& y0, const OdeState<N>& f0, const OdeState<N>& y1,
                    const OdeState<N>& f1, double h, double th)
{
    const double t2 = th * th, t3 = t2 * th;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + th;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    OdeState<N> y;
    for (std::size_t i = 0; i < N; ++i)
        y[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    return y;
}

} // namespace detail

/** Integrate y' = f(t,y) from t0 to t_end.

    \param f        right-hand side: f(t, y, dydt)
    \param observer called at t0 and after each accepted step: observer(t, y, dydt)
    \param event    scalar event function g(t,y); integration stops at the first
                    sign change of g along the solution, located on the dense
                    output to machine tolerance. Pass nullptr-like (see overload)
                    to disable.

    The pair (5th-order solution, 4th-order error estimate) is the standard
    Dormand--Prince tableau with FSAL; step control is a max-norm error test
    with the usual 0.9 err^(-1/5) factor clamped to [0.2, 5].
*/
template <std::size_t N, class F, class Obs, class Ev>
OdeResult<N> integrate_dp5(F&& f, double t0, OdeState<N> y0, double t_end,
                           const OdeOptions& opt, Obs&& observer, Ev&& event, bool has_event)
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    OdeResult<N> res;
    const double span = t_end - t0;
    double t = t0;
    OdeState<N> y = y0, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    f(t, y, k1);
    observer(t, y, k1);
    double g_prev = has_event ? event(t, y) : 0.0;

    double h = opt.h_initial > 0.0 ? opt.h_initial : 1e-3 * std::abs(span);
    h = std::min(h, opt.h_max);

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (t >= t_end) {
            res.status = OdeStatus::reached_end;
            res.t = t; res.y = y; res.n_steps = step;
            return res;
        }
        h = std::min(h, t_end - t);

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i]
                                  + a65 * k5[i]);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i]
                                   + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(ei) / sc);
        }

        if (err <= 1.0) {
            const double t_new = t + h;
            if (has_event) {
                const double g_new = event(t_new, ynew);
                const bool crossed = (g_prev > 0.0 && g_new <= 0.0)
                                  || (g_prev < 0.0 && g_new >= 0.0);
                if (crossed) {
                    const OdeState<N> ys = y, fs = k1;
                    auto g_of = [&](double th) {
                        const OdeState<N> yi = detail::hermite<N>(ys, fs, ynew, k7, h, th);
                        return event(t + th * h, yi);
                    };
                    double th_star = 1.0;
                    if (g_new != 0.0)
                        th_star = brent(g_of, 0.0, 1.0, {.xtol_abs = 1e-15, .max_iter = 100});
                    res.t = t + th_star * h;
                    res.y = detail::hermite<N>(ys, fs, ynew, k7, h, th_star);
                    f(res.t, res.y, k1);
                    observer(res.t, res.y, k1);
                    res.status = OdeStatus::event;
                    res.n_steps = step + 1;
                    return res;
                }
                g_prev = g_new;
            }
            t = t_new;
            y = ynew;
            k1 = k7;  // FSAL
            observer(t, y, k1);
            const double factor = (err == 0.0) ? 5.0
                : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
            h = std::min(h * factor, opt.h_max);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
        if (!(h > std::abs(t) * 1e-15 + 1e-300)) {
            res.status = OdeStatus::max_steps;  // step size underflow
            res.t = t; res.y = y; res.n_steps = step;
            return res;
        }
    }
    res.status = OdeStatus::max_steps;
    res.t = t; res.y = y; res.n_steps = opt.max_steps;
    return res;
}

/// Overload without event function.
template <std::size_t N, class F, class Obs>
OdeResult<N> integrate_dp5(F&& f, double t0, OdeState<N> y0, double t_end,
                           const OdeOptions& opt, Obs&& observer)
{
    auto no_event = [](double, const OdeState<N>&) { return 1.0; };
    return integrate_dp5<N>(std::forward<F>(f), t0, y0, t_end, opt,
                            std::forward<Obs>(observer), no_event, false);
}

} // namespace rotstar::math
