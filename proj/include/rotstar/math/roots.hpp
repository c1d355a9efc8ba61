/** \file roots.hpp
    \brief Bracketed scalar root finding (Brent's method).
*/
#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "rotstar/common.hpp"

namespace rotstar::math {

struct BrentOptions {
    double xtol_abs = 0.0;      ///< absolute width tolerance on the bracket
    double xtol_rel = 1e-14;    ///< relative width tolerance
    double ftol_abs = 0.0;      ///< optional early stop on |f|
    int max_iter = 200;
};

/** Root of f in [a,b] by Brent's method (inverse quadratic / secant / bisection).

    Requires f(a) and f(b) of opposite sign, else throws NO_BRACKET.
*/
inline double brent(const std::function<double(double)>& f, double a, double b,
                    const BrentOptions& opt = {})
{
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw Error(ErrorCode::NO_BRACKET, "brent: f(a) and f(b) have the same sign");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b)
                         + 0.5 * (opt.xtol_abs + opt.xtol_rel * std::abs(b));
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol || fb == 0.0 || std::abs(fb) <= opt.ftol_abs)
            return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (xm > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

} // namespace rotstar::math
