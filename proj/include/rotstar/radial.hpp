/** \file radial.hpp
    \brief Non-rotating radial seed: shooting on the Emden-type equation
    u'' + (2/r) u' + 4 pi h^{-1}(u_+) = 0, u(0) = a.

    A solution either crosses zero at a finite support radius R(a) (compact)
    or stays positive with u' < 0 for all r (positive everywhere). The mass
    integral m' = 4 pi h^{-1}(u_+) r^2 is carried as a third state component,
    so M(a) converges at the integrator's order together with the profile.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rotstar/eos.hpp"
#include "rotstar/math/ode.hpp"
#include "rotstar/math/roots.hpp"

namespace rotstar {

enum class RadialKind { compact, positive_everywhere };

struct RadialOptions {
    double r_max = 0.0;  ///< 0 selects 2000 x the central scale radius
    double rtol = 1e-10;
    double atol = 0.0;   ///< 0 selects 1e-14 x a
};

struct RadialSolution {
    double a = 0.0;
    RadialKind kind = RadialKind::compact;
    double support_radius = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> r_nodes, u_values, rho_values;
    std::vector<double> u_derivs, m_values;  ///< node derivatives / cumulative mass
    double mass = std::numeric_limits<double>::quiet_NaN();
    double alpha0 = std::numeric_limits<double>::quiet_NaN();

    /// u at arbitrary radius by cubic Hermite on the stored nodes; beyond the
    /// last node the profile continues linearly (negative for compact kind).
    double u_at(double r) const
    {
        if (r <= r_nodes.front()) return u_values.front();
        if (r >= r_nodes.back())
            return u_values.back() + u_derivs.back() * (r - r_nodes.back());
        const auto it = std::upper_bound(r_nodes.begin(), r_nodes.end(), r);
        const std::size_t i = static_cast<std::size_t>(it - r_nodes.begin()) - 1;
        const double h = r_nodes[i + 1] - r_nodes[i];
        const double t = (r - r_nodes[i]) / h, t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u_values[i] + (t3 - 2 * t2 + t) * h * u_derivs[i]
             + (-2 * t3 + 3 * t2) * u_values[i + 1] + (t3 - t2) * h * u_derivs[i + 1];
    }
};

/** Shoot from the series start u = a - (2 pi/3) h^{-1}(a) r^2 at r1 = 1e-6 x scale.

    Event location stops at the first zero of u (kind = compact). If u stays
    positive with u' < 0 out to r_max >= 1e3 x scale, the solution is
    classified positive_everywhere; otherwise NO_CLASSIFICATION is raised and
    the caller should enlarge r_max.
*/
inline RadialSolution shoot(const EquationOfState& eos, double a, RadialOptions opts = {})
{
    if (!(a > 0.0)) throw std::invalid_argument("shoot: central value a must be positive");

    const double rho_c = eval_h_inverse(eos, a);
    if (!(rho_c > 0.0)) throw std::invalid_argument("shoot: h^{-1}(a) must be positive");
    const double scale = std::sqrt(a / (4.0 * M_PI * rho_c));
    const double r_max = opts.r_max > 0.0 ? opts.r_max : 2000.0 * scale;
    const double r1 = 1e-6 * scale;

    RadialSolution sol;
    sol.a = a;
    sol.r_nodes.push_back(0.0);
    sol.u_values.push_back(a);
    sol.u_derivs.push_back(0.0);
    sol.m_values.push_back(0.0);

    auto rhs = [&](double r, const math::OdeState<3>& y, math::OdeState<3>& dy) {
        const double rho = eval_h_inverse(eos, y[0]);
        dy[0] = y[1];
        dy[1] = -2.0 * y[1] / r - 4.0 * M_PI * rho;
        dy[2] = 4.0 * M_PI * rho * r * r;
    };
    auto observer = [&](double r, const math::OdeState<3>& y, const math::OdeState<3>&) {
        if (r > sol.r_nodes.back()) {
            sol.r_nodes.push_back(r);
            sol.u_values.push_back(y[0]);
            sol.u_derivs.push_back(y[1]);
            sol.m_values.push_back(y[2]);
        }
    };
    auto event = [](double, const math::OdeState<3>& y) { return y[0]; };

    math::OdeState<3> y1{a - 2.0 * M_PI / 3.0 * rho_c * r1 * r1,
                         -4.0 * M_PI / 3.0 * rho_c * r1,
                         4.0 * M_PI / 3.0 * rho_c * r1 * r1 * r1};
    math::OdeOptions oo;
    oo.rtol = opts.rtol;
    oo.atol = opts.atol > 0.0 ? opts.atol : 1e-14 * a;
    oo.h_max = 0.1 * scale;
    const auto res = math::integrate_dp5<3>(rhs, r1, y1, r_max, oo, observer, event, true);

    if (res.status == math::OdeStatus::event) {
        sol.kind = RadialKind::compact;
        sol.support_radius = res.t;
        sol.mass = res.y[2];
        sol.alpha0 = -sol.mass / sol.support_radius;
    } else if (res.status == math::OdeStatus::reached_end && res.y[0] > 0.0
               && res.y[1] < 0.0 && r_max >= 1e3 * scale) {
        sol.kind = RadialKind::positive_everywhere;
    } else {
        throw Error(ErrorCode::NO_CLASSIFICATION,
                    "shoot: sign test inconclusive at r_max; raise r_max");
    }

    sol.rho_values.resize(sol.u_values.size());
    for (std::size_t i = 0; i < sol.u_values.size(); ++i)
        sol.rho_values[i] = eval_h_inverse(eos, sol.u_values[i]);
    return sol;
}

/// M(a) = int_0^R 4 pi h^{-1}(u) r^2 dr, carried by the integrator.
inline double mass_of(const RadialSolution& sol)
{
    if (sol.kind != RadialKind::compact)
        throw Error(ErrorCode::NOT_COMPACT, "mass_of: solution has unbounded support");
    return sol.mass;
}

/** Seed central value for a prescribed mass by bracketed root finding on
    M(a) - M_target; the bracket must contain a sign change (NO_BRACKET
    otherwise, e.g. gamma = 4/3 where M(a) is constant).
*/
inline double find_a_for_mass(const EquationOfState& eos, double m_target, double a_lo,
                              double a_hi, const RadialOptions& opts = {})
{
    if (!(m_target > 0.0)) throw std::invalid_argument("find_a_for_mass: M_target must be > 0");
    if (!(0.0 < a_lo && a_lo < a_hi))
        throw std::invalid_argument("find_a_for_mass: bad bracket");
    auto f = [&](double a) { return mass_of(shoot(eos, a, opts)) - m_target; };
    math::BrentOptions bo;
    bo.xtol_rel = 1e-10;
    return math::brent(f, a_lo, a_hi, bo);
}

} // namespace rotstar
