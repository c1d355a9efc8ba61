/** \file diagnostics.hpp
    \brief Independent verification of structural properties of computed
    equilibria.

    Four read-only analyses of an accepted SolutionPoint:

      - support_bound_check: the measured potential-decay constant forces the
        fixed-point bracket negative outside a computable ball, so compact
        support is a consequence, not an assumption.
      - formulation_residual: the pointwise identity U + cf + offset = h(rho)
        on the positivity set, in enthalpy units.
      - cross_formulation_check: a velocity-mode point re-solved under its
        induced angular-momentum law must reproduce the same density, and the
        two offsets differ by exactly kappa^2 sup j.
      - linearization_check: finite-difference probe of the Frechet derivative
        of the fixed-point map; remainders must decay superlinearly.

    All analyses recompute the potential and centrifugal term from the stored
    density field; nothing is trusted from the solve beyond the field, the
    offset and kappa. Each analysis runs on the grid the point's field was
    computed on (a continuation branch may change grids mid-run), so the
    context's grid member is ignored.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotstar/common.hpp"
#include "rotstar/eos.hpp"
#include "rotstar/field.hpp"
#include "rotstar/gravity.hpp"
#include "rotstar/rotation.hpp"
#include "rotstar/scf.hpp"

namespace rotstar {

namespace detail {

inline std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// Context rebased onto the grid the point was computed on.
inline SolverContext point_context(const SolverContext& ctx, const SolutionPoint& p)
{
    SolverContext c = ctx;
    c.grid = p.field.grid;
    return c;
}

/// h^{-1}([U(rho) + cf(rho, kappa) + offset]_+) with a caller-fixed offset
/// (no mass re-solve); the fixed-point map's image at prescribed parameters.
inline AxisymmetricField fixed_offset_image(const SolverContext& ctx,
                                            const AxisymmetricField& rho, double kappa,
                                            double offset)
{
    const AxisymmetricField U = potential(rho, ctx.opts.lmax);
    const AxisymmetricField cf = centrifugal_potential(ctx.grid, ctx.rotation, rho, kappa);
    AxisymmetricField img(ctx.grid);
    for (std::size_t k = 0; k < img.values.size(); ++k)
        img.values[k] = eval_h_inverse(ctx.eos, U.values[k] + cf.values[k] + offset);
    return img;
}

}  // namespace detail

/** Compact-support bound of an accepted point.

    Measures C0 = sup over nodes of <x> U(x) / ||rho||_s (with <x> =
    sqrt(1+|x|^2)), so U(x) <= C0 ||rho||_s / <x> everywhere on the grid by
    construction. Membership in the admissible offset set gives the margin
    -(offset + kappa^2 sup j) > 0 (resp. -offset in momentum mode), hence for
    |x| beyond r_bound = C0 * ||rho||_s / margin the bracket
    U + cf + offset is provably negative and the density must vanish.

    Checks reported:
      - o_n_membership:                offset < 0 (hypothesis gate);
      - c0_measured:                   finite positive decay constant;
      - support_in_ball:               r_max_support <= r_bound;
      - bracket_negative_outside_ball: max of U + cf + offset over nodes with
                                       r > r_bound is negative (vacuously true
                                       with a warning when r_bound >= r_max).

    A point with offset >= 0 is outside the lemma's hypothesis: the report
    carries the failing membership check plus an O_N_VIOLATION warning and the
    remaining checks are skipped.
*/
inline ValidationReport support_bound_check(const SolverContext& ctx, const SolutionPoint& p,
                                            double s = 4.0)
{
    ValidationReport rep;
    rep.add("o_n_membership", p.offset < 0.0, p.offset, 0.0);
    if (!(p.offset < 0.0)) {
        rep.warnings.push_back(
            "O_N_VIOLATION: offset >= 0 places the point outside the admissible set; "
            "support bound not applicable");
        return rep;
    }

    const SolverContext c = detail::point_context(ctx, p);
    const AxisGrid& g = *c.grid;
    const double norm_s = weighted_norm(p.field, s);
    const AxisymmetricField U = potential(p.field, c.opts.lmax);
    const AxisymmetricField cf = centrifugal_potential(c.grid, c.rotation, p.field, p.kappa);

    double c0 = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double w = std::sqrt(1.0 + g.r[i] * g.r[i]);
        for (int j = 0; j < g.nmu; ++j) c0 = std::max(c0, w * U.at(i, j));
    }
    c0 /= norm_s;
    rep.add("c0_measured", std::isfinite(c0) && c0 > 0.0, c0,
            std::numeric_limits<double>::infinity());

    const double margin = p.diag.o_n_margin;
    const double r_bound = c0 * norm_s / margin;
    rep.add("support_in_ball", p.diag.r_max_support <= r_bound, p.diag.r_max_support, r_bound);

    double worst = -std::numeric_limits<double>::infinity();
    bool nonvacuous = false;
    for (int i = 0; i < g.nr; ++i) {
        if (!(g.r[i] > r_bound)) continue;
        for (int j = 0; j < g.nmu; ++j)
            worst = std::max(worst, U.at(i, j) + cf.at(i, j) + p.offset);
        nonvacuous = true;
    }
    if (nonvacuous) {
        rep.add("bracket_negative_outside_ball", worst < 0.0, worst, 0.0);
    } else {
        rep.warnings.push_back("bound radius " + detail::fmt_g(r_bound) +
                               " reaches past the grid edge; bracket condition vacuous");
        rep.add("bracket_negative_outside_ball", true, 0.0, 0.0);
    }
    return rep;
}

/** sup over the positivity set {rho > floor} of |U + cf + offset - h(rho)|.

    The converged fixed point satisfies the identity exactly in the continuum;
    on the grid the value is bounded by the density residual through the local
    modulus of continuity of h on the attained range. Throws EMPTY_SUPPORT
    when no node clears the floor.
*/
inline double formulation_residual(const SolverContext& ctx, const SolutionPoint& p, double floor)
{
    const SolverContext c = detail::point_context(ctx, p);
    const AxisymmetricField U = potential(p.field, c.opts.lmax);
    const AxisymmetricField cf = centrifugal_potential(c.grid, c.rotation, p.field, p.kappa);

    double worst = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < p.field.values.size(); ++k) {
        const double rho = p.field.values[k];
        if (!(rho > floor)) continue;
        any = true;
        const double gap =
            U.values[k] + cf.values[k] + p.offset - eval_enthalpy(ctx.eos, rho);
        worst = std::max(worst, std::abs(gap));
    }
    if (!any)
        throw Error(ErrorCode::EMPTY_SUPPORT,
                    "formulation_residual: no node has density above the floor " +
                        detail::fmt_g(floor));
    return worst;
}

/** Velocity/momentum cross-check with a caller-supplied momentum law.

    Verifies the m -> 0+ limit of the law (continuity hypothesis L(0) = 0; a
    violating table is rejected without re-solving), then re-solves the same
    (kappa, mass) problem in momentum mode warm-started from the given point.

    Checks reported:
      - induced_L_vanishes_at_origin: L(1e-9 M) <= 1e-6 L(M);
      - density_agreement:            ||rho_omega - rho_L||_inf <= 10 tol sup rho;
      - offset_identity:              |lambda - (alpha + kappa^2 sup j)| <= 1e-6 |alpha|.

    The identity is the quadrature fact that the momentum-mode centrifugal
    integral of the induced law equals kappa^2 (j - sup j), so the two
    formulations describe one equilibrium with offsets shifted by
    kappa^2 sup j. Solver failures of the re-solve propagate.
*/
inline ValidationReport cross_formulation_check(const SolverContext& ctx, const SolutionPoint& p,
                                                const MomentumLaw& law)
{
    if (p.mode != RotationMode::angular_velocity)
        throw std::invalid_argument("cross_formulation_check: expects a velocity-mode point");
    if (!ctx.rotation.omega)
        throw std::invalid_argument("cross_formulation_check: context has no velocity law");

    ValidationReport rep;
    const double m_tot = std::max(p.mass, 1e-300);
    const double near_zero = law.eval(1e-9 * m_tot);
    const double ref = law.eval(m_tot);
    rep.add("induced_L_vanishes_at_origin", near_zero <= 1e-6 * ref, near_zero, 1e-6 * ref);
    if (!(near_zero <= 1e-6 * ref)) {
        rep.warnings.push_back("momentum law does not vanish at zero mass; re-solve skipped");
        return rep;
    }

    SolverContext mctx = detail::point_context(ctx, p);
    mctx.rotation.mode = RotationMode::angular_momentum;
    mctx.rotation.momentum = law;
    mctx.rotation.omega.reset();
    const SolutionPoint q = solve_equilibrium(mctx, p.kappa, p);

    const double dist = sup_diff(p.field, q.field);
    const double dist_tol = 10.0 * ctx.opts.tol * p.diag.sup_rho;
    rep.add("density_agreement", dist <= dist_tol, dist, dist_tol);

    const double k2 = p.kappa * p.kappa;
    const double lambda_expected = p.offset + (k2 == 0.0 ? 0.0 : k2 * ctx.rotation.omega->j_sup);
    const double id_err = std::abs(q.offset - lambda_expected);
    const double id_tol = 1e-6 * std::abs(p.offset);
    rep.add("offset_identity", id_err <= id_tol, id_err, id_tol);
    return rep;
}

/// Convenience overload: induces the momentum law from the point's own
/// density under the context's velocity law, then cross-checks against it.
inline ValidationReport cross_formulation_check(const SolverContext& ctx, const SolutionPoint& p)
{
    if (!ctx.rotation.omega)
        throw std::invalid_argument("cross_formulation_check: context has no velocity law");
    return cross_formulation_check(ctx, p, make_induced_momentum(*ctx.rotation.omega, p.field));
}

/// Direction of a linearization probe: a density increment plus scalar
/// increments of kappa and of the offset.
struct PerturbationDirection {
    AxisymmetricField drho;
    double dkappa = 0.0;
    double doffset = 0.0;
};

/// Smooth axisymmetric bump centered at cylindrical coordinates (s0, z0):
/// amplitude * exp(-((s-s0)^2 + (z-z0)^2) / (2 sigma^2)) at every node.
inline AxisymmetricField make_gaussian_bump(const GridPtr& grid, double s0, double z0,
                                            double sigma, double amplitude = 1.0)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("make_gaussian_bump: sigma must be positive");
    AxisymmetricField f(grid);
    const AxisGrid& g = *grid;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nmu; ++j) {
            const double mu = g.mu[j];
            const double s = g.r[i] * std::sqrt(std::max(0.0, 1.0 - mu * mu));
            const double z = g.r[i] * mu;
            const double d2 = (s - s0) * (s - s0) + (z - z0) * (z - z0);
            f.at(i, j) = amplitude * std::exp(-d2 / (2.0 * sigma * sigma));
        }
    return f;
}

/** Finite-difference probe of the fixed-point map's Frechet derivative.

    With F(rho, kappa, offset) = rho - h^{-1}([U(rho) + cf(kappa) + offset]_+)
    the derivative in direction (drho, dkappa, doffset) is drho - L where

        L = (h^{-1})'(U + cf + offset) * (U(drho) + (d cf/d kappa) dkappa + doffset)

    on the positivity set and 0 elsewhere. For every eps in eps_list the
    remainder ||F(perturbed) - F(point) - eps (drho - L)||_inf is recorded;
    between successive shrinking eps the remainder must drop by at least 5x
    (superlinear decay), and eps = 0 must give exactly 0.

    The centrifugal term must not depend on the density for the closed-form L
    to be complete, so momentum mode is only accepted at kappa = 0 (where the
    term vanishes identically); velocity mode is accepted at any kappa.
*/
inline ValidationReport linearization_check(const SolverContext& ctx, const SolutionPoint& p,
                                            const PerturbationDirection& dir,
                                            const std::vector<double>& eps_list)
{
    const SolverContext c = detail::point_context(ctx, p);
    const AxisGrid& g = *c.grid;
    if (dir.drho.grid->nr != g.nr || dir.drho.grid->nmu != g.nmu ||
        dir.drho.grid->r_max != g.r_max)
        throw std::invalid_argument("linearization_check: direction field on a different grid");
    if (p.mode == RotationMode::angular_momentum && p.kappa != 0.0)
        throw std::invalid_argument(
            "linearization_check: momentum-mode centrifugal term depends on the density; "
            "only kappa = 0 is supported");
    for (double e : eps_list)
        if (!(e >= 0.0))
            throw std::invalid_argument("linearization_check: eps values must be >= 0");

    const AxisymmetricField U0 = potential(p.field, c.opts.lmax);
    const AxisymmetricField cf0 =
        centrifugal_potential(c.grid, c.rotation, p.field, p.kappa);
    const AxisymmetricField dU = potential(dir.drho, c.opts.lmax);

    // d cf / d kappa: 2 kappa dkappa j(s) in velocity mode, 0 at kappa = 0.
    AxisymmetricField dcf(c.grid);
    if (p.mode == RotationMode::angular_velocity && p.kappa != 0.0 && dir.dkappa != 0.0) {
        if (!c.rotation.omega)
            throw std::invalid_argument("linearization_check: context has no velocity law");
        for (int i = 0; i < g.nr; ++i)
            for (int j = 0; j < g.nmu; ++j) {
                const double s =
                    g.r[i] * std::sqrt(std::max(0.0, 1.0 - g.mu[j] * g.mu[j]));
                dcf.at(i, j) = 2.0 * p.kappa * dir.dkappa * c.rotation.omega->j(s);
            }
    }

    const std::size_t n = p.field.values.size();
    std::vector<double> w0(n), F0(n), Lf(n);
    for (std::size_t k = 0; k < n; ++k) {
        w0[k] = U0.values[k] + cf0.values[k] + p.offset;
        F0[k] = p.field.values[k] - eval_h_inverse(ctx.eos, w0[k]);
        Lf[k] = eval_dh_inverse(ctx.eos, w0[k]) *
                (dU.values[k] + dcf.values[k] + dir.doffset);
    }

    ValidationReport rep;
    std::vector<double> rem(eps_list.size(), 0.0);
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        AxisymmetricField rho_eps = p.field;
        for (std::size_t k = 0; k < n; ++k) rho_eps.values[k] += eps * dir.drho.values[k];
        const AxisymmetricField img = detail::fixed_offset_image(
            c, rho_eps, p.kappa + eps * dir.dkappa, p.offset + eps * dir.doffset);

        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double F_eps = rho_eps.values[k] - img.values[k];
            const double r = F_eps - F0[k] - eps * (dir.drho.values[k] - Lf[k]);
            worst = std::max(worst, std::abs(r));
        }
        rem[e] = worst;
        if (eps == 0.0)
            rep.add("remainder_at_zero_eps", worst == 0.0, worst, 0.0);
        else
            rep.add("remainder_eps_" + detail::fmt_g(eps), std::isfinite(worst), worst,
                    std::numeric_limits<double>::infinity());
    }

    bool any_pair = false;
    for (std::size_t e = 0; e + 1 < eps_list.size(); ++e) {
        if (!(eps_list[e + 1] > 0.0) || !(eps_list[e + 1] < eps_list[e])) continue;
        any_pair = true;
        const bool pass = rem[e] >= 5.0 * rem[e + 1];
        const double ratio = rem[e + 1] > 0.0 ? rem[e] / rem[e + 1]
                                              : std::numeric_limits<double>::infinity();
        rep.add("remainder_ratio_" + detail::fmt_g(eps_list[e]) + "_to_" +
                    detail::fmt_g(eps_list[e + 1]),
                pass, ratio, 5.0);
    }
    if (!any_pair && eps_list.size() > 1)
        rep.warnings.push_back("no strictly decreasing positive eps pair; decay not assessed");
    return rep;
}

}  // namespace rotstar
