/** \file scf.hpp
    \brief Mass-constrained equilibrium solver (damped self-consistent field).

    At fixed rotation intensity kappa the map
        rho -> h^{-1}([ U(rho) + cf(rho) + offset ]_+)
    is iterated with under-relaxation, where U is the Newtonian potential,
    cf the centrifugal term of the selected formulation, and the offset
    (alpha in angular-velocity mode, lambda in angular-momentum mode) is
    re-solved each iterate so the total mass equals the target exactly. The
    offset is eliminated by a monotone 1-D root solve instead of being carried
    as an unknown: the mass constraint then holds to machine precision and the
    outer problem stays one-dimensional in kappa.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "rotstar/common.hpp"
#include "rotstar/eos.hpp"
#include "rotstar/field.hpp"
#include "rotstar/gravity.hpp"
#include "rotstar/math/roots.hpp"
#include "rotstar/rotation.hpp"

namespace rotstar {

struct ScfOptions {
    double tol = 1e-8;        ///< accept when residual_inf <= tol * sup rho
    int max_iter = 500;
    double relax = 0.5;       ///< initial blend weight theta
    int lmax = 16;            ///< multipole order of the potential solve
    double s_exponent = 4.0;  ///< decay exponent of the reported weighted norm
    double support_floor_frac = 1e-10;  ///< support threshold, fraction of sup rho
};

/// Everything a solve needs besides the iterate itself.
struct SolverContext {
    GridPtr grid;
    EquationOfState eos;
    RotationSpec rotation;
    double target_mass = 0.0;
    ScfOptions opts;
};

/// Scalar summaries attached to an accepted point.
struct PointDiag {
    double sup_rho = 0.0;
    double r_eq = 0.0, r_pole = 0.0, r_max_support = 0.0;
    double weighted_norm_s = 0.0;
    double o_n_margin = 0.0;  ///< -(offset + kappa^2 sup j) resp. -lambda
};

struct SolutionPoint {
    AxisymmetricField field;      ///< density
    AxisymmetricField potential;  ///< U = 1/|x| * rho of `field`
    double kappa = 0.0;
    double offset = 0.0;          ///< alpha (velocity mode) or lambda (momentum mode)
    RotationMode mode = RotationMode::angular_velocity;
    double mass = 0.0;
    double mass_error = 0.0;      ///< |total_mass(field) - target|
    double residual_inf = 0.0;    ///< sup |field - h^{-1}([U+cf+offset]_+)|
    int scf_iters = 0;
    PointDiag diag;
};

/** Offset making the bracket field hold exactly the target mass.

    g(offset) = total_mass(h^{-1}([U + cf + offset]_+)) is nondecreasing, so a
    Brent solve on [-(sup of U+cf), 0] pins |g - M| <= 1e-10 M. Throws
    MASS_UNREACHABLE when even offset = 0 cannot hold the mass (the domain is
    too small); the caller is expected to enlarge the grid.
*/
inline double solve_offset_for_mass(const AxisymmetricField& U, const AxisymmetricField& cf,
                                    const EquationOfState& eos, double M)
{
    if (!(M > 0.0)) throw std::invalid_argument("solve_offset_for_mass: target mass must be positive");
    const GridPtr grid = U.grid;
    auto g = [&](double offset) {
        AxisymmetricField f(grid);
        for (std::size_t k = 0; k < f.values.size(); ++k)
            f.values[k] = eval_h_inverse(eos, U.values[k] + cf.values[k] + offset);
        return total_mass(f);
    };

    if (g(0.0) < M)
        throw Error(ErrorCode::MASS_UNREACHABLE,
                    "offset solve: domain cannot hold the target mass at offset 0");
    double lo = 0.0;
    for (std::size_t k = 0; k < U.values.size(); ++k)
        lo = std::min(lo, -(U.values[k] + cf.values[k]));
    const double offset = math::brent([&](double a) { return g(a) - M; }, lo, 0.0,
                                      {.xtol_abs = 1e-15, .xtol_rel = 1e-15,
                                       .ftol_abs = 1e-12 * M, .max_iter = 300});
    if (std::abs(g(offset) - M) > 1e-10 * M)
        throw Error(ErrorCode::NO_CONVERGENCE, "offset solve: mass residual above 1e-10 M");
    return offset;
}

/// One fixed-point analysis of an iterate: potential, centrifugal term,
/// mass-exact offset, pure image and residual.
struct ScfAnalysis {
    AxisymmetricField U, cf, candidate;
    double offset = 0.0;
    double residual_inf = 0.0;
};

inline ScfAnalysis analyze_iterate(const SolverContext& ctx, const AxisymmetricField& rho,
                                   double kappa)
{
    ScfAnalysis a;
    a.U = potential(rho, ctx.opts.lmax);
    a.cf = centrifugal_potential(ctx.grid, ctx.rotation, rho, kappa);
    a.offset = solve_offset_for_mass(a.U, a.cf, ctx.eos, ctx.target_mass);
    a.candidate = AxisymmetricField(ctx.grid);
    for (std::size_t k = 0; k < rho.values.size(); ++k)
        a.candidate.values[k] =
            eval_h_inverse(ctx.eos, a.U.values[k] + a.cf.values[k] + a.offset);
    a.residual_inf = sup_diff(rho, a.candidate);
    return a;
}

/** One damped step rho -> (1-theta) rho + theta h^{-1}([U+cf+offset]_+).

    The offset is re-solved for the target mass after the potential solve, so
    mass(result) = (1-theta) mass(rho) + theta M.
*/
inline AxisymmetricField scf_step(const SolverContext& ctx, const AxisymmetricField& rho,
                                  double kappa, double theta)
{
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("scf_step: relaxation must lie in (0, 1]");
    const ScfAnalysis a = analyze_iterate(ctx, rho, kappa);
    AxisymmetricField out(ctx.grid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = (1.0 - theta) * rho.values[k] + theta * a.candidate.values[k];
    return out;
}

namespace detail {

inline SolutionPoint finalize_point(const SolverContext& ctx, const AxisymmetricField& rho,
                                    double kappa, int iters)
{
    const ScfAnalysis a = analyze_iterate(ctx, rho, kappa);
    SolutionPoint p;
    p.field = rho;
    p.potential = a.U;
    p.kappa = kappa;
    p.offset = a.offset;
    p.mode = ctx.rotation.mode;
    p.mass = total_mass(rho);
    p.mass_error = std::abs(p.mass - ctx.target_mass);
    p.residual_inf = a.residual_inf;
    p.scf_iters = iters;

    p.diag.sup_rho = rho.max_value();
    const double floor = ctx.opts.support_floor_frac * std::max(p.diag.sup_rho, 1e-300);
    const SupportRadii sr = support_radii(rho, floor);
    p.diag.r_eq = sr.r_eq;
    p.diag.r_pole = sr.r_pole;
    p.diag.r_max_support = sr.r_max_support;
    p.diag.weighted_norm_s = weighted_norm(rho, ctx.opts.s_exponent);
    if (ctx.rotation.mode == RotationMode::angular_velocity) {
        const double jsup = ctx.rotation.omega ? ctx.rotation.omega->j_sup : 0.0;
        p.diag.o_n_margin = -(p.offset + kappa * kappa * jsup);
    } else {
        p.diag.o_n_margin = -p.offset;
    }
    return p;
}

/** Rejects converged iterates that are not admissible equilibria.

    A fixed point whose support reaches the outermost radial ring is the
    domain-truncated ghost of a configuration that does not fit the grid, and
    a non-positive O_N margin means the effective potential stays positive at
    infinity, so the true support would be unbounded. Both are surfaced as
    failures rather than returned as silent wrong answers.
*/
inline void require_admissible_point(const SolverContext& ctx, const SolutionPoint& p)
{
    const AxisGrid& g = *ctx.grid;
    const double floor = ctx.opts.support_floor_frac * std::max(p.diag.sup_rho, 1e-300);
    for (int j = 0; j < g.nmu; ++j)
        if (p.field.at(g.nr - 1, j) > floor)
            throw Error(ErrorCode::NO_CONVERGENCE,
                        "solve_equilibrium: converged support reaches the grid boundary "
                        "(r_max too small at kappa = " + std::to_string(p.kappa) + ")");
    if (!(p.diag.o_n_margin > 0.0))
        throw Error(ErrorCode::NO_CONVERGENCE,
                    "solve_equilibrium: converged iterate has non-positive O_N margin "
                    "(offset + kappa^2 sup j = " + std::to_string(-p.diag.o_n_margin) + ")");
}

}  // namespace detail

/** Damped SCF iteration at fixed kappa from an initial density.

    The initial field is scaled to the target mass, then each step blends
    toward the mass-exact fixed-point image; the blend weight halves (down to
    1/64) whenever the residual fails to decrease. Acceptance is
    residual_inf <= tol * sup rho, measured by a fresh analysis of the final
    iterate. Throws NO_CONVERGENCE after max_iter steps and propagates
    MASS_UNREACHABLE from the offset solve.
*/
inline SolutionPoint solve_equilibrium(const SolverContext& ctx, double kappa,
                                       const AxisymmetricField& init)
{
    const double m0 = total_mass(init);
    if (!(m0 > 0.0))
        throw Error(ErrorCode::SEED_FAILURE, "solve_equilibrium: initial field has no mass");
    if (!(ctx.target_mass > 0.0))
        throw std::invalid_argument("solve_equilibrium: target mass must be positive");

    AxisymmetricField rho = init;
    const double scale0 = ctx.target_mass / m0;
    for (double& v : rho.values) v *= scale0;

    double theta = std::clamp(ctx.opts.relax, 1.0 / 64.0, 1.0);
    double prev_residual = std::numeric_limits<double>::infinity();
    int streak = 0;  // consecutive residual decreases; sustained progress re-grows theta
    for (int it = 1; it <= ctx.opts.max_iter; ++it) {
        const ScfAnalysis a = analyze_iterate(ctx, rho, kappa);
        if (a.residual_inf <= ctx.opts.tol * std::max(rho.max_value(), 1e-300)) {
            SolutionPoint p = detail::finalize_point(ctx, rho, kappa, it - 1);
            detail::require_admissible_point(ctx, p);
            return p;
        }
        if (a.residual_inf > prev_residual) {
            theta = std::max(0.5 * theta, 1.0 / 64.0);
            streak = 0;
        } else if (++streak >= 2) {
            theta = std::min(1.5 * theta, 1.0);
            streak = 0;
        }
        prev_residual = a.residual_inf;
        for (std::size_t k = 0; k < rho.values.size(); ++k)
            rho.values[k] = (1.0 - theta) * rho.values[k] + theta * a.candidate.values[k];
    }
    throw Error(ErrorCode::NO_CONVERGENCE,
                "solve_equilibrium: no acceptance after " + std::to_string(ctx.opts.max_iter) +
                    " iterations (kappa = " + std::to_string(kappa) + ")");
}

/// Warm-started variant reusing a previous point's density as the initial iterate.
inline SolutionPoint solve_equilibrium(const SolverContext& ctx, double kappa,
                                       const SolutionPoint& prev)
{
    return solve_equilibrium(ctx, kappa, prev.field);
}

/// Both residuals of a stored point, recomputed from scratch with a fresh
/// potential solve; the single source of truth for acceptance checks.
struct Residuals {
    double residual_inf = 0.0;
    double mass_error = 0.0;
};

inline Residuals residual_F(const SolverContext& ctx, const SolutionPoint& point)
{
    const AxisymmetricField U = potential(point.field, ctx.opts.lmax);
    const AxisymmetricField cf =
        centrifugal_potential(ctx.grid, ctx.rotation, point.field, point.kappa);
    AxisymmetricField image(ctx.grid);
    for (std::size_t k = 0; k < image.values.size(); ++k)
        image.values[k] =
            eval_h_inverse(ctx.eos, U.values[k] + cf.values[k] + point.offset);
    Residuals r;
    r.residual_inf = sup_diff(point.field, image);
    r.mass_error = std::abs(total_mass(point.field) - ctx.target_mass);
    return r;
}

}  // namespace rotstar
