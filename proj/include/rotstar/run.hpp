#pragma once
/** @file
    Run orchestration: validated config -> seed -> branch -> diagnostics ->
    artifacts, with the CLI exit-code contract.

    Exit codes: 0 for any clean termination (every trichotomy outcome is a
    result, not an error), 1 for configuration errors, 2 when the nonrotating
    seed cannot be produced (unreachable mass, non-compact radial solution,
    undersized grid, failed kappa = 0 solve), 3 for numerical or I/O failure
    outside the classified contract.
*/

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "continuation.hpp"
#include "diagnostics.hpp"
#include "io.hpp"
#include "radial.hpp"
#include "seed.hpp"

namespace rotstar {

/// Everything `run` assembles from a validated config before stepping.
struct Problem {
    EquationOfState eos;
    RadialSolution sol;
    GridPtr grid;
    SeedField seed;
    SolverContext ctx;
    ContinuationOptions copts;
};

inline RotationSpec rotation_from(const RunConfig& c)
{
    RotationSpec spec;
    if (c.rotation_mode == "velocity") {
        spec.mode = RotationMode::angular_velocity;
        if (c.rotation_law == "inverse_poly")
            spec.omega = make_inverse_poly(c.rotation_A, c.rotation_q);
        else
            spec.omega = make_exponential(c.rotation_omega0, c.rotation_s0);
    } else {
        spec.mode = RotationMode::angular_momentum;
        spec.momentum = make_power_momentum(c.rotation_A, c.rotation_d, c.rotation_delta);
    }
    return spec;
}

/// Seed-stage assembly. Throws NO_BRACKET when seed.mass is unreachable on
/// the bracket (e.g. gamma = 4/3, where the mass curve is flat), NOT_COMPACT
/// when the radial solution has no finite support to build a star from.
inline Problem build_problem(const RunConfig& cfg)
{
    Problem pr;
    if ((cfg.seed_a > 0.0) == (cfg.seed_mass > 0.0))
        throw Error(ErrorCode::CONFIG_ERROR,
                    "seed.a / seed.mass: exactly one must be set and positive");
    pr.eos = make_power_law(cfg.eos_gamma, cfg.eos_coeff);
    double a = cfg.seed_a;
    if (!(a > 0.0)) {
        try {
            a = find_a_for_mass(pr.eos, cfg.seed_mass, 1e-6, 1e6);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NO_BRACKET) throw;
            throw Error(ErrorCode::NO_BRACKET,
                        "seed.mass = " + detail::fmt_cfg(cfg.seed_mass) +
                            " is not attained on the central-value bracket; the mass curve "
                            "M(a) has scaling exponent (3*gamma-4)/(2*gamma-2), which "
                            "degenerates to a constant at gamma = 4/3 (" + e.what() + ")");
        }
    }
    pr.sol = shoot(pr.eos, a);
    if (pr.sol.kind != RadialKind::compact)
        throw Error(ErrorCode::NOT_COMPACT, "run: the radial seed is not compactly supported");
    const double r_max =
        cfg.grid_r_max > 0.0 ? cfg.grid_r_max : 2.0 * pr.sol.support_radius;
    pr.grid = make_grid(cfg.grid_nr, cfg.grid_nmu, r_max);
    pr.seed = seed_density(pr.sol, pr.eos, pr.grid);

    pr.ctx.grid = pr.grid;
    pr.ctx.eos = pr.eos;
    pr.ctx.rotation = rotation_from(cfg);
    pr.ctx.target_mass = cfg.seed_mass > 0.0 ? cfg.seed_mass : pr.sol.mass;
    pr.ctx.opts.tol = cfg.scf_tol;
    pr.ctx.opts.max_iter = cfg.scf_max_iter;
    pr.ctx.opts.relax = cfg.scf_relax;
    pr.ctx.opts.lmax = cfg.grid_lmax;
    pr.ctx.opts.s_exponent = cfg.diagnostics_s_exponent;
    pr.ctx.opts.support_floor_frac = cfg.diagnostics_floor;

    pr.copts.kappa_max = cfg.continuation_kappa_max;
    pr.copts.delta0 = cfg.continuation_kappa_sq_step_init;
    pr.copts.delta_min = cfg.continuation_step_min;
    pr.copts.delta_max = cfg.continuation_step_max;
    pr.copts.max_steps = cfg.continuation_max_steps;
    pr.copts.rho_max = cfg.continuation_rho_max;
    pr.copts.support_frac = cfg.continuation_support_frac;
    pr.copts.margin_min_frac = cfg.continuation_margin_min;
    return pr;
}

namespace detail {

/// Deterministic uniform in [0,1) from a raw 64-bit draw; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double unit_draw(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace detail

/** Structural verification pass over every accepted point.

    Runs support_bound_check and formulation_residual on each point, plus one
    rng-seeded linearization probe (a Gaussian density bump placed inside the
    sampled point's support). Returns the summary.json "diagnostics" block;
    all values are deterministic functions of (config, branch).
*/
inline nlohmann::ordered_json run_diagnostics(const SolverContext& ctx, const Branch& b,
                                              const RunConfig& cfg)
{
    nlohmann::ordered_json d;
    bool support_all = true;
    double resid_max = 0.0;
    for (const SolutionPoint& p : b.points) {
        if (!support_bound_check(ctx, p, cfg.diagnostics_s_exponent).overall())
            support_all = false;
        resid_max = std::max(
            resid_max, formulation_residual(ctx, p, cfg.diagnostics_floor * p.diag.sup_rho));
    }
    d["support_bound_all_pass"] = support_all;
    d["formulation_residual_max"] = resid_max;

    // Momentum-mode linearization is only defined at kappa = 0 (the
    // centrifugal term depends on the density there), so sample the seed.
    std::mt19937_64 rng(cfg.rng_seed);
    std::size_t idx = 0;
    if (ctx.rotation.mode == RotationMode::angular_velocity)
        idx = static_cast<std::size_t>(rng() % b.points.size());
    const SolutionPoint& p = b.points[idx];
    const double s0 = 0.6 * p.diag.r_eq * detail::unit_draw(rng());
    const double z0 = 0.6 * p.diag.r_pole * detail::unit_draw(rng());
    PerturbationDirection dir;
    dir.drho = make_gaussian_bump(p.field.grid, s0, z0, 0.25 * p.diag.r_eq);
    const ValidationReport lin = linearization_check(ctx, p, dir, {1e-3, 1e-4});
    nlohmann::ordered_json lj;
    lj["point_idx"] = idx;
    lj["bump_center"] = {s0, z0};
    lj["pass"] = lin.overall();
    for (const Check& c : lin.checks)
        if (c.name.rfind("remainder_ratio_", 0) == 0) lj["contraction_ratio"] = c.measured;
    d["linearization"] = lj;
    return d;
}

inline int exit_code_for(const Error& e)
{
    switch (e.code()) {
        case ErrorCode::CONFIG_ERROR:
            return 1;
        case ErrorCode::SEED_FAILURE:
        case ErrorCode::NO_BRACKET:
        case ErrorCode::NOT_COMPACT:
        case ErrorCode::NO_CLASSIFICATION:
        case ErrorCode::GRID_TOO_SMALL:
            return 2;
        default:
            return 3;
    }
}

/// Output directory after the ROTSTAR_OUT environment override.
inline std::string resolve_output_dir(const RunConfig& cfg)
{
    const char* env = std::getenv("ROTSTAR_OUT");
    return env && *env ? std::string(env) : cfg.output_dir;
}

/** Full pipeline behind `branch`: seed, continuation, verification, outputs.
    Returns the process exit code; failures are logged, never thrown. */
inline int run(const RunConfig& cfg, std::ostream& log)
{
    Problem pr;
    Branch b;
    try {
        validate(cfg);
    } catch (const Error& e) {
        log << "config error: " << e.what() << '\n';
        return 1;
    }
    try {
        pr = build_problem(cfg);
        log << "seed: a = " << pr.sol.a << ", M = " << pr.sol.mass
            << ", R = " << pr.sol.support_radius << ", grid " << pr.grid->nr << "x" << pr.grid->nmu
            << " r_max = " << pr.grid->r_max << '\n';
    } catch (const Error& e) {
        log << "seed stage failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
        const int rc = exit_code_for(e);
        return rc == 1 ? 1 : 2;  // any seed-stage breakage is a seed failure
    } catch (const std::exception& e) {
        log << "seed stage failed: " << e.what() << '\n';
        return 2;
    }
    try {
        b = run_branch(pr.ctx, pr.copts, pr.seed.rho);
    } catch (const Error& e) {
        log << "branch failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e);
    }
    try {
        const nlohmann::ordered_json diag = run_diagnostics(pr.ctx, b, cfg);
        const std::vector<std::string> files = write_outputs(b, cfg, resolve_output_dir(cfg), diag);
        log << "terminated: " << to_string(b.termination.reason) << " (" << b.termination.detail
            << ")\n"
            << "accepted points: " << b.points.size()
            << ", final kappa = " << b.points.back().kappa << '\n';
        for (const std::string& f : files) log << "wrote " << f << '\n';
    } catch (const Error& e) {
        log << "output stage failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

/** Rebuild a SolutionPoint from a snapshot for offline re-verification.

    The density and potential are taken as stored; the residual and the
    scalar summaries are recomputed from scratch against the law in `ctx`,
    so a corrupted snapshot shows up as a failed check rather than being
    trusted. The snapshot's mode must match the context's rotation mode.
*/
inline SolutionPoint rehydrate_point(const SolverContext& ctx, const Snapshot& s)
{
    if (s.mode != ctx.rotation.mode)
        throw Error(ErrorCode::CONFIG_ERROR,
                    std::string("snapshot mode '") + to_string(s.mode) +
                        "' does not match rotation.mode");
    SolutionPoint p;
    p.field = s.rho;
    p.potential = s.U;
    p.kappa = s.kappa;
    p.offset = s.offset;
    p.mode = s.mode;
    p.mass = total_mass(s.rho);
    p.mass_error = std::abs(p.mass - ctx.target_mass);
    p.scf_iters = 0;

    p.diag.sup_rho = s.rho.max_value();
    const double floor = ctx.opts.support_floor_frac * std::max(p.diag.sup_rho, 1e-300);
    const SupportRadii sr = support_radii(s.rho, floor);
    p.diag.r_eq = sr.r_eq;
    p.diag.r_pole = sr.r_pole;
    p.diag.r_max_support = sr.r_max_support;
    p.diag.weighted_norm_s = weighted_norm(s.rho, ctx.opts.s_exponent);
    if (ctx.rotation.mode == RotationMode::angular_velocity) {
        const double jsup = ctx.rotation.omega ? ctx.rotation.omega->j_sup : 0.0;
        p.diag.o_n_margin = -(p.offset + p.kappa * p.kappa * jsup);
    } else {
        p.diag.o_n_margin = -p.offset;
    }

    SolverContext c = ctx;
    c.grid = s.rho.grid;
    const AxisymmetricField image =
        detail::fixed_offset_image(c, s.rho, s.kappa, s.offset);
    double r = 0.0;
    for (std::size_t k = 0; k < image.values.size(); ++k)
        r = std::max(r, std::abs(s.rho.values[k] - image.values[k]));
    p.residual_inf = r;
    return p;
}

}  // namespace rotstar
