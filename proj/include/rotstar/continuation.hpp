/** \file continuation.hpp
    \brief Branch tracing in the rotation intensity with termination triage.

    Steps kappa^2 upward from the non-rotating seed with warm starts and an
    adaptive step, and classifies why the trace stops: density or support
    growth, approach to the admissible-set boundary, a suspected fold, an
    exhausted domain, or plain budget limits. Thresholds are numerical proxies
    for the analytic alternatives, so growth reasons are reported as
    "suspected", never as certainties.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotstar/field.hpp"
#include "rotstar/math/interp.hpp"
#include "rotstar/rotation.hpp"
#include "rotstar/scf.hpp"

namespace rotstar {

enum class TerminationReason {
    DENSITY_UNBOUNDED_SUSPECTED,
    SUPPORT_UNBOUNDED_SUSPECTED,
    ON_BOUNDARY,
    FOLD_SUSPECTED,
    KAPPA_MAX_REACHED,
    MAX_STEPS,
    GRID_EXHAUSTED,
};

inline const char* to_string(TerminationReason r)
{
    switch (r) {
        case TerminationReason::DENSITY_UNBOUNDED_SUSPECTED: return "DENSITY_UNBOUNDED_SUSPECTED";
        case TerminationReason::SUPPORT_UNBOUNDED_SUSPECTED: return "SUPPORT_UNBOUNDED_SUSPECTED";
        case TerminationReason::ON_BOUNDARY: return "ON_BOUNDARY";
        case TerminationReason::FOLD_SUSPECTED: return "FOLD_SUSPECTED";
        case TerminationReason::KAPPA_MAX_REACHED: return "KAPPA_MAX_REACHED";
        case TerminationReason::MAX_STEPS: return "MAX_STEPS";
        case TerminationReason::GRID_EXHAUSTED: return "GRID_EXHAUSTED";
    }
    return "UNKNOWN";
}

/// Why the trace stopped, with the trailing diagnostics that justify it.
struct TerminationReport {
    TerminationReason reason = TerminationReason::MAX_STEPS;
    std::string detail;
    std::vector<double> sup_rho_trend;   ///< last <= 5 accepted points, oldest first
    std::vector<double> support_trend;   ///< r_max_support of the same points
    std::vector<double> margin_trend;    ///< o_n_margin of the same points
};

/// Everything the termination rules look at, so they stay a pure function.
struct TerminationState {
    std::vector<double> sup_rho;    ///< per accepted point, oldest first
    std::vector<double> r_support;  ///< r_max_support per accepted point
    std::vector<double> o_n_margin; ///< margin per accepted point
    double r_max = 0.0;             ///< current domain extent
    double rho_max = std::numeric_limits<double>::infinity();
    double support_frac = 0.9;
    double margin_min = 0.0;
    bool kappa_at_max = false;
    bool max_steps_reached = false;
    bool delta_min_reached = false;
    bool mass_unreachable_after_regrid = false;
};

namespace detail {

/// Superlinear growth across the last five samples: positive, strictly
/// increasing differences whose last is at least twice the first.
inline bool superlinear_tail(const std::vector<double>& v)
{
    if (v.size() < 5) return false;
    const std::size_t n = v.size();
    double d[4];
    for (int k = 0; k < 4; ++k) d[k] = v[n - 4 + k] - v[n - 5 + k];
    for (int k = 0; k < 4; ++k)
        if (!(d[k] > 0.0)) return false;
    for (int k = 1; k < 4; ++k)
        if (!(d[k] > d[k - 1])) return false;
    return d[3] >= 2.0 * d[0];
}

inline std::vector<double> tail5(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    return {v.begin() + (n > 5 ? n - 5 : 0), v.end()};
}

}  // namespace detail

/** Applies the termination rules to a state snapshot, in priority order:
    density growth, support growth, boundary approach, kappa/step budgets,
    exhausted grid, then fold suspicion. Returns nothing when no rule fires.
*/
inline std::optional<TerminationReport> classify_termination(const TerminationState& st)
{
    if (st.sup_rho.empty()) throw std::invalid_argument("classify_termination: empty state");
    TerminationReport rep;
    rep.sup_rho_trend = detail::tail5(st.sup_rho);
    rep.support_trend = detail::tail5(st.r_support);
    rep.margin_trend = detail::tail5(st.o_n_margin);

    const double sup = st.sup_rho.back();
    if (sup > st.rho_max) {
        rep.reason = TerminationReason::DENSITY_UNBOUNDED_SUSPECTED;
        rep.detail = "sup rho " + std::to_string(sup) + " exceeds rho_max " +
                     std::to_string(st.rho_max);
        return rep;
    }
    if (detail::superlinear_tail(st.sup_rho)) {
        rep.reason = TerminationReason::DENSITY_UNBOUNDED_SUSPECTED;
        rep.detail = "sup rho grows superlinearly across the last five points";
        return rep;
    }
    if (st.r_support.back() > st.support_frac * st.r_max) {
        rep.reason = TerminationReason::SUPPORT_UNBOUNDED_SUSPECTED;
        rep.detail = "support radius " + std::to_string(st.r_support.back()) + " exceeds " +
                     std::to_string(st.support_frac) + " * r_max";
        return rep;
    }
    if (st.o_n_margin.back() < st.margin_min) {
        rep.reason = TerminationReason::ON_BOUNDARY;
        rep.detail = "o_n_margin " + std::to_string(st.o_n_margin.back()) +
                     " fell below margin_min " + std::to_string(st.margin_min);
        return rep;
    }
    if (st.kappa_at_max) {
        rep.reason = TerminationReason::KAPPA_MAX_REACHED;
        rep.detail = "kappa reached kappa_max";
        return rep;
    }
    if (st.max_steps_reached) {
        rep.reason = TerminationReason::MAX_STEPS;
        rep.detail = "accepted-step budget exhausted";
        return rep;
    }
    if (st.mass_unreachable_after_regrid) {
        rep.reason = TerminationReason::GRID_EXHAUSTED;
        rep.detail = "mass unreachable again after the automatic domain doubling";
        return rep;
    }
    if (st.delta_min_reached) {
        rep.reason = TerminationReason::FOLD_SUSPECTED;
        rep.detail = "step shrank to delta_min with no growth or boundary flag";
        return rep;
    }
    return std::nullopt;
}

/// Per-accepted-point stepping metadata (parallel to Branch::points).
struct StepRecord {
    double delta_kappa_sq = 0.0;  ///< kappa^2 increment that produced the point
    int retries = 0;              ///< rejected attempts before acceptance
    std::string status;           ///< "seed", "accepted" or "regrid"
};

struct ContinuationOptions {
    double kappa_max = 2.0;
    double delta0 = 0.01;      ///< initial kappa^2 step
    double delta_min = 1e-6;
    double delta_max = 0.25;
    int max_steps = 200;       ///< accepted continuation steps beyond the seed
    double rho_max = std::numeric_limits<double>::infinity();
    double support_frac = 0.9;
    double margin_min_frac = 1e-6;  ///< margin_min = frac * |seed offset|
    double coherence_frac = 0.5;    ///< warm-start jump bound, fraction of sup rho
    bool allow_regrid = true;       ///< single automatic domain-doubling budget
};

struct Branch {
    std::vector<SolutionPoint> points;  ///< accepted, kappa strictly increasing
    std::vector<StepRecord> steps;      ///< parallel to points
    TerminationReport termination;
    GridPtr final_grid;                 ///< domain after any enlargement
};

namespace detail {

/// Density carried to a wider domain: per-row monotone interpolation in r,
/// zero beyond the old extent (the field vanishes at the old boundary).
inline AxisymmetricField regrid_density(const AxisymmetricField& f, const GridPtr& to)
{
    const AxisGrid& g0 = *f.grid;
    const AxisGrid& g1 = *to;
    if (g1.nmu != g0.nmu)
        throw std::invalid_argument("regrid_density: angular resolution must match");
    AxisymmetricField out(to);
    std::vector<double> row(g0.nr);
    for (int j = 0; j < g0.nmu; ++j) {
        for (int i = 0; i < g0.nr; ++i) row[i] = f.at(i, j);
        const math::Pchip p(g0.r, row);
        for (int i = 0; i < g1.nr; ++i)
            out.at(i, j) = g1.r[i] <= g0.r_max ? std::max(0.0, p.eval(g1.r[i])) : 0.0;
    }
    return out;
}

}  // namespace detail

/** Traces the branch from the non-rotating seed.

    Each step proposes kappa^2 + delta (capped at kappa_max^2), warm-starts
    the solver from the previous density, and accepts only coherent iterates
    (jump <= coherence_frac * previous sup). Failures halve delta down to
    delta_min; acceptance grows it by 1.5x up to delta_max. When support
    approaches the boundary or the mass becomes unreachable, one automatic
    domain doubling re-solves the last point on the wider grid; a recurrence
    terminates the trace. The solver context is taken by value because the
    enlargement swaps the grid.
*/
inline Branch run_branch(SolverContext ctx, const ContinuationOptions& opts,
                         const AxisymmetricField& seed_init)
{
    if (ctx.rotation.mode == RotationMode::angular_velocity) {
        if (!ctx.rotation.omega)
            throw std::invalid_argument("run_branch: velocity mode needs an omega law");
        require_admissible(*ctx.rotation.omega);
    } else if (!ctx.rotation.momentum) {
        throw std::invalid_argument("run_branch: momentum mode needs a momentum law");
    }

    Branch b;
    try {
        b.points.push_back(solve_equilibrium(ctx, 0.0, seed_init));
    } catch (const Error& e) {
        throw Error(ErrorCode::SEED_FAILURE,
                    std::string("run_branch: kappa = 0 solve failed: ") + e.what());
    }
    b.steps.push_back({0.0, 0, "seed"});
    b.final_grid = ctx.grid;

    const double kappa_max_sq = opts.kappa_max * opts.kappa_max;
    double delta = std::min(opts.delta0, opts.delta_max);
    bool regrid_budget = opts.allow_regrid;
    bool delta_min_reached = false;
    bool mass_unreachable_after_regrid = false;

    auto state_now = [&]() {
        TerminationState st;
        for (const SolutionPoint& p : b.points) {
            st.sup_rho.push_back(p.diag.sup_rho);
            st.r_support.push_back(p.diag.r_max_support);
            st.o_n_margin.push_back(p.diag.o_n_margin);
        }
        st.r_max = ctx.grid->r_max;
        st.rho_max = opts.rho_max;
        st.support_frac = opts.support_frac;
        st.margin_min = opts.margin_min_frac * std::abs(b.points.front().offset);
        // relative slop absorbs the sqrt/square round trip of a capped step
        st.kappa_at_max = b.points.back().kappa >= opts.kappa_max * (1.0 - 1e-12);
        st.max_steps_reached = static_cast<int>(b.points.size()) - 1 >= opts.max_steps;
        st.delta_min_reached = delta_min_reached;
        st.mass_unreachable_after_regrid = mass_unreachable_after_regrid;
        return st;
    };

    // Re-solves the last accepted point on a doubled domain, replacing it.
    auto enlarge_domain = [&]() {
        const SolutionPoint& last = b.points.back();
        const GridPtr big = make_grid(ctx.grid->nr, ctx.grid->nmu, 2.0 * ctx.grid->r_max);
        const AxisymmetricField init = detail::regrid_density(last.field, big);
        ctx.grid = big;
        b.final_grid = big;
        regrid_budget = false;
        b.points.back() = solve_equilibrium(ctx, last.kappa, init);
        b.steps.back().status = "regrid";
    };

    while (true) {
        const auto st = state_now();
        if (auto rep = classify_termination(st)) {
            if (rep->reason == TerminationReason::SUPPORT_UNBOUNDED_SUSPECTED && regrid_budget) {
                enlarge_domain();
                continue;
            }
            b.termination = *rep;
            return b;
        }

        const SolutionPoint& prev = b.points.back();
        const double ksq = prev.kappa * prev.kappa;
        int retries = 0;
        for (;;) {
            const double next_sq = std::min(ksq + delta, kappa_max_sq);
            bool failed = false;
            bool unreachable = false;
            try {
                SolutionPoint cand = solve_equilibrium(ctx, std::sqrt(next_sq), prev);
                if (sup_diff(cand.field, prev.field) >
                    opts.coherence_frac * prev.diag.sup_rho) {
                    failed = true;  // incoherent jump: likely left the branch
                } else {
                    b.points.push_back(std::move(cand));
                    b.steps.push_back({next_sq - ksq, retries, "accepted"});
                    delta = std::min(1.5 * delta, opts.delta_max);
                    break;
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::NO_CONVERGENCE) {
                    failed = true;
                } else if (e.code() == ErrorCode::MASS_UNREACHABLE) {
                    unreachable = true;
                } else {
                    throw;
                }
            }
            if (unreachable) {
                if (regrid_budget) {
                    enlarge_domain();
                    ++retries;
                    continue;  // retry the same delta on the wider domain
                }
                mass_unreachable_after_regrid = true;
                break;
            }
            if (failed) {
                if (0.5 * delta < opts.delta_min) {
                    delta_min_reached = true;
                    break;
                }
                delta *= 0.5;
                ++retries;
            }
        }
        if (delta_min_reached || mass_unreachable_after_regrid) {
            const auto rep = classify_termination(state_now());
            b.termination = *rep;  // delta_min / unreachable flags guarantee a reason
            return b;
        }
    }
}

}  // namespace rotstar
