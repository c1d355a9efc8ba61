/** Acceptance gate: eleven end-to-end criteria, one [PASS]/[FAIL] line each.

    Each criterion is verified against an independent oracle (closed forms,
    scaling laws, shell theorem, cross-formulation identities) or a hard
    output contract (termination classification, byte determinism). The
    binary exits 0 only when every criterion passes.
*/

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rotstar/config.hpp"
#include "rotstar/continuation.hpp"
#include "rotstar/diagnostics.hpp"
#include "rotstar/eos.hpp"
#include "rotstar/gravity.hpp"
#include "rotstar/io.hpp"
#include "rotstar/radial.hpp"
#include "rotstar/rotation.hpp"
#include "rotstar/run.hpp"
#include "rotstar/scf.hpp"
#include "rotstar/seed.hpp"

using namespace rotstar;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& text)
{
    std::printf("[%s] C%-2d %s\n", pass ? "PASS" : "FAIL", idx, text.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

/// Runs one criterion; an escaped exception fails it instead of aborting.
void criterion(int idx, const std::function<std::pair<bool, std::string>()>& body)
{
    try {
        const auto [pass, text] = body();
        report(idx, pass, text);
    } catch (const std::exception& e) {
        report(idx, false, std::string("unexpected exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Least-squares slope of log(y) against log(x).
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        num += dx * (std::log(y[i]) - my);
        den += dx * dx;
    }
    return num / den;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path fresh_dir(const std::string& name)
{
    const std::filesystem::path p = std::filesystem::path("acceptance_scratch") / name;
    std::filesystem::remove_all(p);
    return p;
}

/// The reference branch shared by criteria 6-9: gamma = 3/2, inverse_poly
/// q = 2, 96 x 12 grid spanning twice the seed support.
struct GoldenBranch {
    bool ok = false;
    std::string err;
    double seconds = 0.0;
    SolverContext ctx;
    Branch b;
    double target = 0.0;
};

GoldenBranch compute_golden()
{
    GoldenBranch g;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const EquationOfState eos = make_power_law(1.5, 1.0);
        const RadialSolution sol = shoot(eos, 1.0);
        const GridPtr grid = make_grid(96, 12, 2.0 * sol.support_radius);
        const SeedField seed = seed_density(sol, eos, grid);
        g.ctx.grid = grid;
        g.ctx.eos = eos;
        g.ctx.rotation.mode = RotationMode::angular_velocity;
        g.ctx.rotation.omega = make_inverse_poly(1.0, 2.0);
        g.ctx.target_mass = sol.mass;
        g.target = sol.mass;
        g.b = run_branch(g.ctx, ContinuationOptions{}, seed.rho);
        g.seconds = seconds_since(t0);
        g.ok = true;
    } catch (const std::exception& e) {
        g.err = e.what();
    }
    return g;
}

}  // namespace

int main()
{
    std::filesystem::remove_all("acceptance_scratch");

    // C1: mass-curve scaling M(a) ~ a^{(3g-4)/(2g-2)} for power-law EOS
    criterion(1, [] {
        const std::vector<double> as = {0.5, 1.0, 2.0, 4.0};
        double worst_dev = 0.0, worst_shot = 0.0;
        std::string detail;
        for (const double gamma : {1.3, 1.5, 1.8}) {
            const EquationOfState eos = make_power_law(gamma, 1.0);
            std::vector<double> ms;
            for (double a : as) {
                const auto t0 = std::chrono::steady_clock::now();
                ms.push_back(mass_of(shoot(eos, a)));
                worst_shot = std::max(worst_shot, seconds_since(t0));
            }
            const double slope = fit_log_slope(as, ms);
            const double expect = (3.0 * gamma - 4.0) / (2.0 * gamma - 2.0);
            worst_dev = std::max(worst_dev, std::abs(slope - expect));
            detail += " g=" + fmt(gamma) + ":" + fmt(slope) + "(exp " + fmt(expect) + ")";
        }
        return std::make_pair(
            worst_dev <= 1e-3 && worst_shot < 1.0,
            "mass-curve scaling slopes" + detail + "; max dev " + fmt(worst_dev) +
                " (tol 1e-3), slowest shot " + fmt(worst_shot) + " s (< 1 s)");
    });

    // C2: gamma = 4/3 degeneracy -- flat mass curve, unreachable targets
    criterion(2, [] {
        const EquationOfState eos = make_power_law(4.0 / 3.0, 1.0);
        const std::vector<double> as = {0.5, 1.0, 2.0, 4.0};
        std::vector<double> ms;
        for (double a : as) ms.push_back(mass_of(shoot(eos, a)));
        const double slope = fit_log_slope(as, ms);
        bool no_bracket = false;
        try {
            find_a_for_mass(eos, 1.5 * ms[1], 0.5, 2.0);
        } catch (const Error& e) {
            no_bracket = e.code() == ErrorCode::NO_BRACKET;
        }
        return std::make_pair(std::abs(slope) <= 1e-3 && no_bracket,
                              "flat mass curve at the critical exponent: slope " + fmt(slope) +
                                  " (tol 1e-3), off-curve mass target " +
                                  std::string(no_bracket ? "raises NO_BRACKET" : "DID NOT raise"));
    });

    // C3: gamma = 6/5 closed-form profile u = a (1 + 4 pi k a^4 r^2 / 3)^{-1/2}
    criterion(3, [] {
        const EquationOfState eos = make_power_law(1.2, 1.0);
        const RadialSolution sol = shoot(eos, 1.0);
        const bool everywhere = sol.kind == RadialKind::positive_everywhere;
        const double k = std::pow(1.0 / 6.0, 5.0);  // h^{-1}(u) = k u^5
        double worst = 0.0;
        for (int i = 0; i <= 500; ++i) {
            const double r = 10.0 * i / 500.0;
            const double exact = 1.0 / std::sqrt(1.0 + 4.0 * M_PI * k / 3.0 * r * r);
            worst = std::max(worst, std::abs(sol.u_at(r) - exact) / exact);
        }
        return std::make_pair(everywhere && worst <= 1e-6,
                              "closed-form diffuse profile: max rel err " + fmt(worst) +
                                  " on r in [0,10] (tol 1e-6), classified " +
                                  std::string(everywhere ? "positive_everywhere" : "WRONG"));
    });

    // C4: uniform-sphere potential against the shell theorem
    criterion(4, [] {
        const auto t0 = std::chrono::steady_clock::now();
        const int nr = 128;
        const GridPtr g = make_grid(nr, 16, 2.0);
        const double R = 2.0 * 63.5 / (nr - 1);  // density jump on a cell midpoint
        AxisymmetricField rho(g);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < 16; ++j) rho.at(i, j) = g->r[i] < R ? 1.0 : 0.0;
        const AxisymmetricField u = potential(rho, 8);
        const double m_exact = 4.0 * M_PI / 3.0 * R * R * R;

        double worst = std::abs(u.at(0, 0) - 2.0 * M_PI * R * R) / (2.0 * M_PI * R * R);
        for (int i : {20, 32, 45}) {  // interior: u(0) - u(r) = 2 pi r^2 / 3
            const double r = g->r[i];
            const double expect = 2.0 * M_PI / 3.0 * r * r;
            worst = std::max(worst, std::abs(u.at(0, 0) - u.at(i, 5) - expect) / expect);
        }
        for (int i : {96, 110, nr - 1}) {  // exterior: M / r
            const double r = g->r[i];
            worst = std::max(worst, std::abs(u.at(i, 3) - m_exact / r) / (m_exact / r));
        }
        const double dt = seconds_since(t0);
        return std::make_pair(worst <= 1e-3 && dt < 1.0,
                              "shell-theorem potential: max rel err " + fmt(worst) +
                                  " (tol 1e-3) in " + fmt(dt) + " s (< 1 s)");
    });

    // C5: kappa = 0 equilibrium reproduces the shooting seed and alpha0 = -M/R
    criterion(5, [] {
        const EquationOfState eos = make_power_law(1.5, 1.0);
        const RadialSolution sol = shoot(eos, 1.0);
        const GridPtr grid = make_grid(128, 16, 2.0 * sol.support_radius);
        const SeedField seed = seed_density(sol, eos, grid);
        SolverContext ctx;
        ctx.grid = grid;
        ctx.eos = eos;
        ctx.rotation.mode = RotationMode::angular_velocity;
        ctx.rotation.omega = make_inverse_poly(1.0, 2.0);
        ctx.target_mass = sol.mass;
        const SolutionPoint p = solve_equilibrium(ctx, 0.0, seed.rho);

        double dev = 0.0;
        for (std::size_t i = 0; i < p.field.values.size(); ++i)
            dev = std::max(dev, std::abs(p.field.values[i] - seed.rho.values[i]));
        const double sup0 = seed.rho.max_value();
        const double alpha_exact = -sol.mass / sol.support_radius;
        const double alpha_err = std::abs(p.offset - alpha_exact) / std::abs(alpha_exact);
        return std::make_pair(dev <= 5e-3 * sup0 && alpha_err <= 1e-4,
                              "nonrotating consistency: |drho| " + fmt(dev) + " (tol " +
                                  fmt(5e-3 * sup0) + "), alpha rel err " + fmt(alpha_err) +
                                  " (tol 1e-4)");
    });

    // C6-C9 share the reference branch
    const GoldenBranch g = compute_golden();

    // C6: mass held constant along a full branch of >= 20 points
    criterion(6, [&g] {
        if (!g.ok) return std::make_pair(false, "branch failed: " + g.err);
        double worst = 0.0;
        for (const SolutionPoint& p : g.b.points) worst = std::max(worst, p.mass_error);
        const bool pass =
            g.b.points.size() >= 20 && worst <= 1e-8 * g.target && g.seconds <= 300.0;
        return std::make_pair(pass, "branch of " + std::to_string(g.b.points.size()) +
                                        " points (>= 20), max mass error " + fmt(worst) +
                                        " (tol " + fmt(1e-8 * g.target) + "), " +
                                        fmt(g.seconds) + " s (<= 300 s), ends " +
                                        std::string(to_string(g.b.termination.reason)));
    });

    // C7: velocity- and momentum-mode formulations agree point by point
    criterion(7, [&g] {
        if (!g.ok) return std::make_pair(false, "branch unavailable: " + g.err);
        double worst_rho = 0.0, worst_off = 0.0;
        int checked = 0;
        bool all = true;
        for (const std::size_t idx : {std::size_t{5}, std::size_t{10}, std::size_t{15}}) {
            if (idx >= g.b.points.size()) continue;
            const SolutionPoint& p = g.b.points[idx];
            if (!(p.kappa > 0.0)) continue;
            const ValidationReport rep = cross_formulation_check(g.ctx, p);
            all = all && rep.overall();
            ++checked;
            if (const Check* c = rep.find("density_agreement"))
                worst_rho = std::max(worst_rho, c->measured / c->threshold);
            if (const Check* c = rep.find("offset_identity"))
                worst_off = std::max(worst_off, c->measured / c->threshold);
        }
        return std::make_pair(all && checked >= 3,
                              "cross-formulation re-solve at " + std::to_string(checked) +
                                  " rotating points: worst density gap " + fmt(worst_rho) +
                                  "x tolerance, worst offset-identity gap " + fmt(worst_off) +
                                  "x tolerance");
    });

    // C8: compact-support bound and negative bracket outside the support
    criterion(8, [&g] {
        if (!g.ok) return std::make_pair(false, "branch unavailable: " + g.err);
        bool all_reports = true;
        double worst_bracket = -std::numeric_limits<double>::infinity();
        double worst_allow = 0.0;
        for (const SolutionPoint& p : g.b.points) {
            if (!support_bound_check(g.ctx, p).overall()) all_reports = false;

            // bracket sign outside the measured support, on the point's grid
            const SolverContext c = rotstar::detail::point_context(g.ctx, p);
            const AxisymmetricField cf =
                centrifugal_potential(c.grid, c.rotation, p.field, p.kappa);
            const double floor = c.opts.support_floor_frac * p.diag.sup_rho;
            const double allow = eval_enthalpy(c.eos, floor) + 10.0 * p.residual_inf;
            for (int i = 0; i < c.grid->nr; ++i)
                for (int j = 0; j < c.grid->nmu; ++j) {
                    if (p.field.at(i, j) > floor) continue;
                    const double w = p.potential.at(i, j) + cf.at(i, j) + p.offset;
                    if (w - allow > worst_bracket) {
                        worst_bracket = w - allow;
                        worst_allow = allow;
                    }
                }
        }
        const bool bracket_ok = worst_bracket <= 0.0;
        return std::make_pair(all_reports && bracket_ok,
                              "support bound on all " + std::to_string(g.b.points.size()) +
                                  " points: reports " + (all_reports ? "pass" : "FAIL") +
                                  ", off-support bracket max " + fmt(worst_bracket) +
                                  " below the h(floor) allowance " + fmt(worst_allow));
    });

    // C9: linearization remainder decays superlinearly (ratio >= 5 per decade)
    criterion(9, [&g] {
        if (!g.ok) return std::make_pair(false, "branch unavailable: " + g.err);
        auto probe = [&g](const SolutionPoint& p, double dkappa) {
            PerturbationDirection dir;
            dir.drho = make_gaussian_bump(p.field.grid, 0.5 * p.diag.r_eq, 0.3 * p.diag.r_pole,
                                          0.25 * p.diag.r_eq);
            dir.dkappa = dkappa;
            const ValidationReport rep = linearization_check(g.ctx, p, dir, {1e-3, 1e-4});
            double ratio = 0.0;
            for (const Check& c : rep.checks)
                if (c.name.rfind("remainder_ratio_", 0) == 0) ratio = c.measured;
            return std::make_pair(rep.overall(), ratio);
        };
        const auto [seed_ok, seed_ratio] = probe(g.b.points.front(), 0.0);
        const SolutionPoint& rot = g.b.points[g.b.points.size() / 2];
        const auto [rot_ok, rot_ratio] = probe(rot, 0.05);
        return std::make_pair(seed_ok && rot_ok && rot.kappa > 0.0,
                              "remainder contraction per eps decade: seed " + fmt(seed_ratio) +
                                  ", rotating (kappa=" + fmt(rot.kappa) + ") " + fmt(rot_ratio) +
                                  " (both >= 5)");
    });

    // C10: termination trichotomy tripwires, documented in summary.json
    criterion(10, [] {
        RunConfig base;
        base.seed_a = 1.0;  // 96 x 12 defaults match the reference resolution
        auto reason_of = [](RunConfig cfg, const std::string& dirname) {
            const auto dir = fresh_dir(dirname);
            cfg.output_dir = dir.string();
            std::ostringstream log;
            if (run(cfg, log) != 0) return std::string("run failed: ") + log.str();
            const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
            return j["termination_reason"].get<std::string>();
        };

        // density tripwire: bound just above the seed field's sup rho -- the
        // mass-exact discrete solve lands slightly above it
        RunConfig cd = base;
        {
            const Problem pr = build_problem(cd);
            cd.continuation_rho_max = (1.0 + 1e-6) * pr.seed.rho.max_value();
        }
        const std::string r1a = reason_of(cd, "c10_density_a");
        const std::string r1b = reason_of(cd, "c10_density_b");

        // support tripwire: demand the star fill at most 30% of the domain
        RunConfig cs = base;
        cs.continuation_support_frac = 0.3;
        const std::string r2a = reason_of(cs, "c10_support_a");
        const std::string r2b = reason_of(cs, "c10_support_b");

        const bool density_ok = r1a == "DENSITY_UNBOUNDED_SUSPECTED" && r1b == r1a;
        const bool support_ok = r2a == "SUPPORT_UNBOUNDED_SUSPECTED" && r2b == r2a;
        return std::make_pair(density_ok && support_ok,
                              "classified terminations: rho_max tripwire -> " + r1a +
                                  ", support tripwire -> " + r2a +
                                  " (each reproduced on rerun, recorded in summary.json)");
    });

    // C11: byte-identical branch.csv across reruns of one config
    criterion(11, [] {
        RunConfig cfg;
        cfg.seed_a = 1.0;
        cfg.grid_nr = 64;
        cfg.grid_nmu = 8;
        cfg.grid_lmax = 8;
        cfg.continuation_max_steps = 6;
        const auto d1 = fresh_dir("c11_a");
        const auto d2 = fresh_dir("c11_b");
        std::ostringstream log;
        cfg.output_dir = d1.string();
        const int rc1 = run(cfg, log);
        cfg.output_dir = d2.string();
        const int rc2 = run(cfg, log);
        if (rc1 != 0 || rc2 != 0) return std::make_pair(false, "runs failed: " + log.str());
        const std::string b1 = slurp(d1 / "branch.csv");
        const std::string b2 = slurp(d2 / "branch.csv");
        const bool same_csv = !b1.empty() && b1 == b2;
        const bool same_snap = slurp(d1 / "point_0003.csv") == slurp(d2 / "point_0003.csv");
        return std::make_pair(same_csv && same_snap,
                              std::string("rerun determinism: branch.csv ") +
                                  (same_csv ? "byte-identical" : "DIFFERS") + " (" +
                                  std::to_string(b1.size()) + " bytes), snapshots " +
                                  (same_snap ? "byte-identical" : "DIFFER"));
    });

    std::printf("acceptance: %d/11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
