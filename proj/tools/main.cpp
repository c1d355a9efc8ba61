/** rotstar: mass-constrained equilibria of rapidly rotating stars.

    Subcommands:
      radial    sweep the nonrotating mass curve M(a) (CSV on stdout)
      solve     one fixed-kappa equilibrium; writes a point snapshot
      branch    full kappa-squared continuation with artifacts
      diagnose  re-verify a stored snapshot (JSON report on stdout)

    All subcommands accept --config PATH (flat key=value text) and repeated
    --set key=value overrides; the ROTSTAR_OUT environment variable overrides
    output.dir. Exit codes: 0 success / clean termination, 1 configuration
    error, 2 seed failure, 3 numerical or I/O failure.
*/

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rotstar/config.hpp"
#include "rotstar/diagnostics.hpp"
#include "rotstar/io.hpp"
#include "rotstar/run.hpp"

namespace {

using namespace rotstar;

int cmd_radial(const RunConfig& cfg, double a_min, double a_max, int n)
{
    if (!(a_min > 0.0 && a_max >= a_min) || n < 1) {
        std::cerr << "config error: radial sweep needs 0 < a-min <= a-max and n >= 1\n";
        return 1;
    }
    const EquationOfState eos = make_power_law(cfg.eos_gamma, cfg.eos_coeff);
    std::cout << "a,mass,support_radius,alpha0,kind\n";
    for (int k = 0; k < n; ++k) {
        // log-spaced central values: the mass curve is a power law in a
        const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        const double a = a_min * std::pow(a_max / a_min, t);
        const RadialSolution sol = shoot(eos, a);
        const bool compact = sol.kind == RadialKind::compact;
        std::cout << detail::fmt17(a) << ',' << detail::fmt17(sol.mass) << ','
                  << (compact ? detail::fmt17(sol.support_radius) : "inf") << ','
                  << detail::fmt17(sol.alpha0) << ','
                  << (compact ? "compact" : "positive_everywhere") << '\n';
    }
    return 0;
}

int cmd_solve(const RunConfig& cfg, double kappa)
{
    Problem pr;
    try {
        pr = build_problem(cfg);
    } catch (const Error& e) {
        std::cerr << "seed stage failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e) == 1 ? 1 : 2;
    }
    const SolutionPoint p = solve_equilibrium(pr.ctx, kappa, pr.seed.rho);

    const std::string dir = resolve_output_dir(cfg);
    if (!dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IO_ERROR, "cannot create '" + dir + "': " + ec.message());
        const std::filesystem::path path = std::filesystem::path(dir) / snapshot_filename(0);
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error(ErrorCode::IO_ERROR, "cannot open '" + path.string() + "'");
        write_snapshot(p, 0, os);
        std::cout << "wrote " << path.string() << '\n';
    }
    std::cout << "kappa = " << p.kappa << "\noffset = " << p.offset << " ("
              << (p.mode == RotationMode::angular_velocity ? "alpha" : "lambda")
              << ")\nmass = " << p.mass << " (error " << p.mass_error
              << ")\nsup rho = " << p.diag.sup_rho << "\nr_eq = " << p.diag.r_eq
              << ", r_pole = " << p.diag.r_pole << "\nmargin = " << p.diag.o_n_margin
              << "\niterations = " << p.scf_iters << '\n';
    return 0;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& snap_path, bool do_cross, bool do_lin)
{
    const Snapshot snap = read_snapshot(snap_path);
    Problem pr;
    try {
        pr = build_problem(cfg);
    } catch (const Error& e) {
        std::cerr << "seed stage failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e) == 1 ? 1 : 2;
    }
    const SolutionPoint p = rehydrate_point(pr.ctx, snap);

    nlohmann::ordered_json out;
    out["snapshot"] = snap_path;
    out["idx"] = snap.idx;
    out["mode"] = to_string(p.mode);
    out["kappa"] = p.kappa;
    out["offset"] = p.offset;
    out["mass"] = p.mass;
    out["residual_inf"] = p.residual_inf;

    bool overall = true;
    const ValidationReport sup = support_bound_check(pr.ctx, p, cfg.diagnostics_s_exponent);
    out["support_bound"] = report_to_json(sup);
    overall = overall && sup.overall();

    const double fr =
        formulation_residual(pr.ctx, p, cfg.diagnostics_floor * std::max(p.diag.sup_rho, 1e-300));
    out["formulation_residual"] = fr;

    if (do_cross) {
        const ValidationReport xf = cross_formulation_check(pr.ctx, p);
        out["cross_formulation"] = report_to_json(xf);
        overall = overall && xf.overall();
    }
    if (do_lin) {
        std::mt19937_64 rng(cfg.rng_seed);
        PerturbationDirection dir;
        const double s0 = 0.6 * p.diag.r_eq * rotstar::detail::unit_draw(rng());
        const double z0 = 0.6 * p.diag.r_pole * rotstar::detail::unit_draw(rng());
        dir.drho = make_gaussian_bump(p.field.grid, s0, z0, 0.25 * p.diag.r_eq);
        const ValidationReport lin = linearization_check(pr.ctx, p, dir, {1e-3, 1e-4});
        out["linearization"] = report_to_json(lin);
        overall = overall && lin.overall();
    }
    out["overall"] = overall;
    std::cout << out.dump(2) << '\n';
    return overall ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rotstar: mass-constrained rotating-star equilibrium branches"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--set", sets, "override, e.g. --set eos.gamma=1.5")->type_size(1);

    auto* sc_radial = app.add_subcommand("radial", "sweep the nonrotating mass curve M(a)");
    double a_min = 0.25, a_max = 4.0;
    int n_sweep = 9;
    sc_radial->add_option("--a-min", a_min, "smallest central value");
    sc_radial->add_option("--a-max", a_max, "largest central value");
    sc_radial->add_option("--n", n_sweep, "number of log-spaced samples");

    auto* sc_solve = app.add_subcommand("solve", "single equilibrium at fixed kappa");
    double kappa = 0.0;
    sc_solve->add_option("--kappa", kappa, "rotation strength")->required()->check(CLI::NonNegativeNumber);

    auto* sc_branch = app.add_subcommand("branch", "full continuation in kappa^2");

    auto* sc_diag = app.add_subcommand("diagnose", "re-verify a stored point snapshot");
    std::string snap_path;
    bool do_cross = false, do_lin = false;
    sc_diag->add_option("--snapshot", snap_path, "point_NNNN.csv to verify")->required();
    sc_diag->add_flag("--cross", do_cross, "also run the cross-formulation solve");
    sc_diag->add_flag("--linearize", do_lin, "also run the linearization probe");

    // lets --config / --set appear after the subcommand name
    for (CLI::App* sc : {sc_radial, sc_solve, sc_branch, sc_diag}) sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        const rotstar::RunConfig cfg = rotstar::parse_config(config_path, sets);
        if (sc_radial->parsed()) return cmd_radial(cfg, a_min, a_max, n_sweep);
        if (sc_solve->parsed()) return cmd_solve(cfg, kappa);
        if (sc_branch->parsed()) return rotstar::run(cfg, std::cout);
        if (sc_diag->parsed()) return cmd_diagnose(cfg, snap_path, do_cross, do_lin);
    } catch (const rotstar::Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return rotstar::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
