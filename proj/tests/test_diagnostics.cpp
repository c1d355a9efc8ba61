#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rotstar/diagnostics.hpp"
#include "rotstar/eos.hpp"
#include "rotstar/field.hpp"
#include "rotstar/gravity.hpp"
#include "rotstar/radial.hpp"
#include "rotstar/rotation.hpp"
#include "rotstar/scf.hpp"
#include "rotstar/seed.hpp"

using namespace rotstar;
using Catch::Approx;

namespace {

struct DiagSetup {
    EquationOfState eos;
    RadialSolution sol;
    GridPtr grid;
    SeedField seed;
    SolverContext ctx;
};

DiagSetup make_setup(int nr = 96, int nmu = 12)
{
    DiagSetup s{make_power_law(1.5), {}, {}, {}, {}};
    s.sol = shoot(s.eos, 1.0);
    s.grid = make_grid(nr, nmu, 2.0 * s.sol.support_radius);
    s.seed = seed_density(s.sol, s.eos, s.grid);
    s.ctx.grid = s.grid;
    s.ctx.eos = s.eos;
    s.ctx.rotation.mode = RotationMode::angular_velocity;
    s.ctx.rotation.omega = make_inverse_poly(1.0, 2.0);
    s.ctx.target_mass = s.sol.mass;
    return s;
}

}  // namespace

TEST_CASE("weighted norm: zero field, homogeneity, profile oracle, exponent gate")
{
    auto s = make_setup();

    AxisymmetricField zero(s.grid);
    CHECK(weighted_norm(zero, 4.0) == 0.0);

    // independent oracle: dense scan of the radial profile the seed samples
    double oracle = 0.0;
    for (int k = 0; k <= 200000; ++k) {
        const double r = s.sol.support_radius * k / 200000.0;
        const double w = 1.0 + r * r;
        oracle = std::max(oracle, w * w * eval_h_inverse(s.eos, s.sol.u_at(r)));
    }
    const double norm4 = weighted_norm(s.seed.rho, 4.0);
    CHECK(std::isfinite(norm4));
    CHECK(norm4 <= oracle * (1.0 + 1e-12));  // grid nodes subsample the profile
    CHECK(norm4 >= 0.99 * oracle);

    AxisymmetricField twice = s.seed.rho;
    for (double& v : twice.values) v *= 2.0;
    CHECK(weighted_norm(twice, 4.0) == 2.0 * norm4);

    CHECK_THROWS_AS(weighted_norm(s.seed.rho, 3.0), Error);
    try {
        weighted_norm(s.seed.rho, 2.5);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::S_TOO_SMALL);
    }
    CHECK_NOTHROW(weighted_norm(s.seed.rho, 3.0 + 1e-9));
}

TEST_CASE("support bound holds at the converged seed")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);

    const ValidationReport rep = support_bound_check(s.ctx, p0);
    CHECK(rep.overall());

    const Check* c0 = rep.find("c0_measured");
    REQUIRE(c0 != nullptr);
    CHECK(c0->measured > 0.0);
    CHECK(std::isfinite(c0->measured));

    const Check* ball = rep.find("support_in_ball");
    REQUIRE(ball != nullptr);
    CHECK(ball->pass);
    CHECK(ball->measured <= ball->threshold);

    const Check* br = rep.find("bracket_negative_outside_ball");
    REQUIRE(br != nullptr);
    CHECK(br->pass);
    CHECK(br->measured < 0.0);

    // the non-rotating bracket U + offset is negative strictly outside the star
    const AxisymmetricField U = potential(p0.field, s.ctx.opts.lmax);
    const AxisGrid& g = *s.grid;
    for (int i = 0; i < g.nr; ++i) {
        if (g.r[i] <= 1.02 * s.sol.support_radius) continue;
        for (int j = 0; j < g.nmu; ++j) CHECK(U.at(i, j) + p0.offset < 0.0);
    }
}

TEST_CASE("support bound skips points outside the admissible offset set")
{
    auto s = make_setup();
    SolutionPoint p = solve_equilibrium(s.ctx, 0.0, s.seed.rho);
    p.offset = 0.1;

    const ValidationReport rep = support_bound_check(s.ctx, p);
    CHECK_FALSE(rep.overall());
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0].name == "o_n_membership");
    CHECK_FALSE(rep.checks[0].pass);
    REQUIRE_FALSE(rep.warnings.empty());
    CHECK(rep.warnings[0].find("O_N_VIOLATION") != std::string::npos);
}

TEST_CASE("formulation residual: tight at the seed, jumps for a doubled field")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);
    const double floor = 1e-10 * p0.diag.sup_rho;

    const double fr = formulation_residual(s.ctx, p0, floor);
    CHECK(fr <= 1e-6 * std::abs(p0.offset));

    SolutionPoint doubled = p0;
    for (double& v : doubled.field.values) v *= 2.0;
    const double fr2 = formulation_residual(s.ctx, doubled, floor);
    const double gap = eval_enthalpy(s.eos, 2.0 * p0.diag.sup_rho)
                     - eval_enthalpy(s.eos, p0.diag.sup_rho);
    CHECK(fr2 >= 0.25 * gap);
    CHECK(fr2 <= 10.0 * gap);

    bool threw = false;
    try {
        formulation_residual(s.ctx, p0, 2.0 * p0.diag.sup_rho);
    } catch (const Error& e) {
        threw = true;
        CHECK(e.code() == ErrorCode::EMPTY_SUPPORT);
    }
    CHECK(threw);
}

TEST_CASE("cross formulation at kappa = 0 degenerates to the same problem")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);

    const ValidationReport rep = cross_formulation_check(s.ctx, p0);
    CHECK(rep.overall());
    REQUIRE(rep.find("density_agreement") != nullptr);
    CHECK(rep.find("density_agreement")->measured <= 1e-12);
    REQUIRE(rep.find("offset_identity") != nullptr);
    CHECK(rep.find("offset_identity")->measured <= 1e-10);
}

TEST_CASE("cross formulation validates a rotating point")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);
    const SolutionPoint p1 = solve_equilibrium(s.ctx, 0.3, p0);
    REQUIRE(p1.kappa == 0.3);

    const ValidationReport rep = cross_formulation_check(s.ctx, p1);
    CHECK(rep.overall());

    const Check* dist = rep.find("density_agreement");
    REQUIRE(dist != nullptr);
    CHECK(dist->threshold == Approx(10.0 * s.ctx.opts.tol * p1.diag.sup_rho));
    CHECK(dist->measured <= dist->threshold);

    const Check* id = rep.find("offset_identity");
    REQUIRE(id != nullptr);
    CHECK(id->threshold == Approx(1e-6 * std::abs(p1.offset)));
    CHECK(id->measured <= id->threshold);
}

TEST_CASE("cross formulation rejects a momentum law that misses L(0) = 0")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);

    MomentumLaw bad;
    bad.profile = MomentumProfile::table;
    bad.Lm = math::Pchip({0.0, 0.5, 1.0, 2.0}, {0.1, 0.2, 0.3, 0.4});
    bad.m_table_max = 2.0;

    const ValidationReport rep = cross_formulation_check(s.ctx, p0, bad);
    CHECK_FALSE(rep.overall());
    REQUIRE(rep.checks.size() == 1);  // re-solve skipped
    CHECK(rep.checks[0].name == "induced_L_vanishes_at_origin");
    CHECK_FALSE(rep.checks[0].pass);
    CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("linearization remainder decays superlinearly")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);
    const PerturbationDirection bump{make_gaussian_bump(s.grid, 1.0, 0.5, 0.6, 0.01), 0.0, 0.0};

    SECTION("density bump at the seed, with exact zero at eps = 0")
    {
        const ValidationReport rep =
            linearization_check(s.ctx, p0, bump, {1e-3, 1e-4, 0.0});
        CHECK(rep.overall());
        const Check* ratio = rep.find("remainder_ratio_0.001_to_0.0001");
        REQUIRE(ratio != nullptr);
        CHECK(ratio->measured >= 5.0);
        const Check* zero = rep.find("remainder_at_zero_eps");
        REQUIRE(zero != nullptr);
        CHECK(zero->measured == 0.0);
    }

    SECTION("density bump and kappa direction at a rotating point")
    {
        const SolutionPoint p1 = solve_equilibrium(s.ctx, 0.3, p0);
        CHECK(linearization_check(s.ctx, p1, bump, {1e-3, 1e-4}).overall());

        const PerturbationDirection dk{AxisymmetricField(s.grid), 1.0, 0.0};
        const ValidationReport rep = linearization_check(s.ctx, p1, dk, {1e-3, 1e-4});
        CHECK(rep.overall());
        CHECK(rep.find("remainder_ratio_0.001_to_0.0001")->measured >= 5.0);
    }

    SECTION("pure offset direction reduces to the 1-D derivative of h^{-1}")
    {
        const PerturbationDirection doff{AxisymmetricField(s.grid), 0.0, 1.0};
        const ValidationReport rep = linearization_check(s.ctx, p0, doff, {1e-3, 1e-4});
        CHECK(rep.overall());
        // second-order remainder: a 10x smaller eps shrinks it ~100x
        CHECK(rep.find("remainder_ratio_0.001_to_0.0001")->measured >= 20.0);
    }
}

TEST_CASE("linearization guards its hypotheses")
{
    auto s = make_setup();
    const SolutionPoint p0 = solve_equilibrium(s.ctx, 0.0, s.seed.rho);
    const PerturbationDirection bump{make_gaussian_bump(s.grid, 1.0, 0.5, 0.6, 0.01), 0.0, 0.0};

    CHECK_THROWS_AS(linearization_check(s.ctx, p0, bump, {1e-3, -1e-4}),
                    std::invalid_argument);

    const GridPtr other = make_grid(64, 12, s.grid->r_max);
    const PerturbationDirection off_grid{make_gaussian_bump(other, 1.0, 0.5, 0.6, 0.01), 0.0,
                                         0.0};
    CHECK_THROWS_AS(linearization_check(s.ctx, p0, off_grid, {1e-3}), std::invalid_argument);

    SolutionPoint pm = p0;
    pm.mode = RotationMode::angular_momentum;
    pm.kappa = 0.7;
    CHECK_THROWS_AS(linearization_check(s.ctx, pm, bump, {1e-3}), std::invalid_argument);

    CHECK_THROWS_AS(make_gaussian_bump(s.grid, 1.0, 0.5, 0.0), std::invalid_argument);
}
