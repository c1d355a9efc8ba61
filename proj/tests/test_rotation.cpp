#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rotstar/field.hpp"
#include "rotstar/gravity.hpp"
#include "rotstar/math/quadrature.hpp"
#include "rotstar/rotation.hpp"

using namespace rotstar;
using Catch::Approx;

namespace {

// density 1 inside the sphere of radius R, 0 outside
AxisymmetricField sphere_field(const GridPtr& grid, double R, double rho0)
{
    AxisymmetricField f(grid);
    for (int i = 0; i < grid->nr; ++i)
        for (int j = 0; j < grid->nmu; ++j) f.at(i, j) = grid->r[i] <= R ? rho0 : 0.0;
    return f;
}

}  // namespace

TEST_CASE("inverse_poly centrifugal antiderivative matches closed form and quadrature")
{
    const OmegaLaw law = make_inverse_poly(1.0, 2.0);
    CHECK(law.j(0.0) == 0.0);
    CHECK(j_eval(law, 1.0) == Approx(0.25).epsilon(1e-14));
    CHECK(law.j_sup == Approx(0.5).epsilon(1e-14));

    // cross-check against adaptive quadrature of s omega^2(s)
    for (double r : {0.4, 1.0, 3.0, 12.0}) {
        const double q = math::adaptive_simpson(
            [&](double s) { return s * law.omega_sq(s); }, 0.0, r, 1e-13);
        CHECK(law.j(r) == Approx(q).epsilon(1e-10));
    }

    // monotone, bounded by j_sup
    double prev = 0.0;
    for (int k = 1; k <= 60; ++k) {
        const double v = law.j(0.5 * k);
        CHECK(v >= prev);
        CHECK(v <= law.j_sup + 1e-15);
        prev = v;
    }
}

TEST_CASE("exponential law closed form")
{
    const double w0 = 1.3, s0 = 0.7;
    const OmegaLaw law = make_exponential(w0, s0);
    CHECK(law.j_sup == Approx(0.25 * w0 * w0 * s0 * s0).epsilon(1e-14));
    for (double r : {0.2, 1.0, 5.0}) {
        const double q = math::adaptive_simpson(
            [&](double s) { return s * law.omega_sq(s); }, 0.0, r, 1e-13);
        CHECK(law.j(r) == Approx(q).epsilon(1e-10));
    }
    CHECK(validate_omega(law).overall());
}

TEST_CASE("zero rotation gives zero potential")
{
    const OmegaLaw law = make_inverse_poly(0.0, 2.0);
    CHECK(law.j(0.7) == 0.0);
    CHECK(law.j_sup == 0.0);
    CHECK_FALSE(validate_omega(law).overall());  // identically zero is compactly supported
}

TEST_CASE("omega admissibility validation")
{
    SECTION("inverse_poly q=2 passes")
    {
        const auto rep = validate_omega(make_inverse_poly(1.0, 2.0));
        CHECK(rep.overall());
        CHECK(rep.find("omega2_decay")->measured == Approx(0.5).margin(1e-6));
    }
    SECTION("rigid rotation fails integrability")
    {
        const auto rep = validate_omega(make_inverse_poly(1.0, 0.0));
        CHECK_FALSE(rep.overall());
        CHECK_FALSE(rep.find("omega1_integrable")->pass);
        CHECK(rep.find("omega1_support")->pass);
        CHECK_THROWS_AS(require_admissible(make_inverse_poly(1.0, 0.0)), Error);
        try {
            require_admissible(make_inverse_poly(1.0, 0.0));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::INADMISSIBLE_OMEGA);
        }
    }
    SECTION("slow tail q=1.25 fails the decay condition")
    {
        const auto rep = validate_omega(make_inverse_poly(1.0, 1.25));
        CHECK_FALSE(rep.overall());
        CHECK(rep.find("omega1_integrable")->pass);  // j_sup = 2 finite
        CHECK_FALSE(rep.find("omega2_decay")->pass);
        CHECK(rep.find("omega2_decay")->measured > 1.0);
    }
    SECTION("compactly supported omega fails the support condition")
    {
        std::vector<double> r, w;
        for (int i = 0; i <= 50; ++i) {
            const double s = 0.1 * i;
            r.push_back(s);
            w.push_back(s < 1.0 ? 1.0 - s : 0.0);
        }
        const auto rep = validate_omega(make_omega_table(r, w));
        CHECK_FALSE(rep.overall());
        CHECK(rep.find("omega1_integrable")->pass);
        CHECK_FALSE(rep.find("omega1_support")->pass);
    }
}

TEST_CASE("tabulated omega law reproduces the sampled closed form")
{
    // omega(s) = (1 + s^2)^{-1}, i.e. the inverse_poly law with q = 2
    std::vector<double> r, w;
    for (int i = 0; i <= 600; ++i) {
        const double s = 30.0 * i / 600.0;
        r.push_back(s);
        w.push_back(1.0 / (1.0 + s * s));
    }
    const OmegaLaw tab = make_omega_table(r, w);
    const OmegaLaw ref = make_inverse_poly(1.0, 2.0);

    // the interpolated profile limits accuracy against the closed form ...
    CHECK(tab.j(1.0) == Approx(ref.j(1.0)).epsilon(1e-4));
    CHECK(tab.j(7.3) == Approx(ref.j(7.3)).epsilon(1e-4));
    CHECK(tab.j_sup == Approx(ref.j_sup).epsilon(1e-4));
    CHECK(tab.j(80.0) == Approx(ref.j(80.0)).epsilon(1e-4));  // fitted tail region
    // ... but the cache must integrate the law's own omega^2 profile
    for (double rr : {0.7, 1.0, 4.3, 22.0}) {
        const double q = math::adaptive_simpson(
            [&](double s) { return s * tab.omega_sq(s); }, 0.0, rr, 1e-13);
        CHECK(tab.j(rr) == Approx(q).epsilon(1e-7));
    }
    CHECK(validate_omega(tab).overall());

    // malformed tables are rejected
    CHECK_THROWS_AS(make_omega_table({0.0, 1.0, 0.5, 2.0}, {1.0, 1.0, 1.0, 1.0}), Error);
    CHECK_THROWS_AS(make_omega_table({0.0, 1.0, 2.0, 3.0}, {1.0, -0.5, 0.2, 0.1}), Error);
    CHECK_THROWS_AS(make_omega_table({0.0, 1.0}, {1.0, 0.5}), Error);
}

TEST_CASE("cylinder mass of a uniform sphere")
{
    const int nr = 256, nmu = 32;
    const double r_max = 2.0;
    const auto grid = make_grid(nr, nmu, r_max);
    const double R = (101.5) * grid->dr;  // boundary midway between nodes
    const double rho0 = 2.0;
    const auto f = sphere_field(grid, R, rho0);
    const CylinderMassProfile prof(f);
    const double M_grid = total_mass(f);
    CHECK(prof.total() == Approx(M_grid).epsilon(1e-14));

    // closed-form cylinder-sphere intersection
    const double M_exact = 4.0 * M_PI / 3.0 * rho0 * R * R * R;
    for (double frac : {0.3, 0.6, 0.9}) {
        const double s = frac * R;
        const double m_exact =
            4.0 * M_PI / 3.0 * rho0 * (R * R * R - std::pow(R * R - s * s, 1.5));
        CHECK(prof(s) == Approx(m_exact).epsilon(1e-3));
        CHECK(std::abs(prof(s) - m_exact) <= 1e-3 * M_exact);
    }

    CHECK(cylinder_mass(f, 0.0) == 0.0);
    CHECK(prof(R + grid->dr) == Approx(M_grid).epsilon(1e-12));  // exhaustion
    CHECK(prof(r_max) == Approx(M_grid).epsilon(1e-12));

    // nondecreasing in sigma
    double prev = 0.0;
    for (int k = 1; k <= 80; ++k) {
        const double m = prof(r_max * k / 80.0);
        CHECK(m >= prev - 1e-10 * M_grid);
        prev = m;
    }
}

TEST_CASE("centrifugal potential, angular-velocity mode")
{
    const auto grid = make_grid(64, 8, 2.0);
    const auto f = sphere_field(grid, 1.0, 1.0);
    RotationSpec spec;
    spec.mode = RotationMode::angular_velocity;
    spec.omega = make_inverse_poly(1.0, 2.0);

    const double kappa = 2.0;
    CHECK(kappa * kappa * j_eval(*spec.omega, 1.0) == Approx(1.0).epsilon(1e-14));

    const auto cf = centrifugal_potential(grid, spec, f, kappa);
    for (int i : {0, 13, 40, 63})
        for (int j : {0, 4, 7}) {
            const double s =
                grid->r[i] * std::sqrt(std::max(0.0, 1.0 - grid->mu[j] * grid->mu[j]));
            CHECK(cf.at(i, j) == Approx(kappa * kappa * spec.omega->j(s)).margin(1e-15));
        }

    const auto zero = centrifugal_potential(grid, spec, f, 0.0);
    CHECK(zero.sup() == 0.0);
}

TEST_CASE("centrifugal potential, angular-momentum mode")
{
    const int nr = 256, nmu = 32;
    const auto grid = make_grid(nr, nmu, 2.0);
    const double R = (101.5) * grid->dr;
    const auto f = sphere_field(grid, R, 1.0);
    const double M = total_mass(f);

    RotationSpec spec;
    spec.mode = RotationMode::angular_momentum;
    spec.momentum = make_power_momentum(1.0, 2.0);

    const double kappa = 0.8, k2 = kappa * kappa;
    const auto cf = centrifugal_potential(grid, spec, f, kappa);

    // outside the sphere m_rho = M so the integral is M^2/(2 s^2)
    int checked = 0;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nmu; ++j) {
            const double s =
                grid->r[i] * std::sqrt(std::max(0.0, 1.0 - grid->mu[j] * grid->mu[j]));
            if (s < 1.3 * R || s > 1.9) continue;
            const double expected = -k2 * M * M / (2.0 * s * s);
            CHECK(cf.at(i, j) == Approx(expected).epsilon(1e-6));
            ++checked;
        }
    CHECK(checked > 20);

    const auto zero = centrifugal_potential(grid, spec, f, 0.0);
    CHECK(zero.sup() == 0.0);
}

TEST_CASE("momentum law basics")
{
    const MomentumLaw p = make_power_momentum(0.5, 2.0);
    CHECK(p.eval(2.0) == Approx(2.0).epsilon(1e-15));
    CHECK(p.eval(0.0) == 0.0);
    CHECK(p.eval_at(3.0, 2.0) == p.eval(2.0));  // s is ignored off the induced branch
    CHECK(p.tail_integral(2.0, 3.0) == Approx(0.5 * 9.0 / 8.0).epsilon(1e-15));
    CHECK_THROWS_AS(make_power_momentum(1.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(make_power_momentum(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_power_momentum(1.0, 2.0, 1.5), std::invalid_argument);

    const MomentumLaw t = make_momentum_table({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 4.0, 9.0});
    CHECK(t.eval(2.0) == Approx(4.0).epsilon(1e-12));
    CHECK(t.eval(5.0) == Approx(9.0).epsilon(1e-12));  // clamped past the table
    CHECK_THROWS_AS(make_momentum_table({0.0, 2.0, 1.0, 3.0}, {0.0, 1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(make_momentum_table({0.1, 1.0, 2.0, 3.0}, {0.0, 1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(make_momentum_table({0.0, 1.0, 2.0, 3.0}, {0.0, -1.0, 2.0, 3.0}), Error);
}

TEST_CASE("induced momentum law satisfies the velocity-momentum identity")
{
    const int nr = 256, nmu = 32;
    const auto grid = make_grid(nr, nmu, 2.0);
    const double R = (101.5) * grid->dr;
    const auto f = sphere_field(grid, R, 1.0);
    const OmegaLaw omega = make_inverse_poly(1.0, 2.0);
    const MomentumLaw ind = make_induced_momentum(omega, f);
    const CylinderMassProfile prof(f);

    // in the saturated region the geometric form is exact
    CHECK(ind.eval_at(1.7, prof.total()) ==
          Approx(std::pow(1.7, 4) * omega.omega_sq(1.7)).epsilon(1e-14));

    // -int_r^inf L(m_rho(s)) s^{-3} ds = j(r) - j_sup
    const double m_tot = prof.total();
    for (double r : {0.3, 0.9, 1.4}) {
        double integral = math::adaptive_simpson(
            [&](double s) { return ind.eval_at(s, prof(s)) / (s * s * s); }, r,
            grid->r_max, 1e-12);
        integral += ind.tail_integral(grid->r_max, m_tot);
        const double lhs = -integral;
        const double rhs = omega.j(r) - omega.j_sup;
        CHECK(lhs == Approx(rhs).margin(1e-8));
    }
}
