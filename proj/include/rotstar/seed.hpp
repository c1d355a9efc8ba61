/** \file seed.hpp
    \brief Interpolation of the radial seed onto an axisymmetric grid.
*/
#pragma once

#include "rotstar/field.hpp"
#include "rotstar/radial.hpp"

namespace rotstar {

struct SeedField {
    AxisymmetricField rho;
    double alpha0 = 0.0;
};

/** Place the compact radial solution on the grid (constant in mu).

    The density is reconstructed as h^{-1}(u(r)) from the Hermite-interpolated
    enthalpy profile rather than by interpolating rho itself, so the support
    edge (where rho vanishes with a power-law contact) is represented exactly
    and the grid mass matches the shooting mass at quadrature order.
*/
inline SeedField seed_density(const RadialSolution& sol, const EquationOfState& eos,
                              const GridPtr& grid)
{
    if (sol.kind != RadialKind::compact)
        throw Error(ErrorCode::NOT_COMPACT, "seed_density: seed must be compact");
    if (!(grid->r_max > sol.support_radius))
        throw Error(ErrorCode::GRID_TOO_SMALL, "seed_density: grid.r_max <= R(a)");

    SeedField out;
    out.rho = AxisymmetricField(grid);
    out.alpha0 = sol.alpha0;
    for (int i = 0; i < grid->nr; ++i) {
        const double rho_r = eval_h_inverse(eos, sol.u_at(grid->r[i]));
        for (int j = 0; j < grid->nmu; ++j) out.rho.at(i, j) = rho_r;
    }
    return out;
}

} // namespace rotstar
