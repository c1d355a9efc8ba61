/** \file gravity.hpp
    \brief Newtonian potential 1/|x| * rho for axisymmetric, even-in-x3
    densities via an even-l Legendre multipole expansion.

    For each harmonic the interior and exterior moments are accumulated by
    one-pass recurrences in which every factor is a ratio of radii <= 1,

        S_l(r_{i+1}) = (r_i/r_{i+1})^{l+1} S_l(r_i) + bounded cell term,
        T_l(r_i)     = (r_i/r_{i+1})^l     T_l(r_{i+1}) + bounded cell term,

    so no power of a radius ever overflows or amplifies noise, even at high l.
    Cell terms are 4-point Gauss--Legendre applied to the local cubic
    interpolant of the harmonic amplitude (fourth order overall).
*/
#pragma once

#include <array>
#include <cmath>

#include "rotstar/common.hpp"
#include "rotstar/field.hpp"

namespace rotstar {

namespace detail {

inline double ipow(double x, int n)
{
    double acc = 1.0, base = x;
    for (; n > 0; n >>= 1) {
        if (n & 1) acc *= base;
        base *= base;
    }
    return acc;
}

/// Lagrange weights of the 4 stencil samples at cell fraction g in [0,1];
/// kind: 0 = stencil {i-1..i+2}, 1 = left edge {i..i+3}, 2 = right edge {i-2..i+1}.
inline std::array<double, 4> stencil_weights(double g, int kind)
{
    if (kind == 1) {
        return {-(g - 1) * (g - 2) * (g - 3) / 6.0, g * (g - 2) * (g - 3) / 2.0,
                -g * (g - 1) * (g - 3) / 2.0, g * (g - 1) * (g - 2) / 6.0};
    }
    if (kind == 2) {
        const double s = g + 2.0;  // position in units of dr from the leftmost sample
        return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
                -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
    }
    const double s = g + 1.0;
    return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
            -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
}

} // namespace detail

/// Total mass 4 pi int rho r^2 dr dmu with Gauss--Legendre in mu and the
/// composite cubic rule in r; fixed summation order for reproducibility.
inline double total_mass(const AxisymmetricField& rho)
{
    const AxisGrid& g = *rho.grid;
    double sum = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.nmu; ++j) row += g.wmu[j] * rho.at(i, j);
        sum += g.wr[i] * g.r[i] * g.r[i] * row;
    }
    return 4.0 * M_PI * sum;
}

/** Multipole potential of a density field; lmax must be even and >= 0.

    U(r,mu) = sum_{l even} P_l(mu) (4 pi/(2l+1)) [ r^{-(l+1)} int_0^r s^{l+2} rho_l ds
              + r^l int_r^{r_max} s^{1-l} rho_l ds ],
    rho_l(s) = (2l+1) sum_j w_j rho(s, mu_j) P_l(mu_j).
*/
inline AxisymmetricField potential(const AxisymmetricField& rho, int lmax)
{
    if (lmax < 0 || lmax % 2 != 0)
        throw Error(ErrorCode::ODD_LMAX, "potential: lmax must be even and nonnegative");
    const AxisGrid& g = *rho.grid;
    for (double v : rho.values)
        if (v < 0.0)
            throw Error(ErrorCode::NEGATIVE_DENSITY, "potential: density field has negative values");

    const int nl = lmax / 2 + 1;
    const int nr = g.nr, nmu = g.nmu;

    // Legendre table P_l(mu_j) for even l
    std::vector<double> pl(static_cast<std::size_t>(nl) * nmu);
    for (int il = 0; il < nl; ++il)
        for (int j = 0; j < nmu; ++j)
            pl[static_cast<std::size_t>(il) * nmu + j] = math::legendre_p(2 * il, g.mu[j]);

    // 4-point Gauss--Legendre samples per cell, with cubic stencil weights
    static const math::GaussRule cell_rule = math::gauss_legendre_01(4);

    std::vector<double> rho_l(nr), s_mom(nr), t_mom(nr);
    AxisymmetricField u(rho.grid);

    for (int il = 0; il < nl; ++il) {
        const int l = 2 * il;
        for (int i = 0; i < nr; ++i) {
            double acc = 0.0;
            for (int j = 0; j < nmu; ++j)
                acc += g.wmu[j] * rho.at(i, j) * pl[static_cast<std::size_t>(il) * nmu + j];
            rho_l[i] = (2 * l + 1) * acc;
        }

        // interior moment: S_l(r) = r^{-(l+1)} int_0^r s^{l+2} rho_l ds
        s_mom[0] = 0.0;
        for (int i = 0; i + 1 < nr; ++i) {
            const int kind = (i == 0) ? 1 : (i + 2 >= nr ? 2 : 0);
            const int base = (kind == 1) ? 0 : (kind == 2 ? nr - 4 : i - 1);
            const double r_hi = g.r[i + 1];
            double cell = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double gq = cell_rule.nodes[q];
                const double s = g.r[i] + g.dr * gq;
                const auto w = detail::stencil_weights(gq, kind);
                const double val = w[0] * rho_l[base] + w[1] * rho_l[base + 1]
                                 + w[2] * rho_l[base + 2] + w[3] * rho_l[base + 3];
                cell += cell_rule.weights[q] * detail::ipow(s / r_hi, l + 1) * s * val;
            }
            s_mom[i + 1] = detail::ipow(g.r[i] / r_hi, l + 1) * s_mom[i] + g.dr * cell;
        }

        // exterior moment: T_l(r) = r^l int_r^{r_max} s^{1-l} rho_l ds
        t_mom[nr - 1] = 0.0;
        for (int i = nr - 2; i >= 0; --i) {
            const int kind = (i == 0) ? 1 : (i + 2 >= nr ? 2 : 0);
            const int base = (kind == 1) ? 0 : (kind == 2 ? nr - 4 : i - 1);
            double cell = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double gq = cell_rule.nodes[q];
                const double s = g.r[i] + g.dr * gq;
                const auto w = detail::stencil_weights(gq, kind);
                const double val = w[0] * rho_l[base] + w[1] * rho_l[base + 1]
                                 + w[2] * rho_l[base + 2] + w[3] * rho_l[base + 3];
                cell += cell_rule.weights[q] * detail::ipow(g.r[i] / s, l) * s * val;
            }
            t_mom[i] = detail::ipow(g.r[i] / g.r[i + 1], l) * t_mom[i + 1] + g.dr * cell;
        }

        const double pref = 4.0 * M_PI / (2 * l + 1);
        for (int i = 0; i < nr; ++i) {
            const double radial = pref * (s_mom[i] + t_mom[i]);
            for (int j = 0; j < nmu; ++j)
                u.at(i, j) += radial * pl[static_cast<std::size_t>(il) * nmu + j];
        }
    }
    return u;
}

struct SupportRadii {
    double r_eq = 0.0, r_pole = 0.0, r_max_support = 0.0;
};

/** Largest radii with rho > floor along the equator (smallest mu node), the
    pole (largest mu node), and over all angles. EMPTY_SUPPORT if the field
    never exceeds the floor.
*/
inline SupportRadii support_radii(const AxisymmetricField& rho, double floor)
{
    if (!(floor > 0.0)) throw std::invalid_argument("support_radii: floor must be positive");
    const AxisGrid& g = *rho.grid;
    SupportRadii out;
    bool any = false;
    for (int i = 0; i < g.nr; ++i) {
        for (int j = 0; j < g.nmu; ++j) {
            if (rho.at(i, j) > floor) {
                any = true;
                out.r_max_support = std::max(out.r_max_support, g.r[i]);
                if (j == 0) out.r_eq = std::max(out.r_eq, g.r[i]);
                if (j == g.nmu - 1) out.r_pole = std::max(out.r_pole, g.r[i]);
            }
        }
    }
    if (!any) throw Error(ErrorCode::EMPTY_SUPPORT, "support_radii: field below floor everywhere");
    return out;
}

} // namespace rotstar
