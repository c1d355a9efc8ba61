/** \file field.hpp
    \brief Axisymmetric, equatorially symmetric fields on an (r, mu) grid.

    Radial nodes are uniform on [0, r_max]; angular nodes are Gauss--Legendre
    on mu = cos(theta) in [0,1] (weights sum to 1). Storing only mu >= 0 makes
    every represented field axisymmetric and even in x3 by construction.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rotstar/common.hpp"
#include "rotstar/math/quadrature.hpp"

namespace rotstar {

struct AxisGrid {
    int nr = 0, nmu = 0;
    double r_max = 0.0, dr = 0.0;
    std::vector<double> r;          ///< nr uniform radial nodes, r[0] = 0
    std::vector<double> mu, wmu;    ///< Gauss--Legendre nodes/weights on [0,1]
    std::vector<double> wr;         ///< composite radial weights (cubic rule)

    AxisGrid(int nr_, int nmu_, double r_max_) : nr(nr_), nmu(nmu_), r_max(r_max_)
    {
        if (nr < 8 || nmu < 4) throw std::invalid_argument("AxisGrid: nr >= 8, nmu >= 4");
        if (!(r_max > 0.0)) throw std::invalid_argument("AxisGrid: r_max must be positive");
        dr = r_max / (nr - 1);
        r.resize(nr);
        for (int i = 0; i < nr; ++i) r[i] = i * dr;
        const auto rule = math::gauss_legendre_01(nmu);
        mu = rule.nodes;
        wmu = rule.weights;
        wr = math::composite_weights_cubic(static_cast<std::size_t>(nr), dr);
    }
};

using GridPtr = std::shared_ptr<const AxisGrid>;

inline GridPtr make_grid(int nr, int nmu, double r_max)
{
    return std::make_shared<const AxisGrid>(nr, nmu, r_max);
}

struct AxisymmetricField {
    GridPtr grid;
    std::vector<double> values;  ///< row-major, index ir*nmu + jmu

    AxisymmetricField() = default;
    explicit AxisymmetricField(GridPtr g)
        : grid(std::move(g)),
          values(static_cast<std::size_t>(grid->nr) * grid->nmu, 0.0) {}

    double& at(int ir, int jm) { return values[static_cast<std::size_t>(ir) * grid->nmu + jm]; }
    double at(int ir, int jm) const
    {
        return values[static_cast<std::size_t>(ir) * grid->nmu + jm];
    }

    double sup() const
    {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double max_value() const
    {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

/// sup-norm of the difference of two fields on the same grid.
inline double sup_diff(const AxisymmetricField& a, const AxisymmetricField& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

/// Weighted sup-norm max <x>^s |f(x)| with <x> = (1+|x|^2)^{1/2}; s > 3 so
/// that finiteness encodes the decay needed for a bounded potential.
inline double weighted_norm(const AxisymmetricField& f, double s)
{
    if (!(s > 3.0))
        throw Error(ErrorCode::S_TOO_SMALL, "weighted_norm: decay exponent s must exceed 3");
    const AxisGrid& g = *f.grid;
    double m = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double w = std::pow(1.0 + g.r[i] * g.r[i], 0.5 * s);
        for (int j = 0; j < g.nmu; ++j) m = std::max(m, w * std::abs(f.at(i, j)));
    }
    return m;
}

} // namespace rotstar
