/** \file rotation.hpp
    \brief Prescribed rotation laws and the centrifugal term of the fixed-point map.

    Two descriptions of the swirl are supported. An angular-velocity law
    omega(s) (s = cylinder radius) enters through its centrifugal
    antiderivative j(r) = int_0^r s omega^2(s) ds, which must be bounded with
    rapidly decaying tail. An angular-momentum law L(m) prescribes the squared
    specific angular momentum as a function of the mass m_rho(r) inside the
    coaxial cylinder of radius r; the centrifugal term is then
    -int_r^inf L(m_rho(s)) s^{-3} ds. Laws are immutable after construction
    and all evaluations are pure.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotstar/common.hpp"
#include "rotstar/field.hpp"
#include "rotstar/math/interp.hpp"
#include "rotstar/math/quadrature.hpp"
#include "rotstar/math/roots.hpp"

namespace rotstar {

enum class OmegaProfile { inverse_poly, exponential, table };
enum class MomentumProfile { power, table, induced };
enum class RotationMode { angular_velocity, angular_momentum };

/** Angular-velocity law omega(s) with cached centrifugal antiderivative.

    Presets use closed forms for j and j_sup; table laws carry a monotone
    interpolant of j built on the sample radii plus a fitted power tail
    omega^2 ~ B s^{-p} beyond the last sample.
*/
struct OmegaLaw {
    OmegaProfile profile = OmegaProfile::inverse_poly;

    // inverse_poly: omega^2(s) = A (1 + s^2)^{-q}
    double A = 0.0, q = 2.0;
    // exponential: omega(s) = omega0 exp(-s / s0)
    double omega0 = 0.0, s0 = 1.0;

    // table internals (also used to report tail behaviour)
    std::vector<double> ts;        ///< sample radii
    math::Pchip w2_interp;         ///< omega^2 over [ts.front(), ts.back()]
    math::Pchip j_interp;          ///< cumulative integral over [0, ts.back()]
    double tail_B = 0.0, tail_p = 0.0, j_table_end = 0.0;

    double j_sup = 0.0;   ///< int_0^inf s omega^2(s) ds, may be +inf
    double scale = 1.0;   ///< intrinsic decay scale, used by validation probes

    double omega_sq(double s) const
    {
        switch (profile) {
            case OmegaProfile::inverse_poly:
                return A * std::pow(1.0 + s * s, -q);
            case OmegaProfile::exponential: {
                const double w = omega0 * std::exp(-s / s0);
                return w * w;
            }
            case OmegaProfile::table:
                if (s <= ts.front()) return std::max(0.0, w2_interp.eval(ts.front()));
                if (s <= ts.back()) return std::max(0.0, w2_interp.eval(s));
                return tail_B > 0.0 ? tail_B * std::pow(s, -tail_p) : 0.0;
        }
        return 0.0;
    }

    /// j(r) = int_0^r s omega^2(s) ds; nondecreasing, j(0) = 0, j <= j_sup.
    double j(double r) const
    {
        if (!(r >= 0.0)) throw std::invalid_argument("OmegaLaw::j: r must be >= 0");
        if (r == 0.0) return 0.0;
        switch (profile) {
            case OmegaProfile::inverse_poly: {
                if (q == 1.0) return 0.5 * A * std::log1p(r * r);
                return 0.5 * A / (q - 1.0) * (1.0 - std::pow(1.0 + r * r, 1.0 - q));
            }
            case OmegaProfile::exponential: {
                const double c = 0.25 * s0 * s0;
                return omega0 * omega0 *
                       (c - std::exp(-2.0 * r / s0) * (0.5 * s0 * r + c));
            }
            case OmegaProfile::table: {
                const double end = ts.back();
                if (r <= end) return std::max(0.0, j_interp.eval(r));
                if (tail_B <= 0.0) return j_table_end;
                if (tail_p > 2.0)
                    return j_table_end + tail_B / (tail_p - 2.0) *
                                             (std::pow(end, 2.0 - tail_p) -
                                              std::pow(r, 2.0 - tail_p));
                if (tail_p == 2.0) return j_table_end + tail_B * std::log(r / end);
                return j_table_end + tail_B / (2.0 - tail_p) *
                                         (std::pow(r, 2.0 - tail_p) -
                                          std::pow(end, 2.0 - tail_p));
            }
        }
        return 0.0;
    }
};

inline OmegaLaw make_inverse_poly(double A, double q)
{
    if (A < 0.0) throw std::invalid_argument("make_inverse_poly: A must be >= 0");
    OmegaLaw law;
    law.profile = OmegaProfile::inverse_poly;
    law.A = A;
    law.q = q;
    law.j_sup = q > 1.0 ? 0.5 * A / (q - 1.0) : std::numeric_limits<double>::infinity();
    if (A == 0.0) law.j_sup = 0.0;
    law.scale = 1.0;
    return law;
}

inline OmegaLaw make_exponential(double omega0, double s0)
{
    if (omega0 < 0.0) throw std::invalid_argument("make_exponential: omega0 must be >= 0");
    if (!(s0 > 0.0)) throw std::invalid_argument("make_exponential: s0 must be positive");
    OmegaLaw law;
    law.profile = OmegaProfile::exponential;
    law.omega0 = omega0;
    law.s0 = s0;
    law.j_sup = 0.25 * omega0 * omega0 * s0 * s0;
    law.scale = s0;
    return law;
}

/** Builds an omega law from samples (r_i, omega_i).

    Radii must be strictly increasing and nonnegative; omega must be
    nonnegative. Below the first sample omega is extended as a constant; past
    the last sample a power law omega^2 = B s^{-p} is fitted to the trailing
    positive samples (zero tail if the table ends in zeros).
*/
inline OmegaLaw make_omega_table(const std::vector<double>& r, const std::vector<double>& omega)
{
    const std::size_t n = r.size();
    if (n < 4 || omega.size() != n)
        throw Error(ErrorCode::MALFORMED_TABLE, "omega table needs >= 4 aligned samples");
    if (!(r.front() >= 0.0))
        throw Error(ErrorCode::MALFORMED_TABLE, "omega table radii must be >= 0");
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(r[i] > r[i - 1]))
            throw Error(ErrorCode::MALFORMED_TABLE, "omega table radii must be strictly increasing");
        if (!(omega[i] >= 0.0) || !std::isfinite(omega[i]))
            throw Error(ErrorCode::MALFORMED_TABLE, "omega table values must be finite and >= 0");
    }

    OmegaLaw law;
    law.profile = OmegaProfile::table;
    law.ts = r;
    std::vector<double> w2(n);
    for (std::size_t i = 0; i < n; ++i) w2[i] = omega[i] * omega[i];
    law.w2_interp = math::Pchip(r, w2);

    // Tail fit over the last (up to four) strictly positive samples.
    std::size_t lo = n;
    while (lo > 0 && omega[lo - 1] > 0.0 && r[lo - 1] > 0.0 && n - lo < 4) --lo;
    if (lo == n || n - lo < 2 || omega[n - 1] == 0.0) {
        law.tail_B = 0.0;
        law.tail_p = 0.0;
    } else {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double cnt = static_cast<double>(n - lo);
        for (std::size_t i = lo; i < n; ++i) {
            const double x = std::log(r[i]), y = std::log(w2[i]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double denom = cnt * sxx - sx * sx;
        const double slope = denom != 0.0 ? (cnt * sxy - sx * sy) / denom : 0.0;
        law.tail_p = -slope;
        law.tail_B = w2[n - 1] * std::pow(r[n - 1], law.tail_p);
    }

    // Cumulative j on sample radii plus midpoints (monotone interpolant).
    auto w2_at = [&law](double s) { return law.omega_sq(s); };
    std::vector<double> jn, jv;
    jn.reserve(2 * n + 2);
    jv.reserve(2 * n + 2);
    double acc = 0.0, prev = 0.0;
    if (r.front() > 0.0) {
        jn.push_back(0.0);
        jv.push_back(0.0);
        prev = 0.0;
    }
    auto push_to = [&](double s) {
        acc += math::adaptive_simpson([&](double t) { return t * w2_at(t); }, prev, s, 1e-14);
        prev = s;
        jn.push_back(s);
        jv.push_back(acc);
    };
    if (r.front() == 0.0) {
        jn.push_back(0.0);
        jv.push_back(0.0);
        prev = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            push_to(0.5 * (r[i - 1] + r[i]));
            push_to(r[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            push_to(i == 0 ? r[0] : 0.5 * (r[i - 1] + r[i]));
            if (i > 0) push_to(r[i]);
        }
    }
    // enforce exact nondecreasingness against quadrature round-off
    for (std::size_t i = 1; i < jv.size(); ++i) jv[i] = std::max(jv[i], jv[i - 1]);
    law.j_interp = math::Pchip(jn, jv);
    law.j_table_end = jv.back();
    if (law.tail_B <= 0.0)
        law.j_sup = law.j_table_end;
    else if (law.tail_p > 2.0)
        law.j_sup = law.j_table_end +
                    law.tail_B / (law.tail_p - 2.0) * std::pow(r[n - 1], 2.0 - law.tail_p);
    else
        law.j_sup = std::numeric_limits<double>::infinity();
    law.scale = r[n - 1];
    return law;
}

/// j(r) = int_0^r s omega^2(s) ds, evaluated from the law's cache/closed form.
inline double j_eval(const OmegaLaw& law, double r) { return law.j(r); }

/** Admissibility of an angular-velocity law.

    omega1_integrable : s omega^2(s) in L^1(0, inf), i.e. j_sup finite.
    omega1_support    : omega^2 > 0 on a geometric tail sequence
                        (not compactly supported).
    omega2_decay      : r (j_sup - j(r)) -> 0 along r_k = scale 2^k; measured
                        as the per-doubling contraction of the tail product
                        (for the inverse_poly family this is 2^{3-2q}, so the
                        check passes exactly when q > 3/2).
*/
inline ValidationReport validate_omega(const OmegaLaw& law)
{
    ValidationReport rep;
    const double inf = std::numeric_limits<double>::infinity();

    rep.add("omega1_integrable", std::isfinite(law.j_sup), law.j_sup, inf);

    // probe a geometric tail; past ~64 decay scales exp laws underflow anyway
    double wmin = inf;
    for (int k = 0; k <= 6; ++k) {
        const double s = law.scale * std::ldexp(1.0, k);
        wmin = std::min(wmin, law.omega_sq(s));
    }
    rep.add("omega1_support", wmin > 0.0, wmin, 0.0);

    if (!std::isfinite(law.j_sup)) {
        rep.add("omega2_decay", false, inf, 1.0);
        return rep;
    }
    std::vector<double> d(25);
    for (int k = 0; k < 25; ++k) {
        const double r = law.scale * std::ldexp(1.0, k);
        d[k] = r * std::max(0.0, law.j_sup - law.j(r));
    }
    const double floor_ = 1e-13 * std::max({d[0], law.j_sup, 1e-300});
    if (d[24] <= floor_) {
        rep.add("omega2_decay", true, 0.0, 1.0);
    } else {
        const double ratio = std::pow(d[24] / d[14], 0.1);
        rep.add("omega2_decay", ratio < 1.0 - 1e-9, ratio, 1.0);
    }
    return rep;
}

/// Throws INADMISSIBLE_OMEGA naming the first violated condition.
inline void require_admissible(const OmegaLaw& law)
{
    const ValidationReport rep = validate_omega(law);
    if (rep.overall()) return;
    for (const auto& c : rep.checks)
        if (!c.pass)
            throw Error(ErrorCode::INADMISSIBLE_OMEGA,
                        "rotation law inadmissible: check '" + c.name + "' failed");
}

/** Mass inside the coaxial cylinder of radius sigma, reusable across queries.

    Each radial row carries its Gauss--Legendre sum and a monotone interpolant
    of rho over mu; a query subtracts the interpolated integral over
    mu < mu_c(r, sigma) from the full row sum, so sigma past the support
    reproduces the grid total mass exactly.
*/
class CylinderMassProfile {
public:
    explicit CylinderMassProfile(const AxisymmetricField& rho) : grid_(rho.grid)
    {
        const AxisGrid& g = *grid_;
        row_sum_.resize(g.nr);
        rows_.resize(g.nr);
        total_ = 0.0;
        for (int i = 0; i < g.nr; ++i) {
            double s = 0.0;
            std::vector<double> vals(g.nmu);
            for (int j = 0; j < g.nmu; ++j) {
                vals[j] = rho.at(i, j);
                s += g.wmu[j] * vals[j];
            }
            row_sum_[i] = s;
            rows_[i] = math::Pchip(g.mu, vals);
            total_ += g.wr[i] * g.r[i] * g.r[i] * s;
        }
        total_ *= 4.0 * M_PI;
    }

    /// Total mass, identical to the full-grid quadrature.
    double total() const { return total_; }

    double operator()(double sigma) const
    {
        if (!(sigma >= 0.0)) throw std::invalid_argument("cylinder_mass: radius must be >= 0");
        if (sigma == 0.0) return 0.0;
        const AxisGrid& g = *grid_;
        double acc = 0.0;
        for (int i = 0; i < g.nr; ++i) {
            const double r = g.r[i];
            double q = row_sum_[i];
            if (r > sigma) {
                const double t = sigma / r;
                const double mu_c = std::sqrt(std::max(0.0, 1.0 - t * t));
                q -= rows_[i].integrate(0.0, mu_c);
                q = std::clamp(q, 0.0, row_sum_[i]);
            }
            acc += g.wr[i] * r * r * q;
        }
        return 4.0 * M_PI * acc;
    }

private:
    GridPtr grid_;
    std::vector<double> row_sum_;
    std::vector<math::Pchip> rows_;
    double total_ = 0.0;
};

/// m_rho(r): mass of the field inside the coaxial cylinder of radius r.
inline double cylinder_mass(const AxisymmetricField& rho, double r)
{
    return CylinderMassProfile(rho)(r);
}

/** Angular-momentum law L(m) >= 0 with L(0) = L'(0) = 0.

    The induced profile captures L(m_rho(r)) := r^4 omega^2(r) of a converged
    angular-velocity solution. It keeps the cylinder-mass profile m(s) of that
    solution and evaluates L(m) by inverting it with a bracketed root find, so
    the composition L(m_rho(s)) reproduces s^4 omega^2(s) to root-finder
    precision (an interpolated stand-in would inherit the O(dr^{3/2}) node
    cusps of the quadrature-defined m). Where m saturates at the total mass
    the inversion loses meaning and evaluation switches to the geometric form
    r^4 omega^2(r); this makes the identity
    -int_r^inf L(m_rho(s)) s^{-3} ds = j(r) - j_sup exact.
*/
struct MomentumLaw {
    MomentumProfile profile = MomentumProfile::power;

    // power: L(m) = A m^d, d > 1
    double A = 0.0, d = 2.0;
    double holder_delta = 0.5;  ///< Hoelder exponent hypothesis, in (0,1)

    math::Pchip Lm;             ///< table: L over m
    std::shared_ptr<const CylinderMassProfile> m_profile;  ///< induced
    std::vector<double> s_nodes, m_nodes;  ///< induced: strictly increasing samples of m_profile
    double m_table_max = 0.0;
    double s_table_max = 0.0;
    double m_sat = std::numeric_limits<double>::infinity();
    std::optional<OmegaLaw> source;  ///< induced: generating velocity law

    double eval(double m) const
    {
        if (m <= 0.0) return 0.0;
        switch (profile) {
            case MomentumProfile::power:
                return A * std::pow(m, d);
            case MomentumProfile::table:
                return std::max(0.0, Lm.eval(std::min(m, m_table_max)));
            case MomentumProfile::induced: {
                double s = s_table_max;
                if (m < m_table_max) {
                    // Bracket between the stored profile samples first: the
                    // root find then polishes within one grid cell instead of
                    // bisecting the whole support.
                    const auto it = std::upper_bound(m_nodes.begin(), m_nodes.end(), m);
                    const auto k = static_cast<std::size_t>(it - m_nodes.begin());
                    const double lo = k == 0 ? 0.0 : s_nodes[k - 1];
                    const double hi = k == m_nodes.size() ? s_table_max : s_nodes[k];
                    s = math::brent([&](double x) { return (*m_profile)(x) - m; }, lo, hi,
                                    {.xtol_abs = 1e-15});
                }
                const double s2 = s * s;
                return s2 * s2 * source->omega_sq(s);
            }
        }
        return 0.0;
    }

    /// Evaluation with the geometric disambiguation in the saturated region.
    double eval_at(double s, double m) const
    {
        if (profile == MomentumProfile::induced) {
            if (m >= m_sat) {
                const double s2 = s * s;
                return s2 * s2 * source->omega_sq(s);
            }
            // Verified preimage shortcut: when the stored profile maps the
            // caller's radius back to m within rounding of the total mass, s
            // is the inverse the bracketed root find would reconstruct (up
            // to its own conditioning), so the composition can use s
            // directly. This keeps L(m_rho(s)) exact where dm/ds is small
            // and the inversion is worst conditioned; any m that fails the
            // test goes through the genuine inversion.
            if (s > 0.0 && s <= s_table_max &&
                std::abs((*m_profile)(s) - m) <= 1e-13 * m_profile->total()) {
                const double s2 = s * s;
                return s2 * s2 * source->omega_sq(s);
            }
        }
        return eval(m);
    }

    /// int_{r_max}^inf L(m_rho(s)) s^{-3} ds assuming m_rho = m_total beyond r_max.
    double tail_integral(double r_max, double m_total) const
    {
        if (!(r_max > 0.0)) throw std::invalid_argument("tail_integral: r_max must be positive");
        if (profile == MomentumProfile::induced)
            return std::max(0.0, source->j_sup - source->j(r_max));
        return eval(m_total) / (2.0 * r_max * r_max);
    }
};

inline MomentumLaw make_power_momentum(double A, double d = 2.0, double delta = 0.5)
{
    if (A < 0.0) throw std::invalid_argument("make_power_momentum: A must be >= 0");
    if (!(d > 1.0)) throw std::invalid_argument("make_power_momentum: d must be > 1 (L'(0) = 0)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("make_power_momentum: delta must lie in (0,1)");
    MomentumLaw law;
    law.profile = MomentumProfile::power;
    law.A = A;
    law.d = d;
    law.holder_delta = delta;
    return law;
}

inline MomentumLaw make_momentum_table(const std::vector<double>& m, const std::vector<double>& L,
                                       double delta = 0.5)
{
    const std::size_t n = m.size();
    if (n < 4 || L.size() != n)
        throw Error(ErrorCode::MALFORMED_TABLE, "momentum table needs >= 4 aligned samples");
    if (m.front() != 0.0 || L.front() != 0.0)
        throw Error(ErrorCode::MALFORMED_TABLE, "momentum table must start at (0, 0)");
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(m[i] > m[i - 1]))
            throw Error(ErrorCode::MALFORMED_TABLE, "momentum table masses must be strictly increasing");
        if (!(L[i] >= 0.0) || !std::isfinite(L[i]))
            throw Error(ErrorCode::MALFORMED_TABLE, "momentum table values must be finite and >= 0");
    }
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("make_momentum_table: delta must lie in (0,1)");
    MomentumLaw law;
    law.profile = MomentumProfile::table;
    law.holder_delta = delta;
    law.Lm = math::Pchip(m, L);
    law.m_table_max = m.back();
    return law;
}

/** Induces L(m) from an angular-velocity law and one of its density fields.

    Keeps the field's cylinder-mass profile up to the radius where the mass
    reaches sat_frac of the total; past that saturation mass eval_at falls
    back to the geometric form r^4 omega^2(r).
*/
inline MomentumLaw make_induced_momentum(const OmegaLaw& omega, const AxisymmetricField& rho,
                                         double delta = 0.5, double sat_frac = 0.9)
{
    if (!(sat_frac > 0.0 && sat_frac < 1.0))
        throw std::invalid_argument("make_induced_momentum: sat_frac must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("make_induced_momentum: delta must lie in (0,1)");
    auto prof = std::make_shared<const CylinderMassProfile>(rho);
    const AxisGrid& g = *rho.grid;
    const double m_tot = prof->total();
    // Stop the usable range before dm/ds collapses at the support edge: there
    // the inversion m -> s loses conditioning while the geometric branch is
    // exact anyway.
    double s_end = 0.0, m_end = 0.0;
    int kept = 0;
    std::vector<double> s_nodes, m_nodes;
    for (int i = 0; i < g.nr; ++i) {
        const double m = (*prof)(g.r[i]);
        if (m >= m_tot * sat_frac) break;
        if (i > 0 && !(m > m_end)) continue;
        s_end = g.r[i];
        m_end = m;
        s_nodes.push_back(s_end);
        m_nodes.push_back(m_end);
        ++kept;
    }
    if (kept < 4)
        throw Error(ErrorCode::MALFORMED_TABLE, "induced momentum law: support too small on grid");
    MomentumLaw law;
    law.profile = MomentumProfile::induced;
    law.holder_delta = delta;
    law.m_profile = std::move(prof);
    law.s_nodes = std::move(s_nodes);
    law.m_nodes = std::move(m_nodes);
    law.s_table_max = s_end;
    law.m_table_max = m_end;
    law.m_sat = m_end;
    law.source = omega;
    return law;
}

/// Rotation prescription selected by configuration.
struct RotationSpec {
    RotationMode mode = RotationMode::angular_velocity;
    std::optional<OmegaLaw> omega;
    std::optional<MomentumLaw> momentum;
};

/** Centrifugal term of the fixed-point bracket at every grid node.

    angular_velocity : kappa^2 j(s), s = r sqrt(1 - mu^2).
    angular_momentum : -kappa^2 int_s^inf L(m_rho(t)) t^{-3} dt with m_rho of
    the supplied field; the integral uses the cumulative grid rule on [s,
    r_max] plus the analytic tail of the law.
*/
inline AxisymmetricField centrifugal_potential(const GridPtr& grid, const RotationSpec& spec,
                                               const AxisymmetricField& rho, double kappa)
{
    const AxisGrid& g = *grid;
    AxisymmetricField cf(grid);
    if (kappa == 0.0) return cf;
    const double k2 = kappa * kappa;

    if (spec.mode == RotationMode::angular_velocity) {
        if (!spec.omega) throw std::invalid_argument("centrifugal_potential: omega law missing");
        for (int i = 0; i < g.nr; ++i)
            for (int j = 0; j < g.nmu; ++j) {
                const double s = g.r[i] * std::sqrt(std::max(0.0, 1.0 - g.mu[j] * g.mu[j]));
                cf.at(i, j) = k2 * spec.omega->j(s);
            }
        return cf;
    }

    if (!spec.momentum) throw std::invalid_argument("centrifugal_potential: momentum law missing");
    const MomentumLaw& law = *spec.momentum;
    const CylinderMassProfile prof(rho);
    auto f = [&](double t) {
        if (t <= 0.0) return 0.0;
        return law.eval_at(t, prof(t)) / (t * t * t);
    };

    // Every distinct cylindrical radius the node loop will query, ascending.
    std::vector<double> qs;
    qs.reserve(static_cast<std::size_t>(g.nr) * g.nmu);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nmu; ++j)
            qs.push_back(g.r[i] * std::sqrt(std::max(0.0, 1.0 - g.mu[j] * g.mu[j])));
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

    // Suffix integrals int_s^{r_max} L(m(t)) t^{-3} dt accumulated right to
    // left, one adaptive segment per gap between consecutive queries, plus
    // the law's analytic tail beyond r_max. The integrand may behave like a
    // negative power at the axis, so the leftmost segment falls back to a
    // trapezoid with f(0) = 0; only the node r = 0 (zero quadrature weight)
    // reads that value.
    std::vector<double> J(qs.size());
    double acc = law.tail_integral(g.r_max, prof.total());
    double hi = g.r_max;
    for (std::size_t k = qs.size(); k-- > 0;) {
        const double lo = qs[k];
        if (lo < hi) {
            if (lo > 0.0)
                acc += math::adaptive_simpson(f, lo, hi, 1e-14);
            else
                acc += 0.5 * hi * f(hi);
            hi = lo;
        }
        J[k] = acc;
    }

    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nmu; ++j) {
            const double s = g.r[i] * std::sqrt(std::max(0.0, 1.0 - g.mu[j] * g.mu[j]));
            const auto it = std::lower_bound(qs.begin(), qs.end(), s);
            cf.at(i, j) = -k2 * std::max(0.0, J[static_cast<std::size_t>(it - qs.begin())]);
        }
    return cf;
}

}  // namespace rotstar
