/** \file eos.hpp
    \brief Barotropic equations of state: pressure law, specific enthalpy and
    its inverse, plus admissibility validation.

    The enthalpy is h(rho) = int_0^rho p'(s)/s ds, so for the power law
    p = C rho^gamma one has h(rho) = (C gamma/(gamma-1)) rho^(gamma-1) and
    h^{-1}(u) = ((gamma-1) u_+ / (C gamma))^(1/(gamma-1)). Sampled tables are
    interpolated monotonically and extended by power-law fits at both ends, so
    h and h^{-1} are defined on all of [0, infinity).
*/
#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "rotstar/common.hpp"
#include "rotstar/math/interp.hpp"
#include "rotstar/math/quadrature.hpp"

namespace rotstar {

enum class EosKind { power_law, sampled };

namespace detail {

/// Interpolated (rho, p) table with power-law end fits and enthalpy nodes.
struct SampledEosData {
    std::vector<double> rho, p, h;
    math::Pchip p_of_rho;
    double gamma_low = 0.0, coeff_low = 0.0;    ///< p ~ c rho^g below the table
    double gamma_high = 0.0, coeff_high = 0.0;  ///< p ~ c rho^g above the table

    double dp_drho(double r) const
    {
        if (r <= rho.front()) return coeff_low * gamma_low * std::pow(r, gamma_low - 1.0);
        if (r >= rho.back()) return coeff_high * gamma_high * std::pow(r, gamma_high - 1.0);
        return p_of_rho.derivative(r);
    }
};

inline double power_enthalpy(double c, double g, double rho)
{
    return c * g / (g - 1.0) * std::pow(rho, g - 1.0);
}

} // namespace detail

struct EquationOfState {
    EosKind kind = EosKind::power_law;
    double gamma = 1.5;       ///< low-density exponent (estimated for sampled kind)
    double coeff = 1.0;       ///< pressure coefficient C > 0
    double gamma_star = 1.5;  ///< asymptotic exponent (estimated for sampled kind)
    std::shared_ptr<const detail::SampledEosData> table;
};

/// Power-law EOS p = C rho^gamma; gamma_star defaults to gamma.
inline EquationOfState make_power_law(double gamma, double coeff = 1.0, double gamma_star = 0.0)
{
    EquationOfState eos;
    eos.kind = EosKind::power_law;
    eos.gamma = gamma;
    eos.coeff = coeff;
    eos.gamma_star = gamma_star > 0.0 ? gamma_star : gamma;
    return eos;
}

/** Sampled EOS from a strictly increasing (rho, p) table.

    Throws MALFORMED_TABLE for fewer than 3 samples, non-positive entries or
    any non-monotone column. The enthalpy is accumulated by adaptive
    quadrature of p'(s)/s across the table, anchored at the closed form of the
    low-end power fit so that h(0) = 0 exactly.
*/
inline EquationOfState make_sampled(std::vector<double> rho, std::vector<double> p)
{
    const std::size_t n = rho.size();
    if (n < 3 || p.size() != n)
        throw Error(ErrorCode::MALFORMED_TABLE, "sampled eos needs >= 3 matching samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(rho[i] > 0.0) || !(p[i] > 0.0))
            throw Error(ErrorCode::MALFORMED_TABLE, "sampled eos requires positive rho and p");
        if (i > 0 && (rho[i] <= rho[i - 1] || p[i] <= p[i - 1]))
            throw Error(ErrorCode::MALFORMED_TABLE,
                        "sampled eos requires strictly increasing rho and p");
    }

    auto data = std::make_shared<detail::SampledEosData>();
    data->rho = rho;
    data->p = p;
    data->p_of_rho = math::Pchip(rho, p);
    auto fit = [](double r0, double p0, double r1, double p1, double& g, double& c) {
        g = std::log(p1 / p0) / std::log(r1 / r0);
        c = p0 / std::pow(r0, g);
    };
    fit(rho[0], p[0], rho[1], p[1], data->gamma_low, data->coeff_low);
    fit(rho[n - 2], p[n - 2], rho[n - 1], p[n - 1], data->gamma_high, data->coeff_high);
    if (!(data->gamma_low > 1.0))
        throw Error(ErrorCode::MALFORMED_TABLE,
                    "low-density exponent must exceed 1 for a finite enthalpy");

    data->h.resize(n);
    data->h[0] = detail::power_enthalpy(data->coeff_low, data->gamma_low, rho[0]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto integrand = [&](double s) { return data->p_of_rho.derivative(s) / s; };
        data->h[i + 1] = data->h[i]
            + math::adaptive_simpson(integrand, rho[i], rho[i + 1],
                                     1e-13 * std::max(1.0, data->h[i]));
    }

    EquationOfState eos;
    eos.kind = EosKind::sampled;
    eos.gamma = data->gamma_low;
    eos.coeff = data->coeff_low;
    eos.gamma_star = data->gamma_high;
    eos.table = std::move(data);
    return eos;
}

/// h(rho); throws NEGATIVE_DENSITY for rho < 0.
inline double eval_enthalpy(const EquationOfState& eos, double rho)
{
    if (rho < 0.0) throw Error(ErrorCode::NEGATIVE_DENSITY, "eval_enthalpy: rho < 0");
    if (rho == 0.0) return 0.0;
    if (eos.kind == EosKind::power_law)
        return detail::power_enthalpy(eos.coeff, eos.gamma, rho);
    const auto& t = *eos.table;
    if (rho <= t.rho.front())
        return detail::power_enthalpy(t.coeff_low, t.gamma_low, rho);
    if (rho >= t.rho.back())
        return t.h.back()
            + t.coeff_high * t.gamma_high / (t.gamma_high - 1.0)
                  * (std::pow(rho, t.gamma_high - 1.0)
                     - std::pow(t.rho.back(), t.gamma_high - 1.0));
    const auto it = std::upper_bound(t.rho.begin(), t.rho.end(), rho);
    const std::size_t k = static_cast<std::size_t>(it - t.rho.begin()) - 1;
    auto integrand = [&](double s) { return t.p_of_rho.derivative(s) / s; };
    return t.h[k] + math::adaptive_simpson(integrand, t.rho[k], rho,
                                           1e-13 * std::max(1.0, t.h[k]));
}

/// h^{-1}(max(u,0)); total on the reals by the positive-part convention.
inline double eval_h_inverse(const EquationOfState& eos, double u)
{
    if (!(u > 0.0)) return 0.0;
    if (eos.kind == EosKind::power_law)
        return std::pow((eos.gamma - 1.0) * u / (eos.coeff * eos.gamma),
                        1.0 / (eos.gamma - 1.0));
    const auto& t = *eos.table;
    auto inv_power = [](double c, double g, double u_) {
        return std::pow((g - 1.0) * u_ / (c * g), 1.0 / (g - 1.0));
    };
    if (u <= t.h.front()) return inv_power(t.coeff_low, t.gamma_low, u);
    if (u >= t.h.back()) {
        const double base = std::pow(t.rho.back(), t.gamma_high - 1.0)
            + (t.gamma_high - 1.0) * (u - t.h.back()) / (t.coeff_high * t.gamma_high);
        return std::pow(base, 1.0 / (t.gamma_high - 1.0));
    }
    // Newton on h(rho) = u, bracketed by the enthalpy table nodes
    const auto it = std::upper_bound(t.h.begin(), t.h.end(), u);
    std::size_t k = static_cast<std::size_t>(it - t.h.begin());
    if (k == 0) k = 1;
    double lo = t.rho[k - 1], hi = t.rho[std::min(k, t.rho.size() - 1)];
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = eval_enthalpy(eos, x) - u;
        if (f > 0.0) hi = x; else lo = x;
        const double df = t.dp_drho(x) / x;
        double step = f / df;
        double xn = x - step;
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * x) { x = xn; break; }
        x = xn;
    }
    return x;
}

/// (h^{-1})'(u) for u > 0, and 0 for u <= 0 (the inverse is flat at the origin).
inline double eval_dh_inverse(const EquationOfState& eos, double u)
{
    if (!(u > 0.0)) return 0.0;
    if (eos.kind == EosKind::power_law) {
        const double g = eos.gamma;
        const double c = (g - 1.0) / (eos.coeff * g);
        return c / (g - 1.0) * std::pow(c * u, (2.0 - g) / (g - 1.0));
    }
    const double rho = eval_h_inverse(eos, u);
    if (rho <= 0.0) return 0.0;
    return rho / eos.table->dp_drho(rho);  // 1 / h'(rho)
}

/** Structural admissibility report.

    Checks, in order: gamma in (1,2); gamma_star in (6/5,2); p' > 0 on a
    log-spaced sample; s^(2-gamma) p''(s) finite positive as s -> 0+;
    s^(1-gamma_star) p'(s) finite positive as s -> infinity; plus round-trip
    consistency of h and h^{-1}. The optional bound p' < h <= 2 p' and the
    exact gamma = 4/3 case are reported as warnings, not failures.
*/
inline ValidationReport validate_eos(const EquationOfState& eos)
{
    if (eos.kind == EosKind::sampled) {
        const auto& t = *eos.table;
        for (std::size_t i = 1; i < t.rho.size(); ++i)
            if (t.rho[i] <= t.rho[i - 1] || t.p[i] <= t.p[i - 1])
                throw Error(ErrorCode::MALFORMED_TABLE, "non-monotone sample table");
    }

    ValidationReport rep;
    rep.add("gamma_range", eos.gamma > 1.0 && eos.gamma < 2.0, eos.gamma, 2.0);
    rep.add("gamma_star_range", eos.gamma_star > 1.2 && eos.gamma_star < 2.0,
            eos.gamma_star, 2.0);

    auto dp = [&](double s) {
        if (eos.kind == EosKind::power_law)
            return eos.coeff * eos.gamma * std::pow(s, eos.gamma - 1.0);
        return eos.table->dp_drho(s);
    };
    bool monotone = true;
    double dp_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 48; ++i) {
        const double s = std::pow(10.0, -6.0 + 9.0 * i / 48.0);
        const double d = dp(s);
        dp_min = std::min(dp_min, d);
        if (!(d > 0.0)) monotone = false;
    }
    rep.add("p_monotone", monotone, dp_min, 0.0);

    // limit of s^(2-gamma) p''(s) as s -> 0+ on a decade sequence
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double s : {1e-6, 1e-5, 1e-4}) {
            const double d2 = (dp(s * 1.01) - dp(s * 0.99)) / (0.02 * s);
            const double v = std::pow(s, 2.0 - eos.gamma) * d2;
            lo = std::min(lo, v); hi = std::max(hi, v);
        }
        rep.add("p2_limit_origin", lo > 0.0 && hi / lo < 10.0, hi, 10.0 * lo);
    }
    // limit of s^(1-gamma_star) p'(s) as s -> infinity
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double s : {1e2, 1e3, 1e4}) {
            const double v = std::pow(s, 1.0 - eos.gamma_star) * dp(s);
            lo = std::min(lo, v); hi = std::max(hi, v);
        }
        rep.add("p3_limit_infinity", lo > 0.0 && hi / lo < 10.0, hi, 10.0 * lo);
    }
    // round trip h^{-1}(h(rho)) = rho on the table range (or a broad power-law range)
    {
        double worst = 0.0;
        const double lo = eos.kind == EosKind::sampled ? eos.table->rho.front() : 1e-8;
        const double hi = eos.kind == EosKind::sampled ? eos.table->rho.back() : 1e4;
        for (int i = 0; i <= 24; ++i) {
            const double rho = lo * std::pow(hi / lo, i / 24.0);
            const double rt = eval_h_inverse(eos, eval_enthalpy(eos, rho));
            worst = std::max(worst, std::abs(rt - rho) / (1.0 + rho));
        }
        rep.add("h_round_trip", worst <= 1e-10, worst, 1e-10);
    }

    if (std::abs(eos.gamma - 4.0 / 3.0) < 1e-12)
        rep.warnings.push_back("GAMMA_FOUR_THIRDS");
    // optional bound (b): p'(s) < h(s) <= 2 p'(s); informational only
    {
        bool ok = true;
        for (double s : {0.1, 1.0, 10.0}) {
            const double hv = eval_enthalpy(eos, s), dpv = dp(s);
            if (!(dpv < hv && hv <= 2.0 * dpv + 1e-14 * hv)) ok = false;
        }
        if (!ok) rep.warnings.push_back("COND_B_OUTSIDE_RANGE");
    }
    return rep;
}

/// Requirements for merely integrating the radial ODE (continuation asks for more).
inline bool radial_admissible(const ValidationReport& rep)
{
    for (const char* name : {"gamma_range", "p_monotone", "h_round_trip"}) {
        const Check* c = rep.find(name);
        if (!c || !c->pass) return false;
    }
    return true;
}

} // namespace rotstar
