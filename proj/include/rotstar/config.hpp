#pragma once
/** @file
    Run configuration: a flat key=value text format with dotted key paths.

    The surface is deliberately small and language-neutral: one `key = value`
    per line, `#` comments, no sections or nesting. Every key has a default
    except the seed, where exactly one of `seed.a` / `seed.mass` must be set.
    Unknown keys are hard errors so typos cannot silently fall back to a
    default, and every numeric range is validated up front with the offending
    key path in the message (CONFIG_ERROR, CLI exit code 1).
*/

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace rotstar {

struct RunConfig {
    // equation of state
    std::string eos_kind = "power_law";  ///< only closed-form kind has a config surface
    double eos_gamma = 1.5;
    double eos_coeff = 1.0;

    // rotation law
    std::string rotation_mode = "velocity";     ///< velocity | momentum
    std::string rotation_law = "inverse_poly";  ///< inverse_poly | exponential | power
    double rotation_A = 1.0;                    ///< inverse_poly / power amplitude
    double rotation_q = 2.0;                    ///< inverse_poly tail exponent
    double rotation_omega0 = 1.0;               ///< exponential central rate
    double rotation_s0 = 1.0;                   ///< exponential decay scale
    double rotation_d = 2.0;                    ///< power-law momentum exponent
    double rotation_delta = 0.5;                ///< power-law Holder index

    // seed: exactly one of {a, mass} must be positive
    double seed_a = 0.0;     ///< central enthalpy of the nonrotating seed
    double seed_mass = 0.0;  ///< target mass; central value found by bracketing

    // grid
    double grid_r_max = 0.0;  ///< 0 = auto: twice the seed support radius
    int grid_nr = 96;
    int grid_nmu = 12;
    int grid_lmax = 16;

    // fixed-point solve
    double scf_tol = 1e-8;
    int scf_max_iter = 500;
    double scf_relax = 0.5;

    // branch continuation
    double continuation_kappa_sq_step_init = 0.01;
    double continuation_step_min = 1e-6;
    double continuation_step_max = 0.125;
    double continuation_kappa_max = 2.0;
    int continuation_max_steps = 200;
    double continuation_rho_max = std::numeric_limits<double>::infinity();
    double continuation_support_frac = 0.9;
    double continuation_margin_min = 1e-6;  ///< fraction of |seed offset|

    // diagnostics
    double diagnostics_s_exponent = 4.0;
    double diagnostics_floor = 1e-10;  ///< support threshold, fraction of sup rho

    // output
    std::string output_dir = "out";
    int output_snapshot_every = 1;  ///< write every k-th point snapshot
    unsigned long long rng_seed = 12345;  ///< seeds the sampled diagnostic direction
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& key, const std::string& reason)
{
    throw Error(ErrorCode::CONFIG_ERROR, key + ": " + reason);
}

inline double parse_double(const std::string& key, const std::string& v)
{
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        config_fail(key, "expected a number, got '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& key, const std::string& v)
{
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        config_fail(key, "expected an integer, got '" + v + "'");
    return x;
}

inline unsigned long long parse_uint(const std::string& key, const std::string& v)
{
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || v.find('-') != std::string::npos)
        config_fail(key, "expected a non-negative integer, got '" + v + "'");
    return x;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string fmt_cfg(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// Assign one key=value pair; unknown keys throw CONFIG_ERROR with the path.
inline void apply_key(RunConfig& c, const std::string& key, const std::string& value)
{
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_uint;

    auto as_int = [&](int lo) {
        const long long x = parse_int(key, value);
        if (x < lo || x > std::numeric_limits<int>::max())
            detail::config_fail(key, "integer out of range");
        return static_cast<int>(x);
    };

    if (key == "eos.kind") c.eos_kind = value;
    else if (key == "eos.gamma") c.eos_gamma = parse_double(key, value);
    else if (key == "eos.coeff") c.eos_coeff = parse_double(key, value);
    else if (key == "rotation.mode") c.rotation_mode = value;
    else if (key == "rotation.law") c.rotation_law = value;
    else if (key == "rotation.A") c.rotation_A = parse_double(key, value);
    else if (key == "rotation.q") c.rotation_q = parse_double(key, value);
    else if (key == "rotation.omega0") c.rotation_omega0 = parse_double(key, value);
    else if (key == "rotation.s0") c.rotation_s0 = parse_double(key, value);
    else if (key == "rotation.d") c.rotation_d = parse_double(key, value);
    else if (key == "rotation.delta") c.rotation_delta = parse_double(key, value);
    else if (key == "seed.a") c.seed_a = parse_double(key, value);
    else if (key == "seed.mass") c.seed_mass = parse_double(key, value);
    else if (key == "grid.r_max") c.grid_r_max = parse_double(key, value);
    else if (key == "grid.nr") c.grid_nr = as_int(0);
    else if (key == "grid.nmu") c.grid_nmu = as_int(0);
    else if (key == "grid.lmax") c.grid_lmax = as_int(0);
    else if (key == "scf.tol") c.scf_tol = parse_double(key, value);
    else if (key == "scf.max_iter") c.scf_max_iter = as_int(0);
    else if (key == "scf.relax") c.scf_relax = parse_double(key, value);
    else if (key == "continuation.kappa_sq_step_init")
        c.continuation_kappa_sq_step_init = parse_double(key, value);
    else if (key == "continuation.step_min") c.continuation_step_min = parse_double(key, value);
    else if (key == "continuation.step_max") c.continuation_step_max = parse_double(key, value);
    else if (key == "continuation.kappa_max") c.continuation_kappa_max = parse_double(key, value);
    else if (key == "continuation.max_steps") c.continuation_max_steps = as_int(0);
    else if (key == "continuation.rho_max") c.continuation_rho_max = parse_double(key, value);
    else if (key == "continuation.support_frac")
        c.continuation_support_frac = parse_double(key, value);
    else if (key == "continuation.margin_min") c.continuation_margin_min = parse_double(key, value);
    else if (key == "diagnostics.s_exponent") c.diagnostics_s_exponent = parse_double(key, value);
    else if (key == "diagnostics.floor") c.diagnostics_floor = parse_double(key, value);
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "output.snapshot_every") c.output_snapshot_every = as_int(0);
    else if (key == "rng_seed") c.rng_seed = parse_uint(key, value);
    else detail::config_fail(key, "unknown key");
}

/// Range-check every field; throws CONFIG_ERROR naming the offending key.
inline void validate(const RunConfig& c)
{
    using detail::config_fail;

    if (c.eos_kind != "power_law")
        config_fail("eos.kind", "unknown kind '" + c.eos_kind + "' (expected power_law)");
    if (!(c.eos_gamma > 1.0 && c.eos_gamma < 2.0))
        config_fail("eos.gamma", "out of (1,2): " + detail::fmt_cfg(c.eos_gamma));
    if (!(c.eos_coeff > 0.0)) config_fail("eos.coeff", "must be positive");

    if (c.rotation_mode != "velocity" && c.rotation_mode != "momentum")
        config_fail("rotation.mode",
                    "unknown mode '" + c.rotation_mode + "' (expected velocity or momentum)");
    if (c.rotation_mode == "velocity") {
        if (c.rotation_law != "inverse_poly" && c.rotation_law != "exponential")
            config_fail("rotation.law", "velocity mode expects inverse_poly or exponential, got '" +
                                            c.rotation_law + "'");
        if (c.rotation_law == "inverse_poly") {
            if (c.rotation_A < 0.0) config_fail("rotation.A", "must be >= 0");
            if (!(c.rotation_q > 1.5))
                config_fail("rotation.q", "tail exponent must exceed 3/2, got " +
                                              detail::fmt_cfg(c.rotation_q));
        } else {
            if (c.rotation_omega0 < 0.0) config_fail("rotation.omega0", "must be >= 0");
            if (!(c.rotation_s0 > 0.0)) config_fail("rotation.s0", "must be positive");
        }
    } else {
        if (c.rotation_law != "power")
            config_fail("rotation.law",
                        "momentum mode expects power, got '" + c.rotation_law + "'");
        if (c.rotation_A < 0.0) config_fail("rotation.A", "must be >= 0");
        if (!(c.rotation_d > 1.0)) config_fail("rotation.d", "must exceed 1");
        if (!(c.rotation_delta > 0.0 && c.rotation_delta < 1.0))
            config_fail("rotation.delta", "must lie in (0,1)");
    }

    // Exactly-one-of {seed.a, seed.mass} is enforced where a seed is actually
    // built (the radial sweep needs no seed); here only ranges are checked.
    if (c.seed_a < 0.0) config_fail("seed.a", "must be positive");
    if (c.seed_mass < 0.0) config_fail("seed.mass", "must be positive");
    if (c.seed_a > 0.0 && c.seed_mass > 0.0)
        config_fail("seed.a / seed.mass", "set exactly one, not both");

    if (c.grid_r_max < 0.0) config_fail("grid.r_max", "must be positive (or 0 for auto)");
    if (c.grid_nr < 8) config_fail("grid.nr", "must be >= 8");
    if (c.grid_nmu < 4) config_fail("grid.nmu", "must be >= 4");
    if (c.grid_lmax < 0) config_fail("grid.lmax", "must be >= 0");
    if (c.grid_lmax % 2 != 0) config_fail("grid.lmax", "must be even (equatorial symmetry)");

    if (!(c.scf_tol > 0.0)) config_fail("scf.tol", "must be positive");
    if (c.scf_max_iter < 1) config_fail("scf.max_iter", "must be >= 1");
    if (!(c.scf_relax > 0.0 && c.scf_relax <= 1.0)) config_fail("scf.relax", "must lie in (0,1]");

    if (!(c.continuation_kappa_sq_step_init > 0.0))
        config_fail("continuation.kappa_sq_step_init", "must be positive");
    if (!(c.continuation_step_min > 0.0)) config_fail("continuation.step_min", "must be positive");
    if (!(c.continuation_step_max >= c.continuation_step_min))
        config_fail("continuation.step_max", "must be >= continuation.step_min");
    if (!(c.continuation_kappa_max > 0.0)) config_fail("continuation.kappa_max", "must be positive");
    if (c.continuation_max_steps < 1) config_fail("continuation.max_steps", "must be >= 1");
    if (!(c.continuation_rho_max > 0.0)) config_fail("continuation.rho_max", "must be positive");
    if (!(c.continuation_support_frac > 0.0 && c.continuation_support_frac <= 1.0))
        config_fail("continuation.support_frac", "must lie in (0,1]");
    if (c.continuation_margin_min < 0.0) config_fail("continuation.margin_min", "must be >= 0");

    if (!(c.diagnostics_s_exponent > 3.0))
        config_fail("diagnostics.s_exponent",
                    "decay exponent must exceed 3, got " + detail::fmt_cfg(c.diagnostics_s_exponent));
    if (!(c.diagnostics_floor >= 0.0 && c.diagnostics_floor < 1.0))
        config_fail("diagnostics.floor", "must lie in [0,1)");

    if (c.output_snapshot_every < 1) config_fail("output.snapshot_every", "must be >= 1");
}

/// Parse `key = value` lines ('#' comments, blank lines skipped) onto defaults.
inline RunConfig parse_config_text(const std::string& text)
{
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            detail::config_fail("line " + std::to_string(lineno),
                                "expected key = value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) detail::config_fail("line " + std::to_string(lineno), "empty key");
        apply_key(c, key, value);
    }
    return c;
}

/// Parse and validate a config file; `overrides` holds --set key=value pairs.
inline RunConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides = {})
{
    RunConfig c;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) detail::config_fail(path, "cannot open config file");
        std::ostringstream buf;
        buf << in.rdbuf();
        c = parse_config_text(buf.str());
    }
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            detail::config_fail(kv, "override must look like key=value");
        apply_key(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    validate(c);
    return c;
}

/// Canonical key -> value echo (declaration order); basis of config_echo and
/// of the byte-determinism contract for summary.json.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c)
{
    using detail::fmt_cfg;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("eos.kind", c.eos_kind);
    kv.emplace_back("eos.gamma", fmt_cfg(c.eos_gamma));
    kv.emplace_back("eos.coeff", fmt_cfg(c.eos_coeff));
    kv.emplace_back("rotation.mode", c.rotation_mode);
    kv.emplace_back("rotation.law", c.rotation_law);
    kv.emplace_back("rotation.A", fmt_cfg(c.rotation_A));
    kv.emplace_back("rotation.q", fmt_cfg(c.rotation_q));
    kv.emplace_back("rotation.omega0", fmt_cfg(c.rotation_omega0));
    kv.emplace_back("rotation.s0", fmt_cfg(c.rotation_s0));
    kv.emplace_back("rotation.d", fmt_cfg(c.rotation_d));
    kv.emplace_back("rotation.delta", fmt_cfg(c.rotation_delta));
    kv.emplace_back("seed.a", fmt_cfg(c.seed_a));
    kv.emplace_back("seed.mass", fmt_cfg(c.seed_mass));
    kv.emplace_back("grid.r_max", fmt_cfg(c.grid_r_max));
    kv.emplace_back("grid.nr", std::to_string(c.grid_nr));
    kv.emplace_back("grid.nmu", std::to_string(c.grid_nmu));
    kv.emplace_back("grid.lmax", std::to_string(c.grid_lmax));
    kv.emplace_back("scf.tol", fmt_cfg(c.scf_tol));
    kv.emplace_back("scf.max_iter", std::to_string(c.scf_max_iter));
    kv.emplace_back("scf.relax", fmt_cfg(c.scf_relax));
    kv.emplace_back("continuation.kappa_sq_step_init", fmt_cfg(c.continuation_kappa_sq_step_init));
    kv.emplace_back("continuation.step_min", fmt_cfg(c.continuation_step_min));
    kv.emplace_back("continuation.step_max", fmt_cfg(c.continuation_step_max));
    kv.emplace_back("continuation.kappa_max", fmt_cfg(c.continuation_kappa_max));
    kv.emplace_back("continuation.max_steps", std::to_string(c.continuation_max_steps));
    kv.emplace_back("continuation.rho_max", fmt_cfg(c.continuation_rho_max));
    kv.emplace_back("continuation.support_frac", fmt_cfg(c.continuation_support_frac));
    kv.emplace_back("continuation.margin_min", fmt_cfg(c.continuation_margin_min));
    kv.emplace_back("diagnostics.s_exponent", fmt_cfg(c.diagnostics_s_exponent));
    kv.emplace_back("diagnostics.floor", fmt_cfg(c.diagnostics_floor));
    kv.emplace_back("output.dir", c.output_dir);
    kv.emplace_back("output.snapshot_every", std::to_string(c.output_snapshot_every));
    kv.emplace_back("rng_seed", std::to_string(c.rng_seed));
    return kv;
}

}  // namespace rotstar
