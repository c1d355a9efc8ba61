/** \file common.hpp
    \brief Error handling, validation reports and shared constants.
*/
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rotstar {

inline constexpr const char* VERSION = "0.1.0";

/// Machine-readable failure categories carried by rotstar::Error.
enum class ErrorCode {
    NEGATIVE_DENSITY,
    MALFORMED_TABLE,
    NO_CLASSIFICATION,
    NOT_COMPACT,
    NO_BRACKET,
    GRID_TOO_SMALL,
    INADMISSIBLE_OMEGA,
    ODD_LMAX,
    EMPTY_SUPPORT,
    MASS_UNREACHABLE,
    NO_CONVERGENCE,
    S_TOO_SMALL,
    CONFIG_ERROR,
    IO_ERROR,
    SEED_FAILURE,
};

inline const char* to_string(ErrorCode c)
{
    switch (c) {
        case ErrorCode::NEGATIVE_DENSITY:   return "NEGATIVE_DENSITY";
        case ErrorCode::MALFORMED_TABLE:    return "MALFORMED_TABLE";
        case ErrorCode::NO_CLASSIFICATION:  return "NO_CLASSIFICATION";
        case ErrorCode::NOT_COMPACT:        return "NOT_COMPACT";
        case ErrorCode::NO_BRACKET:         return "NO_BRACKET";
        case ErrorCode::GRID_TOO_SMALL:     return "GRID_TOO_SMALL";
        case ErrorCode::INADMISSIBLE_OMEGA: return "INADMISSIBLE_OMEGA";
        case ErrorCode::ODD_LMAX:           return "ODD_LMAX";
        case ErrorCode::EMPTY_SUPPORT:      return "EMPTY_SUPPORT";
        case ErrorCode::MASS_UNREACHABLE:   return "MASS_UNREACHABLE";
        case ErrorCode::NO_CONVERGENCE:     return "NO_CONVERGENCE";
        case ErrorCode::S_TOO_SMALL:        return "S_TOO_SMALL";
        case ErrorCode::CONFIG_ERROR:       return "CONFIG_ERROR";
        case ErrorCode::IO_ERROR:           return "IO_ERROR";
        case ErrorCode::SEED_FAILURE:       return "SEED_FAILURE";
    }
    return "UNKNOWN";
}

/// Exception type used throughout; `what()` is prefixed with the code name.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// One named pass/fail entry of a ValidationReport.
struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
};

/// Outcome of a structural validation (admissibility gates, diagnostics).
/// `overall()` is the conjunction of all checks; warnings never fail a report.
struct ValidationReport {
    std::vector<Check> checks;
    std::vector<std::string> warnings;

    bool overall() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    void add(const std::string& name, bool pass, double measured, double threshold)
    {
        checks.push_back({name, pass, measured, threshold});
    }

    const Check* find(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

} // namespace rotstar
