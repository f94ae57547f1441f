#pragma once

#include <stdexcept>
#include <string>

namespace hypvar {

enum class ErrorKind {
    invalid_parameter,
    division_undefined,
    insufficient_domain,
    wrong_measure,
    not_in_trapping_region,
    invalid_start,
    pigeonhole_failure,
    invalid_pair,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::division_undefined: return "division-undefined";
    case ErrorKind::insufficient_domain: return "insufficient-domain";
    case ErrorKind::wrong_measure: return "wrong-measure";
    case ErrorKind::not_in_trapping_region: return "not-in-trapping-region";
    case ErrorKind::invalid_start: return "invalid-start";
    case ErrorKind::pigeonhole_failure: return "pigeonhole-failure";
    case ErrorKind::invalid_pair: return "invalid-pair";
    }
    return "unknown";
}

/// Every precondition failure in the library is reported through this type;
/// `kind()` lets callers and tests branch on the category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace hypvar
