#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robust_scatter {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    index_out_of_range,
    not_spd,
    singular,
    non_convergence,
    infeasible,
    bracket_not_found,
    parse_error,
    io_error,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::index_out_of_range: return "index_out_of_range";
        case ErrorCode::not_spd: return "not_spd";
        case ErrorCode::singular: return "singular";
        case ErrorCode::non_convergence: return "non_convergence";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::bracket_not_found: return "bracket_not_found";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

/// Numerical failures (non-convergence, infeasibility, singular systems) are
/// distinguished from usage errors so callers can map them to exit statuses.
inline bool is_numerical(ErrorCode code) {
    return code == ErrorCode::not_spd || code == ErrorCode::singular ||
           code == ErrorCode::non_convergence || code == ErrorCode::infeasible ||
           code == ErrorCode::bracket_not_found;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace robust_scatter
