#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Error taxonomy shared by the library, the C API and the CLI exit codes.
enum class ErrorCode {
    invalid_argument = 1,
    config = 2,
    non_convergence = 3,
    regime_violation = 4,
    io = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config: return "config_error";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::regime_violation: return "regime_violation";
    case ErrorCode::io: return "io_error";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace qwalk
