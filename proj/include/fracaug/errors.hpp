#pragma once

#include <stdexcept>
#include <string>

namespace fracaug {

// Error categories map onto CLI exit codes: input/format problems exit 2,
// numeric aborts exit 3, failed verification checks exit 1.
enum class ErrorKind {
    format,       // malformed or missing input files
    integrity,    // structurally inconsistent input (bad edge endpoints, ...)
    unsupported,  // well-formed input outside the supported problem class
    contract,     // caller violated a documented precondition
    domain,       // argument outside the mathematical domain of the operation
    numeric,      // solver failure / non-finite values during computation
    config,       // bad configuration (unknown key, infeasible split, ...)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::numeric: return 3;
            default: return 2;
        }
    }

private:
    ErrorKind kind_;
};

inline Error format_error(const std::string& msg) { return Error(ErrorKind::format, msg); }
inline Error integrity_error(const std::string& msg) { return Error(ErrorKind::integrity, msg); }
inline Error unsupported_error(const std::string& msg) { return Error(ErrorKind::unsupported, msg); }
inline Error contract_violation(const std::string& msg) { return Error(ErrorKind::contract, msg); }
inline Error domain_error(const std::string& msg) { return Error(ErrorKind::domain, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::numeric, msg); }
inline Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }

}  // namespace fracaug
