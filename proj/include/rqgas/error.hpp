#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rqgas {

/// Coarse classification of every failure the library raises. The CLI maps
/// these onto process exit codes.
enum class ErrorKind {
    config,           ///< invalid input or configuration
    domain,           ///< argument outside a function's mathematical domain
    solver,           ///< root finder failed to converge
    saturation,       ///< fermionic capacity reached or exceeded
    enumeration_cap,  ///< exact enumeration would exceed the configured cap
    usage,            ///< mismatched arguments between cooperating calls
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::domain: return "domain";
        case ErrorKind::solver: return "solver";
        case ErrorKind::saturation: return "saturation";
        case ErrorKind::enumeration_cap: return "enumeration_cap";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace rqgas
