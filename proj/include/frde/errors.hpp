#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace frde {

// numeric values are shared with the C API (frde.h)
enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    out_of_domain = 2,
    not_scalable = 3,
    iteration_cap = 4,
    tail_too_loose = 5,
    no_sign_change = 6,
    below_critical = 7,
    no_bracket = 8,
    not_admissible = 9,
    depth_too_large = 10,
    empty_xi = 11,
    internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::string details = {})
        : std::runtime_error(what), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    // extra machine-readable payload (a JSON fragment), may be empty
    const std::string& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::string details_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg, std::string details = {}) {
    throw Error(code, msg, std::move(details));
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(ErrorCode::invalid_argument, msg);
}

}  // namespace frde
