#include "frde/io.hpp"
#include "frde/errors.hpp"

#include <cmath>
#include <cstdio>

namespace frde {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ok: return "ok";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::out_of_domain: return "out_of_domain";
        case ErrorCode::not_scalable: return "not_scalable";
        case ErrorCode::iteration_cap: return "iteration_cap";
        case ErrorCode::tail_too_loose: return "tail_too_loose";
        case ErrorCode::no_sign_change: return "no_sign_change";
        case ErrorCode::below_critical: return "below_critical";
        case ErrorCode::no_bracket: return "no_bracket";
        case ErrorCode::not_admissible: return "not_admissible";
        case ErrorCode::depth_too_large: return "depth_too_large";
        case ErrorCode::empty_xi: return "empty_xi";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

namespace io {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

JsonObject& JsonObject::add_raw(std::string_view key, std::string_view raw_json) {
    j_[std::string(key)] = Json::parse(raw_json);
    return *this;
}

}  // namespace io
}  // namespace frde
