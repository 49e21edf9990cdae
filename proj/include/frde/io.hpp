#pragma once

// CSV reals go out with 17 significant digits; JSON goes through
// nlohmann::ordered_json, whose shortest round-trip form is just as stable.

#include <json.hpp>

#include <string>
#include <string_view>

namespace frde::io {

using Json = nlohmann::ordered_json;

std::string num(double v);  // %.17g, "inf"/"nan" spelled out for CSV
Json number(double v);      // null for non-finite

// Insertion-ordered object with a chaining add().
class JsonObject {
public:
    template <class T>
    JsonObject& add(std::string_view key, const T& v) {
        j_[std::string(key)] = v;
        return *this;
    }
    JsonObject& add(std::string_view key, double v) { return add<Json>(key, number(v)); }
    JsonObject& add_raw(std::string_view key, std::string_view raw_json);  // parsed, must be valid
    const Json& json() const noexcept { return j_; }
    std::string str() const { return j_.dump(); }

private:
    Json j_ = Json::object();
};

}  // namespace frde::io
