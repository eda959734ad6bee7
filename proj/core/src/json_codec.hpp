#pragma once

// Internal JSON mapping shared by the wire codec, the log persistence format
// and the report writer. Object keys are emitted sorted (std::map backed
// nlohmann::json), which is what makes the text canonical.

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fogbus/protocol.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus::detail {

using Json = nlohmann::json;

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict object reader: every key must be read exactly once and unknown keys
/// are an error.
class ObjReader {
public:
    ObjReader(const Json& j, std::string_view what) : j_(j), what_(what) {
        if (!j.is_object()) throw CodecError(std::string(what) + ": expected object");
    }

    const Json& raw(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) throw CodecError(what_ + ": missing key '" + key + "'");
        seen_.insert(key);
        return *it;
    }

    std::string str(const char* key) {
        const Json& v = raw(key);
        if (!v.is_string()) throw CodecError(what_ + "." + key + ": expected string");
        return v.get<std::string>();
    }

    double num(const char* key) {
        const Json& v = raw(key);
        if (!v.is_number()) throw CodecError(what_ + "." + key + ": expected number");
        return v.get<double>();
    }

    std::uint64_t u64(const char* key) {
        const Json& v = raw(key);
        if (!v.is_number_unsigned()) throw CodecError(what_ + "." + key + ": expected unsigned");
        return v.get<std::uint64_t>();
    }

    std::int64_t i64(const char* key) {
        const Json& v = raw(key);
        if (!v.is_number_integer()) throw CodecError(what_ + "." + key + ": expected integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const char* key) {
        const Json& v = raw(key);
        if (!v.is_boolean()) throw CodecError(what_ + "." + key + ": expected bool");
        return v.get<bool>();
    }

    const Json& array(const char* key) {
        const Json& v = raw(key);
        if (!v.is_array()) throw CodecError(what_ + "." + key + ": expected array");
        return v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw CodecError(what_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    const Json& j_;
    std::string what_;
    std::set<std::string, std::less<>> seen_;
};

inline double finite(double v, const char* field) {
    if (!std::isfinite(v)) throw CodecError(std::string(field) + ": non-finite number");
    return v;
}

Json to_json(const Address& a);
Address address_from_json(const Json& j);

Json to_json(const LogRecord& r);
LogRecord record_from_json(const Json& j);

}  // namespace fogbus::detail
