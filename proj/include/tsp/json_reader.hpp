#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tsp/error.hpp"

namespace tsp::json_io {

using nlohmann::json;

/// Parses UTF-8 JSON text; syntax errors surface as Error(code) with the parser message.
json parse(std::string_view raw, ErrorCode code = ErrorCode::SchemaError);

/// Strict object reader: every accessed key is remembered, and finish() rejects any key the
/// caller never asked for. Errors carry a JSONPath-like location ("$.controls[3].id").
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path, ErrorCode code = ErrorCode::SchemaError);

    std::string required_string(std::string_view key);
    std::optional<std::string> optional_string(std::string_view key);
    bool optional_bool(std::string_view key, bool fallback);
    double required_number(std::string_view key);
    std::optional<double> optional_number(std::string_view key);

    /// Returns the array at `key`, or an empty array when absent and not required.
    const json& array(std::string_view key, bool required);
    const json* object(std::string_view key, bool required);
    const json* raw(std::string_view key);

    std::vector<std::string> string_array(std::string_view key, bool required);

    std::string child(std::string_view key) const;
    static std::string element(const std::string& array_path, std::size_t index);

    [[noreturn]] void fail(const std::string& at, const std::string& what) const;

    void finish() const;

    const std::string& path() const noexcept { return path_; }
    ErrorCode code() const noexcept { return code_; }

private:
    const json& j_;
    std::string path_;
    ErrorCode code_;
    std::set<std::string, std::less<>> seen_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& at, const std::string& what);

} // namespace tsp::json_io
