#include "tsp/json_reader.hpp"

#include "tsp/utf8.hpp"

namespace tsp::json_io {

json parse(std::string_view raw, ErrorCode code) {
    if (!utf8::is_valid(raw)) {
        throw Error(ErrorCode::InvalidEncoding, "document is not valid UTF-8");
    }
    try {
        return json::parse(raw.begin(), raw.end());
    } catch (const json::parse_error& e) {
        throw Error(code, std::string("malformed JSON: ") + e.what(), {{"path", "$"}});
    }
}

void fail(ErrorCode code, const std::string& at, const std::string& what) {
    throw Error(code, at + ": " + what, {{"path", at}});
}

ObjectReader::ObjectReader(const json& j, std::string path, ErrorCode code)
    : j_(j), path_(std::move(path)), code_(code) {
    if (!j_.is_object()) fail(path_, "expected an object");
}

void ObjectReader::fail(const std::string& at, const std::string& what) const { json_io::fail(code_, at, what); }

std::string ObjectReader::child(std::string_view key) const { return path_ + "." + std::string(key); }

std::string ObjectReader::element(const std::string& array_path, std::size_t index) {
    return array_path + "[" + std::to_string(index) + "]";
}

const json* ObjectReader::raw(std::string_view key) {
    seen_.emplace(key);
    auto it = j_.find(std::string(key));
    if (it == j_.end()) return nullptr;
    return &*it;
}

std::string ObjectReader::required_string(std::string_view key) {
    auto s = optional_string(key);
    if (!s) fail(child(key), "required string is missing");
    return *s;
}

std::optional<std::string> ObjectReader::optional_string(std::string_view key) {
    const json* v = raw(key);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_string()) fail(child(key), "expected a string");
    return v->get<std::string>();
}

bool ObjectReader::optional_bool(std::string_view key, bool fallback) {
    const json* v = raw(key);
    if (!v || v->is_null()) return fallback;
    if (!v->is_boolean()) fail(child(key), "expected a boolean");
    return v->get<bool>();
}

double ObjectReader::required_number(std::string_view key) {
    auto n = optional_number(key);
    if (!n) fail(child(key), "required number is missing");
    return *n;
}

std::optional<double> ObjectReader::optional_number(std::string_view key) {
    const json* v = raw(key);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_number()) fail(child(key), "expected a number");
    return v->get<double>();
}

const json& ObjectReader::array(std::string_view key, bool required) {
    static const json kEmpty = json::array();
    const json* v = raw(key);
    if (!v || v->is_null()) {
        if (required) fail(child(key), "required array is missing");
        return kEmpty;
    }
    if (!v->is_array()) fail(child(key), "expected an array");
    return *v;
}

const json* ObjectReader::object(std::string_view key, bool required) {
    const json* v = raw(key);
    if (!v || v->is_null()) {
        if (required) fail(child(key), "required object is missing");
        return nullptr;
    }
    if (!v->is_object()) fail(child(key), "expected an object");
    return v;
}

std::vector<std::string> ObjectReader::string_array(std::string_view key, bool required) {
    const json& arr = array(key, required);
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) fail(element(child(key), i), "expected a string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

void ObjectReader::finish() const {
    for (const auto& [key, _] : j_.items()) {
        if (!seen_.contains(key)) fail(child(key), "unknown key");
    }
}

} // namespace tsp::json_io
