#include "tsp/interval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <string>

#include "tsp/error.hpp"

namespace tsp {

namespace {

constexpr std::int64_t kMinute = 60;
constexpr std::int64_t kHour = 60 * kMinute;
constexpr std::int64_t kDay = 24 * kHour;

std::int64_t unit_seconds(const std::string& unit) {
    if (unit.starts_with("sec")) return 1;
    if (unit.starts_with("min")) return kMinute;
    if (unit.starts_with("h")) return kHour;
    if (unit.starts_with("d")) return kDay;
    if (unit.starts_with("w")) return 7 * kDay;
    if (unit.starts_with("mon")) return 30 * kDay;
    return 365 * kDay;
}

struct Phrase {
    std::string_view text;
    std::int64_t seconds;
};

constexpr std::array<Phrase, 7> kPhrases{{
    {"end of user working day", kDay},
    {"at least annually", 365 * kDay},
    {"annually", 365 * kDay},
    {"quarterly", 90 * kDay},
    {"monthly", 30 * kDay},
    {"weekly", 7 * kDay},
    {"daily", kDay},
}};

} // namespace

std::optional<std::int64_t> canonical_interval_seconds(std::string_view value) {
    std::string lower(value);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    static const std::regex kAmount(
        R"((\d+)\s*(seconds?|secs?|minutes?|mins?|hours?|hrs?|h|days?|d|weeks?|months?|years?)\b)");
    std::smatch m;
    if (std::regex_search(lower, m, kAmount)) {
        const auto n = std::stoll(m[1].str());
        return n * unit_seconds(m[2].str());
    }
    for (const auto& p : kPhrases) {
        if (lower.find(p.text) != std::string::npos) return p.seconds;
    }
    return std::nullopt;
}

bool relaxes_baseline(ValueKind kind, std::string_view baseline, std::string_view target) {
    if (!has_interval_form(kind)) return false;
    const auto base = canonical_interval_seconds(baseline);
    if (!base) {
        throw Error(ErrorCode::SchemaError, "baseline value has no interval form: " + std::string(baseline));
    }
    const auto tgt = canonical_interval_seconds(target);
    if (!tgt) {
        throw Error(ErrorCode::SchemaError, "value has no interval form: " + std::string(target),
                    {{"value", std::string(target)}});
    }
    return *tgt > *base;
}

void ensure_not_relaxed(std::string_view control_id, std::string_view key, ValueKind kind,
                        std::string_view baseline, std::string_view target) {
    if (relaxes_baseline(kind, baseline, target)) {
        throw Error(ErrorCode::RelaxationRejected,
                    std::string(control_id) + "." + std::string(key) + ": '" + std::string(target) +
                        "' is weaker than the baseline minimum '" + std::string(baseline) + "'",
                    {{"control_id", std::string(control_id)},
                     {"param", std::string(key)},
                     {"baseline", std::string(baseline)},
                     {"value", std::string(target)}});
    }
}

} // namespace tsp
