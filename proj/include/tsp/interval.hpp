#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "tsp/types.hpp"

namespace tsp {

/// Canonical interval of a duration or frequency value, in seconds.
///
/// Accepts "{n} {unit}" anywhere in the text ("within 8 hours after termination",
/// "Report within 2 hours") and the fixed phrases "End of user working day" (24h bound) and
/// "At least annually" (365-day period). Months are 30 days and years 365 days.
/// Returns nullopt when nothing recognisable is present.
std::optional<std::int64_t> canonical_interval_seconds(std::string_view value);

inline bool has_interval_form(ValueKind kind) noexcept {
    return kind == ValueKind::Duration || kind == ValueKind::Frequency;
}

/// True when `target` is strictly looser than `baseline`. Only meaningful for interval
/// kinds; other kinds never relax. Throws Error(SchemaError) if either value lacks a
/// canonical form.
bool relaxes_baseline(ValueKind kind, std::string_view baseline, std::string_view target);

/// Throws Error(RelaxationRejected) naming `control_id`/`key` when `target` relaxes `baseline`.
void ensure_not_relaxed(std::string_view control_id, std::string_view key, ValueKind kind,
                        std::string_view baseline, std::string_view target);

} // namespace tsp
