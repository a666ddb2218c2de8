#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/passport.hpp"
#include "tsp/profiling.hpp"

namespace tsp::matrix {

enum class Adequacy { Sufficient, Insufficient, Unknown };

std::string_view to_string(Adequacy a) noexcept;

/// Engine thresholds. All must lie in (0,1).
struct Thresholds {
    double relevance = 0.5;  ///< theta_r
    double risk = 0.7;       ///< theta_risk
    double equivalence = 0.8; ///< minimum compensation coverage to count as acceptable
    double gap_coverage = 0.8; ///< cumulative mitigation weight needed to cover a risk tag

    /// Throws Error(ConfigError) when a value falls outside (0,1).
    void validate() const;
};

/// The slice of system context a control's assessment depends on.
struct RowContext {
    std::vector<ContextTag> tags;      ///< active tags the control refers to
    std::vector<std::string> fields;   ///< passport fields backing those tags and rules
    std::vector<ContextTag> risk_factors; ///< active mitigation tags that raised risk
};

struct MatrixRow {
    catalog::Control control;
    std::vector<catalog::Parameter> min_params;
    RowContext context;
    std::vector<profiling::Requirement> requirements;
    double risk = 0.0;
    double relevance = 0.0;
    Adequacy adequacy = Adequacy::Sufficient;
    /// Missing passport fields behind an Unknown adequacy.
    std::vector<std::string> gaps;
    bool infeasible = false;
    std::string infeasible_reason;
    std::optional<passport::CompensatingMeasure> declared_measure;
    /// Enhancements whose own relevance clears theta_r, in the control's listed order.
    std::vector<std::string> candidate_enhancements;

    bool has_active_tag(ContextTag t) const noexcept;
};

struct WorkingMatrix {
    std::vector<MatrixRow> rows;
    Thresholds thresholds;
    /// Non-fatal findings, e.g. infeasibility declared for an id the catalog lacks.
    std::vector<std::string> warnings;
};

/// Share of applicability weight present in the system context; 1.0 for tag-free controls.
double relevance(const catalog::Control& control, const passport::SystemModel& model);

/// Unknown when gaps are non-empty, Insufficient when any rule's condition tag is active,
/// Sufficient otherwise.
Adequacy adequacy(std::span<const catalog::Parameter> min_params, const passport::SystemModel& model,
                  std::span<const std::string> gaps);

/// Category base (0.3/0.5/0.7) plus 0.1 per active mitigation tag, clamped to [0,1].
double risk_score(const catalog::Control& control, const passport::SystemModel& model, Category category);

WorkingMatrix expand_baseline(const catalog::BaselineProfile& baseline, const passport::SystemModel& model,
                              const profiling::RequirementSet& reqs, Category category,
                              const Thresholds& thresholds, const catalog::Catalog& catalog);

nlohmann::ordered_json to_json(const MatrixRow& row);
nlohmann::ordered_json to_json(const WorkingMatrix& matrix);

} // namespace tsp::matrix
