#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/passport.hpp"
#include "tsp/types.hpp"

namespace tsp::profiling {

/// One protection need. Multi-objective needs are represented as several records.
struct Requirement {
    Objective objective{};
    std::string statement;
    std::vector<std::string> source_fields;

    friend bool operator==(const Requirement&, const Requirement&) = default;
};

/// The requirement set Q. Insertion order is preserved; (objective, statement) pairs are unique.
class RequirementSet {
public:
    /// Returns false (and merges source fields) when the pair already exists.
    bool add(Requirement req);

    const std::vector<Requirement>& requirements() const noexcept { return items_; }
    std::vector<Requirement> by_objective(Objective o) const;
    bool covers(Objective o) const noexcept;
    std::size_t size() const noexcept { return items_.size(); }

    friend bool operator==(const RequirementSet&, const RequirementSet&) = default;

private:
    std::vector<Requirement> items_;
};

RequirementSet derive_requirements(const passport::SystemModel& model);

/// High-water mark over every data category and impact objective.
Category categorize(const passport::SystemModel& model);

catalog::BaselineProfile select_baseline(const passport::SystemModel& model, const catalog::Catalog& catalog);

nlohmann::ordered_json to_json(const Requirement& r);
nlohmann::ordered_json to_json(const RequirementSet& set);

} // namespace tsp::profiling
