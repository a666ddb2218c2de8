#pragma once

// Independent model of the review workflow, used to drive random action sequences
// against the session functions and check every outcome.

#include <cstddef>
#include <random>
#include <string>

#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"

namespace tsp::oracle {

/// Rule draft of the infeasible-device fixture (one below-equivalence compensation) with
/// one Refine record turned into an advisor conflict carrying a Keep alternative.
decision::TargetProfile review_profile(const catalog::Catalog& catalog);

struct SequenceStats {
    std::size_t attempted = 0;
    std::size_t accepted = 0;
    std::size_t approvals = 0;
    std::size_t blocked_approvals = 0;
    std::size_t relaxations = 0;           ///< edits or overrides carrying a loosened interval
    std::size_t relaxations_rejected = 0;  ///< of those, refused with RelaxationRejected
    std::size_t frozen_probes = 0;         ///< attempts against an approved session
};

/// Runs `steps` random actions, including invalid ones, on a fresh session and checks each
/// against the model: rejected actions raise the predicted error and leave the session
/// untouched; accepted ones append exactly the predicted audit entries; approval is
/// blocked exactly when the model says so; an approved session refuses every change.
/// Returns an empty string or a description of the first disagreement.
std::string run_review_sequence(std::mt19937_64& rng, const catalog::Catalog& catalog,
                                const decision::TargetProfile& profile, int steps, SequenceStats& stats);

} // namespace tsp::oracle
