#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/review/session.hpp"

namespace tsp::review {

/// Event-sourced session persistence: one file per session under `dir`, each a sequence of
/// [u32 little-endian length][JSON event] records. Every mutation is validated against a
/// copy, appended to the log, then published; loading replays the log. One writer per
/// session at a time; snapshots never observe a half-applied action.
class SessionStore {
public:
    using Clock = std::function<std::string()>;

    SessionStore(std::filesystem::path dir, const catalog::Catalog& catalog, Clock clock);

    ReviewSession open(const decision::TargetProfile& profile, const std::string& reviewer,
                       const std::string& profile_id = {});
    /// Throws Error(UnknownSession).
    ReviewSession snapshot(const std::string& session_id) const;
    ReviewSession act(const std::string& session_id, const std::string& control_id, Action action,
                      const nlohmann::json& payload, const std::string& reviewer);
    ReviewSession accept_all(const std::string& session_id, const std::string& reviewer);
    decision::TargetProfile approve(const std::string& session_id, const std::string& reviewer);
    /// On an open session starts a new round in place; on an approved one forks a new
    /// session. Returns the session that is now open.
    ReviewSession reopen(const std::string& session_id, const std::string& reviewer, const std::string& reason,
                         const std::vector<std::string>& controls);

    std::vector<std::string> list() const;

    /// Rebuilds a session from its log file alone.
    ReviewSession replay(const std::string& session_id) const;

private:
    struct Slot {
        mutable std::shared_mutex mutex;
        ReviewSession session;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    std::string next_id();
    std::filesystem::path path_of(const std::string& session_id) const;
    void append_event(const std::string& session_id, const nlohmann::ordered_json& event) const;
    void apply(ReviewSession* session, const nlohmann::ordered_json& event, ReviewSession& out) const;

    std::filesystem::path dir_;
    const catalog::Catalog& catalog_;
    Clock clock_;
    mutable std::mutex index_mutex_;
    mutable std::map<std::string, std::shared_ptr<Slot>> slots_;
    int counter_ = 0;
};

/// Raw events of a session log, in order. A truncated final record is ignored.
std::vector<nlohmann::ordered_json> read_event_log(const std::filesystem::path& path);

} // namespace tsp::review
