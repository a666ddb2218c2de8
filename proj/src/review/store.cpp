#include "tsp/review/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>

#include "tsp/error.hpp"

namespace tsp::review {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

std::vector<std::string> strings(const nlohmann::ordered_json& j, const char* key) {
    if (!j.contains(key)) return {};
    return j.at(key).get<std::vector<std::string>>();
}

} // namespace

std::vector<nlohmann::ordered_json> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read session log " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<nlohmann::ordered_json> out;
    std::size_t pos = 0;
    while (pos + 4 <= buf.size()) {
        const auto len = get_u32(buf.data() + pos);
        if (pos + 4 + len > buf.size()) break;
        try {
            out.push_back(nlohmann::ordered_json::parse(buf.begin() + static_cast<std::ptrdiff_t>(pos + 4),
                                                buf.begin() + static_cast<std::ptrdiff_t>(pos + 4 + len)));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::IoError, "session log " + path.string() + " is corrupt: " + e.what());
        }
        pos += 4 + len;
    }
    return out;
}

SessionStore::SessionStore(std::filesystem::path dir, const catalog::Catalog& catalog, Clock clock)
    : dir_(std::move(dir)), catalog_(catalog), clock_(std::move(clock)) {
    std::filesystem::create_directories(dir_);
    static const std::regex re(R"(s-(\d+)\.log)");
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (std::regex_match(name, m, re)) counter_ = std::max(counter_, std::stoi(m[1].str()));
    }
}

std::filesystem::path SessionStore::path_of(const std::string& session_id) const { return dir_ / (session_id + ".log"); }

std::string SessionStore::next_id() {
    std::lock_guard lock(index_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s-%04d", ++counter_);
    return buf;
}

std::vector<std::string> SessionStore::list() const {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() == ".log") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void SessionStore::append_event(const std::string& session_id, const nlohmann::ordered_json& event) const {
    const auto body = event.dump();
    std::string rec;
    put_u32(rec, static_cast<std::uint32_t>(body.size()));
    rec += body;
    std::ofstream out(path_of(session_id), std::ios::binary | std::ios::app);
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot append to session log " + path_of(session_id).string());
}

void SessionStore::apply(ReviewSession* current, const nlohmann::ordered_json& ev, ReviewSession& out) const {
    const auto type = ev.at("type").get<std::string>();
    const auto reviewer = ev.at("reviewer").get<std::string>();
    const auto ts = ev.at("timestamp").get<std::string>();
    if (type == "open") {
        out = open_session(decision::profile_from_json(ev.at("profile")),
                           reviewer, ev.at("session_id").get<std::string>(), ts);
        out.profile_id = ev.value("profile_id", "");
        return;
    }
    if (type == "fork") {
        const auto prior = snapshot(ev.at("prior_session_id").get<std::string>());
        out = reopen_approved(prior, ev.at("session_id").get<std::string>(), reviewer, ev.at("reason").get<std::string>(),
                              strings(ev, "controls"), ts);
        return;
    }
    if (!current) throw Error(ErrorCode::Internal, "session event before open");
    out = *current;
    if (type == "action") {
        record_action(out, catalog_, ev.at("control_id").get<std::string>(),
                      parse_control_action(ev.at("action").get<std::string>()),
                      nlohmann::json::parse(ev.at("payload").dump()), reviewer, ts);
    } else if (type == "accept_all") {
        accept_all_pending(out, reviewer, ts);
    } else if (type == "approve") {
        review::approve(out, reviewer, ts);
    } else if (type == "reopen") {
        review::reopen(out, reviewer, ev.at("reason").get<std::string>(), strings(ev, "controls"), ts);
    } else {
        throw Error(ErrorCode::Internal, "unknown session event '" + type + "'");
    }
}

ReviewSession SessionStore::replay(const std::string& session_id) const {
    const auto path = path_of(session_id);
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::UnknownSession, "no session " + session_id, {{"session_id", session_id}});
    }
    ReviewSession s;
    bool started = false;
    for (const auto& ev : read_event_log(path)) {
        ReviewSession next;
        apply(started ? &s : nullptr, ev, next);
        s = std::move(next);
        started = true;
    }
    if (!started) throw Error(ErrorCode::UnknownSession, "session log " + session_id + " is empty");
    return s;
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const std::string& session_id) const {
    std::lock_guard lock(index_mutex_);
    auto it = slots_.find(session_id);
    if (it != slots_.end()) return it->second;
    auto s = std::make_shared<Slot>();
    s->session = replay(session_id);
    slots_.emplace(session_id, s);
    return s;
}

ReviewSession SessionStore::snapshot(const std::string& session_id) const {
    auto s = slot(session_id);
    std::shared_lock lock(s->mutex);
    return s->session;
}

ReviewSession SessionStore::open(const decision::TargetProfile& profile, const std::string& reviewer,
                                 const std::string& profile_id) {
    const auto id = next_id();
    nlohmann::ordered_json ev;
    ev["type"] = "open";
    ev["session_id"] = id;
    ev["profile_id"] = profile_id;
    ev["reviewer"] = reviewer;
    ev["timestamp"] = clock_();
    ev["profile"] = decision::to_json(profile);
    ReviewSession s;
    apply(nullptr, ev, s);
    append_event(id, ev);
    auto sl = std::make_shared<Slot>();
    sl->session = s;
    std::lock_guard lock(index_mutex_);
    slots_[id] = sl;
    return s;
}

ReviewSession SessionStore::act(const std::string& session_id, const std::string& control_id, Action action,
                                const nlohmann::json& payload, const std::string& reviewer) {
    auto s = slot(session_id);
    std::unique_lock lock(s->mutex);
    nlohmann::ordered_json ev;
    ev["type"] = "action";
    ev["control_id"] = control_id;
    ev["action"] = to_string(action);
    ev["payload"] = payload.is_null() ? nlohmann::json::object() : payload;
    ev["reviewer"] = reviewer;
    ev["timestamp"] = clock_();
    ReviewSession next;
    apply(&s->session, ev, next);
    append_event(session_id, ev);
    s->session = next;
    return next;
}

ReviewSession SessionStore::accept_all(const std::string& session_id, const std::string& reviewer) {
    auto s = slot(session_id);
    std::unique_lock lock(s->mutex);
    nlohmann::ordered_json ev{{"type", "accept_all"}, {"reviewer", reviewer}, {"timestamp", clock_()}};
    ReviewSession next;
    apply(&s->session, ev, next);
    append_event(session_id, ev);
    s->session = next;
    return next;
}

decision::TargetProfile SessionStore::approve(const std::string& session_id, const std::string& reviewer) {
    auto s = slot(session_id);
    std::unique_lock lock(s->mutex);
    nlohmann::ordered_json ev{{"type", "approve"}, {"reviewer", reviewer}, {"timestamp", clock_()}};
    ReviewSession next;
    apply(&s->session, ev, next);
    append_event(session_id, ev);
    s->session = next;
    return next.profile;
}

ReviewSession SessionStore::reopen(const std::string& session_id, const std::string& reviewer,
                                   const std::string& reason, const std::vector<std::string>& controls) {
    auto s = slot(session_id);
    {
        std::unique_lock lock(s->mutex);
        if (!s->session.approved()) {
            nlohmann::ordered_json ev{{"type", "reopen"},   {"reviewer", reviewer}, {"timestamp", clock_()},
                                      {"reason", reason},   {"controls", controls}};
            ReviewSession next;
            apply(&s->session, ev, next);
            append_event(session_id, ev);
            s->session = next;
            return next;
        }
    }
    // Approved sessions are immutable; the new round lives in a fresh session.
    const auto id = next_id();
    nlohmann::ordered_json ev{{"type", "fork"},          {"session_id", id},   {"prior_session_id", session_id},
                              {"reviewer", reviewer},    {"timestamp", clock_()}, {"reason", reason},
                              {"controls", controls}};
    ReviewSession next;
    apply(nullptr, ev, next);
    append_event(id, ev);
    auto sl = std::make_shared<Slot>();
    sl->session = next;
    std::lock_guard lock(index_mutex_);
    slots_[id] = sl;
    return next;
}

} // namespace tsp::review
