#include "tsp/gateway/service.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "tsp/advisor/client.hpp"
#include "tsp/json_reader.hpp"
#include "tsp/passport.hpp"

namespace tsp::gateway {

using nlohmann::ordered_json;

int http_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidEncoding:
    case ErrorCode::FilterFieldUnknown:
    case ErrorCode::TemplateUnknown:
        return 400;
    case ErrorCode::Unauthorized:
        return 401;
    case ErrorCode::UnknownControl:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownProfile:
    case ErrorCode::UnknownJob:
    case ErrorCode::UnknownChunk:
    case ErrorCode::NotFound:
        return 404;
    case ErrorCode::AlreadyUnderReview:
    case ErrorCode::AlreadyApproved:
    case ErrorCode::InvalidTransition:
    case ErrorCode::ApprovalBlocked:
        return 409;
    case ErrorCode::DanglingReference:
    case ErrorCode::BaselineNotMonotone:
    case ErrorCode::EmptyDataCategories:
    case ErrorCode::RelaxationRejected:
    case ErrorCode::NoAdminRoles:
    case ErrorCode::EmbeddingError:
    case ErrorCode::MissingJustification:
    case ErrorCode::MissingReason:
        return 422;
    case ErrorCode::BudgetExceeded:
        return 429;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::NoStructuredBlock:
    case ErrorCode::SchemaViolation:
        return 502;
    case ErrorCode::Timeout:
        return 504;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::CorruptIndex:
    case ErrorCode::IoError:
    case ErrorCode::Internal:
        return 500;
    }
    return 500;
}

HttpResponse problem(const Error& e) {
    const int status = http_status(e.code());
    ordered_json j;
    j["type"] = "about:blank";
    j["title"] = to_string(e.code());
    j["status"] = status;
    j["detail"] = e.what();
    j["code"] = to_string(e.code());
    j["details"] = e.details();
    return {status, "application/problem+json", j.dump()};
}

namespace {

HttpResponse ok(const ordered_json& j, int status = 200) { return {status, "application/json", j.dump()}; }

nlohmann::json parse_body(const std::string& body) {
    if (body.empty()) return nlohmann::json::object();
    auto j = json_io::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "request body must be a JSON object");
    return j;
}

std::string body_string(const nlohmann::json& j, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) throw Error(ErrorCode::SchemaError, std::string("missing field '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw Error(ErrorCode::SchemaError, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> body_strings(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_array()) throw Error(ErrorCode::SchemaError, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw Error(ErrorCode::SchemaError, std::string("field '") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << data;
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    }
    std::filesystem::rename(tmp, p);
}

ordered_json job_json(const DeriveJob& j) {
    ordered_json o;
    o["job_id"] = j.job_id;
    o["state"] = to_string(j.state);
    o["inputs"] = j.inputs;
    if (!j.profile_id.empty()) o["profile_id"] = j.profile_id;
    if (j.error) o["error"] = *j.error;
    return o;
}

ordered_json thresholds_json(const matrix::Thresholds& t) {
    return {{"relevance", t.relevance}, {"risk", t.risk}, {"equivalence", t.equivalence}, {"gap_coverage", t.gap_coverage}};
}

} // namespace

Gateway::Gateway(Deps deps) : deps_(std::move(deps)) {
    if (!deps_.clock) throw Error(ErrorCode::ConfigError, "gateway needs a clock");
    if (!deps_.config.server.bearer_token_env.empty()) {
        const char* tok = std::getenv(deps_.config.server.bearer_token_env.c_str());
        if (!tok || !*tok) {
            throw Error(ErrorCode::ConfigError,
                        "environment variable " + deps_.config.server.bearer_token_env + " holding the API token is not set");
        }
        bearer_token_ = tok;
    }
    profiles_dir_ = deps_.config.data_dir / "profiles";
    transcripts_dir_ = deps_.config.data_dir / "transcripts";
    std::filesystem::create_directories(profiles_dir_);
    std::filesystem::create_directories(transcripts_dir_);
    static const std::regex re(R"(p-(\d+)\.json)");
    for (const auto& e : std::filesystem::directory_iterator(profiles_dir_)) {
        std::smatch m;
        const auto name = e.path().filename().string();
        if (std::regex_match(name, m, re)) profile_counter_ = std::max(profile_counter_, std::stoi(m[1].str()));
    }
    sessions_ = std::make_unique<review::SessionStore>(deps_.config.data_dir / "sessions", deps_.catalog, deps_.clock);
    for (std::size_t i = 0; i < deps_.config.server.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Gateway::~Gateway() {
    {
        std::lock_guard lock(jobs_mutex_);
        stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void Gateway::worker_loop() {
    for (;;) {
        std::function<void()> task;
        {
            std::unique_lock lock(jobs_mutex_);
            jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop_front();
            ++running_;
        }
        task();
        {
            std::lock_guard lock(jobs_mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

void Gateway::wait_idle() {
    std::unique_lock lock(jobs_mutex_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

void Gateway::set_stage(const std::string& job_id, Stage s) {
    std::lock_guard lock(jobs_mutex_);
    jobs_.at(job_id).state = s;
}

std::string Gateway::store_profile(const decision::TargetProfile& p, const std::string& id) {
    std::lock_guard lock(profiles_mutex_);
    std::string pid = id;
    if (pid.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "p-%04d", ++profile_counter_);
        pid = buf;
    }
    write_file(profiles_dir_ / (pid + ".json"), decision::serialize_profile(p));
    return pid;
}

decision::TargetProfile Gateway::load_profile(const std::string& id) {
    static const std::regex re(R"(p-\d+)");
    const auto path = profiles_dir_ / (id + ".json");
    std::lock_guard lock(profiles_mutex_);
    if (!std::regex_match(id, re) || !std::filesystem::exists(path)) {
        throw Error(ErrorCode::UnknownProfile, "no profile " + id, {{"profile_id", id}});
    }
    return decision::parse_profile(read_file(path));
}

void Gateway::run_job(const std::string& job_id, passport::SystemModel model, matrix::Thresholds thresholds,
                      bool use_advisor) {
    try {
        DeriveOptions opts;
        opts.thresholds = thresholds;
        opts.prompt = deps_.config.prompt;
        opts.timestamp = deps_.clock();
        std::unique_ptr<advisor::AdvisorClient> client;
        AdvisorPath path;
        if (use_advisor && deps_.backend) {
            auto cc = deps_.config.advisor.client;
            cc.transcript = transcripts_dir_ / (job_id + ".jsonl");
            client = std::make_unique<advisor::AdvisorClient>(*deps_.backend, cc, deps_.clock);
            path.client = client.get();
            path.index = deps_.index.get();
            path.embedder = deps_.embedder.get();
        }
        auto result = derive(model, deps_.catalog, opts, path, [&](Stage s) { set_stage(job_id, s); });
        const auto pid = store_profile(result.profile);
        std::lock_guard lock(jobs_mutex_);
        auto& job = jobs_.at(job_id);
        job.profile_id = pid;
        job.state = Stage::Done;
    } catch (const Error& e) {
        std::lock_guard lock(jobs_mutex_);
        auto& job = jobs_.at(job_id);
        job.state = Stage::Failed;
        job.error = ordered_json::parse(problem(e).body);
    } catch (const std::exception& e) {
        std::lock_guard lock(jobs_mutex_);
        auto& job = jobs_.at(job_id);
        job.state = Stage::Failed;
        job.error = ordered_json::parse(problem(Error(ErrorCode::Internal, e.what())).body);
    }
}

HttpResponse Gateway::post_derive(const nlohmann::json& body) {
    for (auto it = body.begin(); it != body.end(); ++it) {
        if (it.key() != "passport" && it.key() != "thresholds" && it.key() != "advisor") {
            throw Error(ErrorCode::SchemaError, "unknown field '" + it.key() + "'");
        }
    }
    auto pit = body.find("passport");
    if (pit == body.end() || !pit->is_object()) throw Error(ErrorCode::SchemaError, "field 'passport' must be an object");
    auto model = passport::parse_passport(pit->dump());

    auto thresholds = deps_.config.thresholds;
    if (auto t = body.find("thresholds"); t != body.end()) {
        json_io::ObjectReader r(*t, "$.thresholds", ErrorCode::ConfigError);
        thresholds.relevance = r.optional_number("relevance").value_or(thresholds.relevance);
        thresholds.risk = r.optional_number("risk").value_or(thresholds.risk);
        thresholds.equivalence = r.optional_number("equivalence").value_or(thresholds.equivalence);
        thresholds.gap_coverage = r.optional_number("gap_coverage").value_or(thresholds.gap_coverage);
        r.finish();
        thresholds.validate();
    }
    bool use_advisor = true;
    if (auto a = body.find("advisor"); a != body.end()) {
        if (!a->is_boolean()) throw Error(ErrorCode::SchemaError, "field 'advisor' must be a boolean");
        use_advisor = a->get<bool>();
    }

    DeriveJob job;
    {
        std::lock_guard lock(jobs_mutex_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "j-%04d", ++job_counter_);
        job.job_id = buf;
    }
    job.inputs["passport_digest"] = passport::passport_digest(model);
    job.inputs["catalog_version"] = deps_.catalog.version();
    job.inputs["index_id"] = deps_.index ? deps_.index->embedder_name() + "/" + std::to_string(deps_.index->size())
                                         : std::string("none");
    job.inputs["backend"] = use_advisor && deps_.backend ? deps_.backend->name() : std::string("none");
    job.inputs["thresholds"] = thresholds_json(thresholds);
    const auto id = job.job_id;
    const auto snapshot = job_json(job);
    {
        std::lock_guard lock(jobs_mutex_);
        jobs_.emplace(id, std::move(job));
        queue_.push_back([this, id, model = std::move(model), thresholds, use_advisor] {
            run_job(id, model, thresholds, use_advisor);
        });
    }
    jobs_cv_.notify_one();
    return ok(snapshot, 202);
}

HttpResponse Gateway::get_job(const std::string& id) {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "no job " + id, {{"job_id", id}});
    return ok(job_json(it->second));
}

HttpResponse Gateway::get_profile(const std::string& id, bool report) {
    const auto p = load_profile(id);
    if (report) return {200, "text/markdown; charset=utf-8", decision::render_markdown(p, deps_.catalog)};
    return {200, "application/json", decision::serialize_profile(p)};
}

HttpResponse Gateway::post_session(const nlohmann::json& body) {
    const auto pid = body_string(body, "profile_id", true);
    const auto reviewer = body_string(body, "reviewer", true);
    // Profiles are opened one at a time so two sessions can never claim the same draft.
    static std::mutex open_mutex;
    std::lock_guard lock(open_mutex);
    auto profile = load_profile(pid);
    auto session = sessions_->open(profile, reviewer, pid);
    profile.status = decision::ProfileStatus::UnderReview;
    store_profile(profile, pid);
    return ok(review::to_json(session), 201);
}

HttpResponse Gateway::post_action(const std::string& sid, const std::string& cid, const nlohmann::json& body) {
    const auto action = review::parse_control_action(body_string(body, "action", true));
    auto reviewer = body_string(body, "reviewer", false);
    if (reviewer.empty()) reviewer = sessions_->snapshot(sid).reviewer;
    nlohmann::json payload = nlohmann::json::object();
    if (auto it = body.find("payload"); it != body.end() && !it->is_null()) payload = *it;
    return ok(review::to_json(sessions_->act(sid, cid, action, payload, reviewer)));
}

HttpResponse Gateway::post_approve(const std::string& sid, const nlohmann::json& body) {
    auto reviewer = body_string(body, "reviewer", false);
    const auto snap = sessions_->snapshot(sid);
    if (reviewer.empty()) reviewer = snap.reviewer;
    const auto profile = sessions_->approve(sid, reviewer);
    if (!snap.profile_id.empty()) store_profile(profile, snap.profile_id);
    return {200, "application/json", decision::serialize_profile(profile)};
}

HttpResponse Gateway::post_reopen(const std::string& sid, const nlohmann::json& body) {
    auto reviewer = body_string(body, "reviewer", false);
    if (reviewer.empty()) reviewer = sessions_->snapshot(sid).reviewer;
    const auto reason = body_string(body, "reason", false);
    const auto session = sessions_->reopen(sid, reviewer, reason, body_strings(body, "controls"));
    return ok(review::to_json(session), session.session_id == sid ? 200 : 201);
}

HttpResponse Gateway::route(const HttpRequest& req) {
    static const std::regex kJob(R"(/v1/jobs/([^/]+))");
    static const std::regex kProfile(R"(/v1/profiles/([^/]+))");
    static const std::regex kReport(R"(/v1/profiles/([^/]+)/report)");
    static const std::regex kSession(R"(/v1/sessions/([^/]+))");
    static const std::regex kAction(R"(/v1/sessions/([^/]+)/controls/([^/]+)/action)");
    static const std::regex kAcceptAll(R"(/v1/sessions/([^/]+)/accept-all)");
    static const std::regex kApprove(R"(/v1/sessions/([^/]+)/approve)");
    static const std::regex kReopen(R"(/v1/sessions/([^/]+)/reopen)");
    static const std::regex kControl(R"(/v1/catalog/controls/([^/]+))");
    static const std::regex kChunk(R"(/v1/evidence/chunks/([^/]+))");

    const auto& p = req.path;
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    std::smatch m;

    if (post && p == "/v1/derive") return post_derive(parse_body(req.body));
    if (get && std::regex_match(p, m, kJob)) return get_job(m[1]);
    if (get && std::regex_match(p, m, kReport)) return get_profile(m[1], true);
    if (get && std::regex_match(p, m, kProfile)) return get_profile(m[1], false);
    if (post && p == "/v1/sessions") return post_session(parse_body(req.body));
    if (get && p == "/v1/sessions") return ok(sessions_->list());
    if (get && std::regex_match(p, m, kSession)) return ok(review::to_json(sessions_->snapshot(m[1])));
    if (post && std::regex_match(p, m, kAction)) return post_action(m[1], m[2], parse_body(req.body));
    if (post && std::regex_match(p, m, kAcceptAll)) {
        const auto body = parse_body(req.body);
        auto reviewer = body_string(body, "reviewer", false);
        if (reviewer.empty()) reviewer = sessions_->snapshot(m[1]).reviewer;
        return ok(review::to_json(sessions_->accept_all(m[1], reviewer)));
    }
    if (post && std::regex_match(p, m, kApprove)) return post_approve(m[1], parse_body(req.body));
    if (post && std::regex_match(p, m, kReopen)) return post_reopen(m[1], parse_body(req.body));
    if (get && p == "/v1/catalog") return ok(catalog::to_json(deps_.catalog));
    if (get && std::regex_match(p, m, kControl)) return ok(catalog::to_json(deps_.catalog.get_control(m[1].str())));
    if (get && std::regex_match(p, m, kChunk)) {
        const std::string id = m[1];
        auto c = deps_.index ? deps_.index->find(id) : std::nullopt;
        if (!c) throw Error(ErrorCode::UnknownChunk, "no chunk " + id, {{"chunk_id", id}});
        return ok(rag::to_json(*c));
    }
    throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + p, {{"path", p}});
}

HttpResponse Gateway::handle(const HttpRequest& req) {
    try {
        if (!bearer_token_.empty()) {
            auto it = req.headers.find("authorization");
            if (it == req.headers.end() || it->second != "Bearer " + bearer_token_) {
                throw Error(ErrorCode::Unauthorized, "missing or invalid bearer token");
            }
        }
        return route(req);
    } catch (const Error& e) {
        return problem(e);
    } catch (const std::exception& e) {
        return problem(Error(ErrorCode::Internal, e.what()));
    }
}

} // namespace tsp::gateway
