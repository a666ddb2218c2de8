#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tsp/advisor/backend.hpp"
#include "tsp/catalog.hpp"
#include "tsp/error.hpp"
#include "tsp/gateway/config.hpp"
#include "tsp/gateway/pipeline.hpp"
#include "tsp/rag/index.hpp"
#include "tsp/review/store.hpp"

namespace tsp::gateway {

struct HttpRequest {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> headers; ///< lowercase names
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// HTTP status used for each error code in problem-detail responses.
int http_status(ErrorCode code) noexcept;

/// Problem-detail body: {type, title, status, detail, code, details}.
HttpResponse problem(const Error& e);

struct DeriveJob {
    std::string job_id;
    Stage state = Stage::Queued;
    nlohmann::ordered_json inputs;
    std::string profile_id;
    std::optional<nlohmann::ordered_json> error;
};

/// The API behind the HTTP server, callable without a socket. Derive jobs run on a
/// bounded worker pool; every other request is handled synchronously.
class Gateway {
public:
    using Clock = std::function<std::string()>;

    struct Deps {
        Config config;
        catalog::Catalog catalog;
        std::unique_ptr<rag::VectorIndex> index;     ///< may be null
        std::unique_ptr<rag::Embedder> embedder;     ///< may be null
        std::unique_ptr<advisor::Backend> backend;   ///< null disables the advisor
        Clock clock;
    };

    explicit Gateway(Deps deps);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    HttpResponse handle(const HttpRequest& request);

    /// Blocks until no derive job is queued or running.
    void wait_idle();

    const Config& config() const noexcept { return deps_.config; }

private:
    HttpResponse route(const HttpRequest& request);
    HttpResponse post_derive(const nlohmann::json& body);
    HttpResponse get_job(const std::string& id);
    HttpResponse get_profile(const std::string& id, bool report);
    HttpResponse post_session(const nlohmann::json& body);
    HttpResponse post_action(const std::string& sid, const std::string& cid, const nlohmann::json& body);
    HttpResponse post_approve(const std::string& sid, const nlohmann::json& body);
    HttpResponse post_reopen(const std::string& sid, const nlohmann::json& body);

    void worker_loop();
    void run_job(const std::string& job_id, passport::SystemModel model, matrix::Thresholds thresholds,
                 bool use_advisor);
    void set_stage(const std::string& job_id, Stage s);

    std::string store_profile(const decision::TargetProfile& p, const std::string& id = {});
    decision::TargetProfile load_profile(const std::string& id);

    Deps deps_;
    std::string bearer_token_;
    std::filesystem::path profiles_dir_;
    std::filesystem::path transcripts_dir_;
    std::unique_ptr<review::SessionStore> sessions_;

    std::mutex profiles_mutex_;
    int profile_counter_ = 0;

    std::mutex jobs_mutex_;
    std::condition_variable jobs_cv_;
    std::condition_variable idle_cv_;
    std::map<std::string, DeriveJob> jobs_;
    std::deque<std::function<void()>> queue_;
    std::size_t running_ = 0;
    int job_counter_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

/// Serves `gateway` over HTTP until the process is stopped. Static files from
/// config.server.static_dir, when set, are mounted at "/".
void serve(Gateway& gateway);

} // namespace tsp::gateway
