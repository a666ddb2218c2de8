#include "tsp/advisor/client.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace tsp::advisor {

namespace {

bool transient(const Error& e) {
    if (e.code() == ErrorCode::Timeout) return true;
    if (e.code() != ErrorCode::BackendUnavailable) return false;
    return e.details().value("transient", true);
}

} // namespace

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds initial, int retry) {
    return initial * (1LL << std::clamp(retry - 1, 0, 20));
}

AdvisorClient::AdvisorClient(Backend& backend, ClientConfig config, Clock clock, Sleeper sleeper)
    : backend_(backend),
      backend_name_(backend.name()),
      config_(std::move(config)),
      clock_(std::move(clock)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })) {
    if (config_.max_retries < 0 || config_.parallelism == 0) {
        throw Error(ErrorCode::ConfigError, "max_retries must be >= 0 and parallelism >= 1");
    }
}

int AdvisorClient::requests_made() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

void AdvisorClient::log(const rag::PromptBundle& prompt, int attempt, const std::string& status,
                        const std::string& body) {
    if (config_.transcript.empty()) return;
    nlohmann::ordered_json j;
    j["timestamp"] = clock_();
    j["backend"] = backend_name_;
    j["control_id"] = prompt.control_id;
    j["prompt_digest"] = prompt.digest;
    j["attempt"] = attempt;
    j["status"] = status;
    j[status == "ok" ? "response" : "error"] = body;
    const auto line = j.dump() + "\n";
    std::lock_guard lock(mutex_);
    std::ofstream out(config_.transcript, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot append to transcript " + config_.transcript.string());
    out << line;
}

std::string AdvisorClient::request_draft(const rag::PromptBundle& prompt) {
    {
        std::lock_guard lock(mutex_);
        if (config_.max_requests > 0 && requests_ >= config_.max_requests) {
            throw Error(ErrorCode::BudgetExceeded, "advisor request budget exhausted",
                        {{"max_requests", config_.max_requests}});
        }
        ++requests_;
    }
    for (int attempt = 1;; ++attempt) {
        try {
            auto text = backend_.complete(prompt);
            log(prompt, attempt, "ok", text);
            return text;
        } catch (const Error& e) {
            log(prompt, attempt, std::string(to_string(e.code())), e.what());
            if (!transient(e) || attempt > config_.max_retries) throw;
            sleeper_(backoff_delay(config_.initial_backoff, attempt));
        }
    }
}

std::vector<Outcome> AdvisorClient::request_all(const std::vector<rag::PromptBundle>& prompts) {
    std::vector<Outcome> out(prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < prompts.size(); i = next++) {
            try {
                out[i].response = request_draft(prompts[i]);
            } catch (const Error& e) {
                out[i].error = e.code();
                out[i].error_message = e.what();
            }
        }
    };
    const auto n = std::min(config_.parallelism, std::max<std::size_t>(prompts.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return out;
}

} // namespace tsp::advisor
