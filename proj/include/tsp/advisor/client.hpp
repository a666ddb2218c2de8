#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tsp/advisor/backend.hpp"
#include "tsp/error.hpp"

namespace tsp::advisor {

struct ClientConfig {
    /// Cap on logical requests; 0 disables the cap.
    int max_requests = 0;
    /// Retries after the first attempt for transient failures.
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::size_t parallelism = 4;
    /// Append-only JSONL transcript; empty disables it.
    std::filesystem::path transcript;
};

using Clock = std::function<std::string()>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Result of one logical request: a response or the final error.
struct Outcome {
    std::optional<std::string> response;
    std::optional<ErrorCode> error;
    std::string error_message;
};

/// Budgeted, retrying front end over a Backend. Safe to call from several threads.
class AdvisorClient {
public:
    AdvisorClient(Backend& backend, ClientConfig config, Clock clock, Sleeper sleeper = {});

    /// Throws Error(BudgetExceeded) before touching the backend once the cap is reached;
    /// otherwise the backend's final error after retries.
    std::string request_draft(const rag::PromptBundle& prompt);

    /// Runs request_draft over all prompts with bounded parallelism; outcomes keep input order.
    std::vector<Outcome> request_all(const std::vector<rag::PromptBundle>& prompts);

    int requests_made() const;
    const std::string& backend_name() const noexcept { return backend_name_; }

private:
    void log(const rag::PromptBundle& prompt, int attempt, const std::string& status, const std::string& body);

    Backend& backend_;
    std::string backend_name_;
    ClientConfig config_;
    Clock clock_;
    Sleeper sleeper_;
    mutable std::mutex mutex_;
    int requests_ = 0;
};

/// Backoff before retry number `retry` (1-based): initial * 2^(retry-1).
std::chrono::milliseconds backoff_delay(std::chrono::milliseconds initial, int retry);

} // namespace tsp::advisor
