#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tsp::http {

struct Request {
    std::string base_url; ///< scheme://host[:port]
    std::string path;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
    std::chrono::milliseconds timeout{30000};
};

struct Response {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body. Transport failures throw Error(Timeout) or Error(BackendUnavailable);
/// HTTP error statuses are returned, not thrown.
Response post_json(const Request& request);

/// Outbound connection attempts made by this process so far.
std::uint64_t network_attempts() noexcept;

} // namespace tsp::http
