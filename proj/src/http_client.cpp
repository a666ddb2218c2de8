#include "tsp/http_client.hpp"

#include <atomic>

#include "httplib.h"
#include "tsp/error.hpp"

namespace tsp::http {

namespace {
std::atomic<std::uint64_t> g_attempts{0};
}

std::uint64_t network_attempts() noexcept { return g_attempts.load(); }

Response post_json(const Request& request) {
    httplib::Client client(request.base_url);
    if (!client.is_valid()) {
        throw Error(ErrorCode::ConfigError, "invalid backend URL '" + request.base_url + "'");
    }
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    g_attempts.fetch_add(1);
    auto res = client.Post(request.path, headers, request.body, "application/json");
    if (!res) {
        const auto err = res.error();
        const auto msg = "request to " + request.base_url + request.path + " failed: " + httplib::to_string(err);
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            throw Error(ErrorCode::Timeout, msg);
        }
        throw Error(ErrorCode::BackendUnavailable, msg);
    }
    return {res->status, res->body};
}

} // namespace tsp::http
