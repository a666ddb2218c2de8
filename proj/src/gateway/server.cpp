#include <algorithm>
#include <cctype>
#include <iostream>

#include "httplib.h"
#include "tsp/gateway/service.hpp"

namespace tsp::gateway {

namespace {

HttpRequest convert(const httplib::Request& req) {
    HttpRequest out;
    out.method = req.method;
    out.path = req.path;
    out.body = req.body;
    for (const auto& [name, value] : req.headers) {
        std::string lower = name;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        out.headers[lower] = value;
    }
    return out;
}

} // namespace

void serve(Gateway& gateway) {
    const auto& cfg = gateway.config().server;
    httplib::Server server;
    if (!cfg.static_dir.empty() && !server.set_mount_point("/", cfg.static_dir.string())) {
        throw Error(ErrorCode::ConfigError, "static_dir " + cfg.static_dir.string() + " is not a directory");
    }
    auto forward = [&gateway](const httplib::Request& req, httplib::Response& res) {
        const auto r = gateway.handle(convert(req));
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    // Static files take precedence only outside the API prefix.
    server.Get(R"(/v1/.*)", forward);
    server.Post(R"(/v1/.*)", forward);
    if (!server.bind_to_port(cfg.host, cfg.port)) {
        throw Error(ErrorCode::IoError, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    }
    std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
    server.listen_after_bind();
}

} // namespace tsp::gateway
