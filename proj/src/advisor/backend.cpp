#include "tsp/advisor/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tsp/error.hpp"
#include "tsp/http_client.hpp"

namespace tsp::advisor {

ScriptedBackend::ScriptedBackend(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
        throw Error(ErrorCode::ConfigError, "scripted fixture directory " + dir_.string() + " does not exist");
    }
}

std::string ScriptedBackend::complete(const rag::PromptBundle& prompt) {
    for (const auto& name : {prompt.digest + ".txt", "control-" + prompt.control_id + ".txt"}) {
        const auto path = dir_ / name;
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    throw Error(ErrorCode::BackendUnavailable, "no scripted response for " + prompt.control_id,
                {{"transient", false}, {"control_id", prompt.control_id}, {"prompt_digest", prompt.digest}});
}

RemoteChatBackend::RemoteChatBackend(RemoteChatConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.model.empty()) {
        throw Error(ErrorCode::ConfigError, "remote backend needs base_url and model");
    }
    if (config_.credential_env.empty()) {
        throw Error(ErrorCode::ConfigError, "remote backend needs credential_env naming the API key variable");
    }
    const char* key = std::getenv(config_.credential_env.c_str());
    if (!key || !*key) {
        throw Error(ErrorCode::ConfigError,
                    "environment variable " + config_.credential_env + " holding the backend credential is not set",
                    {{"credential_env", config_.credential_env}});
    }
    credential_ = key;
}

std::string RemoteChatBackend::complete(const rag::PromptBundle& prompt) {
    http::Request req;
    req.base_url = config_.base_url;
    req.path = "/v1/chat/completions";
    req.timeout = config_.timeout;
    req.headers.emplace_back("Authorization", "Bearer " + credential_);
    req.body = nlohmann::json{{"model", config_.model},
                              {"temperature", 0},
                              {"messages", {{{"role", "user"}, {"content", prompt.text}}}}}
                   .dump();
    const auto res = http::post_json(req);
    if (res.status != 200) {
        const bool transient = res.status >= 500 || res.status == 429;
        throw Error(ErrorCode::BackendUnavailable, "chat backend returned HTTP " + std::to_string(res.status),
                    {{"transient", transient}, {"status", res.status}});
    }
    try {
        const auto j = nlohmann::json::parse(res.body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("malformed chat response: ") + e.what(),
                    {{"transient", false}});
    }
}

} // namespace tsp::advisor
