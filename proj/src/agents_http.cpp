#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "accelforge/agents.hpp"
#include "accelforge/errors.hpp"

namespace accelforge {

namespace {

// Splits a completions URL into the httplib base (scheme://host:port) and
// the request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    const std::size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path), url.substr(path)};
}

}  // namespace

HttpChatClient::HttpChatClient(std::string url, std::string api_key)
    : api_key_(std::move(api_key)) {
    auto [base, path] = split_url(url);
    base_ = std::move(base);
    path_ = std::move(path);
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
    httplib::Client client(base_);
    const auto timeout = std::chrono::milliseconds(
        static_cast<long long>(std::max(1.0, request.timeout_s * 1000.0)));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    json messages = json::array();
    if (!request.system.empty()) {
        messages.push_back(json{{"role", "system"}, {"content", request.system}});
    }
    messages.push_back(json{{"role", "user"}, {"content", request.user}});
    const json body{{"model", request.model},
                    {"messages", std::move(messages)},
                    {"temperature", request.temperature},
                    {"max_tokens", request.max_tokens}};

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw AgentUnavailable("chat endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw AgentUnavailable("chat endpoint returned status " + std::to_string(res->status));
    }

    ChatResponse out;
    try {
        const json reply = json::parse(res->body);
        out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage")) {
            const json& usage = reply["usage"];
            out.input_tokens = usage.value("prompt_tokens", 0ULL);
            out.output_tokens = usage.value("completion_tokens", 0ULL);
        }
    } catch (const json::exception& e) {
        throw AgentUnavailable(std::string("malformed chat response: ") + e.what());
    }
    return out;
}

ChatResponse complete_with_retries(ChatClient& client, const ChatRequest& request,
                                   const RetryPolicy& policy, std::uint64_t seed) {
    Rng rng(seed_mix({seed, 0x8E7121ULL}));
    for (int attempt = 0;; ++attempt) {
        try {
            return client.complete(request);
        } catch (const AgentUnavailable&) {
            if (attempt >= policy.retries) throw;
            const double scale = std::pow(2.0, attempt);
            const auto jitter = static_cast<long long>(rng.below(
                static_cast<std::uint64_t>(std::max(1, policy.backoff_ms))));
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long long>(policy.backoff_ms * scale) + jitter));
        }
    }
}

}  // namespace accelforge
