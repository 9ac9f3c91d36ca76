#include "http_util.hpp"
#include "retrofit/error.hpp"
#include "retrofit/gateway.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

namespace retrofit {
namespace detail {

Endpoint split_url(const std::string &url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError(fmt::format("endpoint URL '{}' has no scheme", url));
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError(fmt::format("endpoint URL '{}' must use http or https", url));
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpReply post_json(const std::string &url, const std::string &body,
                    const std::vector<std::pair<std::string, std::string>> &headers,
                    std::chrono::milliseconds timeout) {
    const auto endpoint = split_url(url);
    httplib::Client client(endpoint.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto &[k, v] : headers) {
        h.emplace(k, v);
    }
    auto res = client.Post(endpoint.path, h, body, "application/json");
    if (!res) {
        const auto err = res.error();
        const auto what = httplib::to_string(err);
        if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
            throw TimeoutError(fmt::format("request to {} timed out or stalled ({})", url, what));
        }
        throw ProviderError(fmt::format("request to {} failed: {}", url, what));
    }
    return {res->status, res->body};
}

}  // namespace detail

namespace {

struct Attempt {
    std::string text;
    bool truncated = false;
};

// Returns the reply or throws; `retryable` is set for errors worth another try.
Attempt attempt_once(const ProviderConfig &cfg, const std::string &body, const std::string &key, bool &retryable) {
    retryable = false;
    std::vector<std::pair<std::string, std::string>> headers;
    if (!key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + key);
    }
    detail::HttpReply reply;
    try {
        reply = detail::post_json(cfg.endpoint_url, body, headers, cfg.request_timeout);
    } catch (const TimeoutError &) {
        retryable = true;
        throw;
    } catch (const ProviderError &) {
        retryable = true;
        throw;
    }
    if (reply.status == 401 || reply.status == 403) {
        throw AuthError(fmt::format("provider '{}' rejected the credential (HTTP {})", cfg.provider_id, reply.status));
    }
    if (reply.status == 429) {
        retryable = true;
        throw RateLimitError(fmt::format("provider '{}' is rate limiting (HTTP 429)", cfg.provider_id));
    }
    if (reply.status >= 500) {
        retryable = true;
        throw ProviderError(fmt::format("provider '{}' returned HTTP {}", cfg.provider_id, reply.status));
    }
    if (reply.status != 200) {
        throw ProviderError(fmt::format("provider '{}' returned HTTP {}: {}", cfg.provider_id, reply.status,
                                        reply.body.substr(0, 200)));
    }
    const auto doc = nlohmann::json::parse(reply.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty()) {
        throw MalformedResponseError(fmt::format("provider '{}' sent a response without choices", cfg.provider_id));
    }
    const auto &choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw MalformedResponseError(
            fmt::format("provider '{}' sent a choice without message content", cfg.provider_id));
    }
    Attempt out;
    out.text = choice["message"]["content"].get<std::string>();
    out.truncated = choice.contains("finish_reason") && choice["finish_reason"] == "length";
    return out;
}

}  // namespace

RawResponse http_complete(const PromptInstance &prompt, const ProviderConfig &cfg) {
    if (cfg.endpoint_url.empty()) {
        throw ConfigError(fmt::format("provider '{}' has no endpoint_url", cfg.provider_id));
    }
    const auto var = cfg.credential_variable();
    const char *key = std::getenv(var.c_str());
    if (key == nullptr || *key == '\0') {
        throw AuthError(fmt::format("missing credential: set {} for provider '{}'", var, cfg.provider_id));
    }

    nlohmann::json request = {
        {"model", cfg.model_name},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.rendered}}})},
        {"max_tokens", cfg.max_tokens},
    };
    if (cfg.temperature) {
        request["temperature"] = *cfg.temperature;
    }
    const auto body = request.dump();

    const auto started = std::chrono::steady_clock::now();
    auto backoff = cfg.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        bool retryable = false;
        try {
            const auto result = attempt_once(cfg, body, key, retryable);
            RawResponse r;
            r.prompt_digest = prompt_digest(cfg.model_name, prompt.rendered);
            r.provider_id = cfg.provider_id;
            r.model_name = cfg.model_name;
            r.text = result.text;
            r.truncated = result.truncated;
            r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
            return r;
        } catch (const ProviderError &) {
            if (!retryable || attempt >= cfg.max_retries) {
                throw;
            }
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

}  // namespace retrofit
