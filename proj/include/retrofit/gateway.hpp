#pragma once

// Chat-completion dispatch: provider configs, a content-addressed response cache,
// the deterministic mock provider, and question extraction from raw responses.

#include "retrofit/ontology.hpp"
#include "retrofit/prompts.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

inline constexpr std::string_view kMockProvider = "mock";

enum class ProviderKind { chat_http, mock };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::chat_http;
    std::string provider_id;
    std::string model_name;
    /// Chat-completion endpoint; empty for the mock provider.
    std::string endpoint_url;
    int max_tokens = 4096;
    /// Unset means "provider default".
    std::optional<double> temperature;
    std::chrono::milliseconds request_timeout{60'000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    /// Credential variable; defaults to RETROFIT_API_KEY_<PROVIDER_ID>.
    std::string api_key_env;
    /// Mock provider seed.
    std::uint64_t seed = 0;

    [[nodiscard]] bool is_mock() const noexcept { return kind == ProviderKind::mock; }
    [[nodiscard]] std::string credential_variable() const;
    /// Throws ConfigError when an invariant does not hold.
    void validate() const;

    /// Known model presets: gpt-3.5-turbo (4096 tokens), gpt-4 (8192), Llama-2-70b-chat (4096).
    static ProviderConfig preset(std::string_view model_name);
    static ProviderConfig mock(std::uint64_t seed, std::string model_name = "mock", std::string provider_id = "mock");
};

struct RawResponse {
    std::string prompt_digest;
    std::string provider_id;
    std::string model_name;
    std::string text;
    bool from_cache = false;
    std::optional<std::int64_t> latency_ms;
    /// Provider reported the max-token ceiling was hit.
    bool truncated = false;
};

struct GenerationRecord {
    std::size_t statement_ordinal = 0;
    std::string template_id;
    std::string provider_id;
    std::vector<std::string> questions;
    bool from_cache = false;
    bool truncated = false;
};

/// Hex SHA-256 over (model name, rendered prompt).
std::string prompt_digest(std::string_view model_name, std::string_view prompt);

/// Content-addressed response store: one JSON file per digest. Concurrent readers,
/// serialized writers; entries are written atomically.
class ResponseCache {
public:
    struct Entry {
        std::string model_name;
        std::string text;
        bool truncated = false;
    };

    explicit ResponseCache(std::filesystem::path directory);

    [[nodiscard]] std::optional<Entry> load(const std::string &digest) const;
    void store(const std::string &digest, const Entry &entry);
    [[nodiscard]] const std::filesystem::path &directory() const noexcept { return directory_; }

private:
    [[nodiscard]] std::filesystem::path path_for(const std::string &digest) const;

    std::filesystem::path directory_;
    mutable std::shared_mutex mutex_;
};

/// Numbered list of 2-5 questions built from fixed frames over the statement
/// labels; count and frames are drawn from a PRNG seeded by (seed, ordinal, template).
std::string mock_generate(const Statement &s, std::string_view template_id, std::uint64_t seed);

/// Splits a response into cleaned single questions: enumeration markers, quotes and
/// preambles are dropped, text after the first '?' is discarded, whitespace collapsed.
std::vector<std::string> extract_questions(std::string_view text);
std::vector<std::string> extract_questions(const RawResponse &response);

/// One chat-completion round trip over HTTP with retry/backoff. Exposed for tests.
RawResponse http_complete(const PromptInstance &prompt, const ProviderConfig &cfg);

class Gateway {
public:
    /// Without a cache directory every request goes to the provider.
    explicit Gateway(std::optional<std::filesystem::path> cache_dir = std::nullopt);

    RawResponse complete(const PromptInstance &prompt, const ProviderConfig &cfg);

    /// Requests that reached a provider (cache misses).
    [[nodiscard]] std::size_t provider_calls() const noexcept { return provider_calls_.load(); }
    [[nodiscard]] std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
    std::optional<ResponseCache> cache_;
    std::atomic<std::size_t> provider_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

struct CellFailure {
    std::string template_id;
    std::string provider_id;
    std::string message;
};

struct GenerationResult {
    /// Ordered by (statement ordinal, template order, provider order).
    std::vector<GenerationRecord> records;
    std::vector<CellFailure> failures;
};

/// Renders and dispatches every (statement, template, provider) prompt with up to
/// `parallelism` requests in flight. A failing request fails its whole
/// (template, provider) cell; other cells still complete.
GenerationResult generate_all(std::span<const Statement> statements, std::span<const PromptTemplate> templates,
                              std::span<const ProviderConfig> providers, Gateway &gateway,
                              std::size_t parallelism = 4);

}  // namespace retrofit
