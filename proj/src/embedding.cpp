#include "http_util.hpp"
#include "retrofit/error.hpp"
#include "retrofit/kernels.hpp"
#include "retrofit/matcher.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace retrofit {
namespace {

constexpr std::array<std::string_view, 22> kStopWords{
    "a", "an", "and", "are", "as", "at", "be", "by", "do", "does", "for",
    "in", "is", "it", "of", "on", "or", "that", "the", "to", "was", "with",
};

bool is_stop_word(std::string_view token) {
    return std::find(kStopWords.begin(), kStopWords.end(), token) != kStopWords.end();
}

void normalize_in_place(std::vector<float> &v, std::string_view what) {
    const double norm = std::sqrt(static_cast<double>(kernels::squared_norm(v)));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw EmbeddingError(fmt::format("cannot normalize a zero or non-finite vector for {}", what));
    }
    kernels::scale(v, static_cast<float>(1.0 / norm));
}

EmbeddingVector lexical_embed(std::string_view text, std::size_t dimension) {
    const auto tokens = lexical_tokens(text);
    if (tokens.empty()) {
        throw EmbeddingError(fmt::format("no content tokens in '{}'", text));
    }
    EmbeddingVector v;
    v.components.assign(dimension, 0.0f);
    for (const auto &t : tokens) {
        v.components[feature_bucket(t, dimension)] += 1.0f;
    }
    normalize_in_place(v.components, text);
    return v;
}

std::vector<EmbeddingVector> http_embed(std::span<const std::string> texts, const MatcherConfig &cfg) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += cfg.batch_size) {
        const auto batch = texts.subspan(start, std::min(cfg.batch_size, texts.size() - start));
        const nlohmann::json request = {{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
        const auto reply = detail::post_json(cfg.endpoint_url, request.dump(), {}, cfg.request_timeout);
        if (reply.status != 200) {
            throw EmbeddingError(fmt::format("embedding endpoint returned HTTP {}", reply.status));
        }
        const auto doc = nlohmann::json::parse(reply.body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("vectors") || !doc["vectors"].is_array() ||
            doc["vectors"].size() != batch.size()) {
            throw EmbeddingError("embedding endpoint response lacks one vector per text");
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            EmbeddingVector v;
            try {
                v.components = doc["vectors"][i].get<std::vector<float>>();
            } catch (const nlohmann::json::exception &) {
                throw EmbeddingError("embedding endpoint returned a non-numeric vector");
            }
            if (!out.empty() && v.dimension() != out.front().dimension()) {
                throw EmbeddingError("embedding endpoint returned vectors of differing dimension");
            }
            normalize_in_place(v.components, batch[i]);
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(EmbeddingBackend b) {
    return b == EmbeddingBackend::lexical_fallback ? "lexical_fallback" : "http_embedding";
}

std::optional<EmbeddingBackend> parse_embedding_backend(std::string_view s) {
    if (s == "lexical_fallback" || s == "lexical") return EmbeddingBackend::lexical_fallback;
    if (s == "http_embedding" || s == "http") return EmbeddingBackend::http_embedding;
    return std::nullopt;
}

void MatcherConfig::validate() const {
    if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
        throw ConfigError(fmt::format("similarity threshold {} is outside [0, 1]", similarity_threshold));
    }
    if (backend == EmbeddingBackend::http_embedding && endpoint_url.empty()) {
        throw ConfigError("http_embedding backend needs an endpoint URL");
    }
    if (dimension == 0 || batch_size == 0) {
        throw ConfigError("embedding dimension and batch size must be positive");
    }
}

std::vector<std::string> lexical_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty() && !is_stop_word(current)) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (const char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::size_t feature_bucket(std::string_view token, std::size_t dimension) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : token) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return static_cast<std::size_t>(h % dimension);
}

EmbeddingVector embed(std::string_view text, const MatcherConfig &cfg) {
    if (text.empty()) {
        throw EmbeddingError("cannot embed empty text");
    }
    if (cfg.backend == EmbeddingBackend::lexical_fallback) {
        return lexical_embed(text, cfg.dimension);
    }
    const std::string owned(text);
    return http_embed(std::span<const std::string>(&owned, 1), cfg).front();
}

std::vector<EmbeddingVector> embed_all(std::span<const std::string> texts, const MatcherConfig &cfg) {
    if (cfg.backend == EmbeddingBackend::http_embedding) {
        return http_embed(texts, cfg);
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto &t : texts) {
        out.push_back(embed(t, cfg));
    }
    return out;
}

double similarity(const EmbeddingVector &a, const EmbeddingVector &b) {
    if (a.dimension() != b.dimension()) {
        throw EmbeddingError(fmt::format("dimension mismatch: {} vs {}", a.dimension(), b.dimension()));
    }
    return kernels::dot(a.components, b.components);
}

}  // namespace retrofit
