#pragma once

// Validation of candidate CQs against design CQs by sentence-embedding cosine
// similarity. The offline backend is a hashed bag-of-words vector; an HTTP
// embedding service can be plugged in instead.

#include "retrofit/filtration.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

enum class EmbeddingBackend { lexical_fallback, http_embedding };

std::string_view to_string(EmbeddingBackend b);
std::optional<EmbeddingBackend> parse_embedding_backend(std::string_view s);

/// Slack on the threshold comparison that absorbs float rounding of unit-vector
/// dot products (a vector with itself may come out one ulp below 1).
inline constexpr double kSimilarityTolerance = 1e-6;

struct MatcherConfig {
    EmbeddingBackend backend = EmbeddingBackend::lexical_fallback;
    double similarity_threshold = 0.70;
    std::string endpoint_url;
    /// Feature-hashing width of the lexical backend.
    std::size_t dimension = 512;
    std::chrono::milliseconds request_timeout{30'000};
    std::size_t batch_size = 256;

    void validate() const;
};

struct EmbeddingVector {
    std::vector<float> components;

    [[nodiscard]] std::size_t dimension() const noexcept { return components.size(); }
};

/// Lowercased alphanumeric tokens with the stop words removed.
std::vector<std::string> lexical_tokens(std::string_view text);
/// Feature-hashing bucket of a token.
std::size_t feature_bucket(std::string_view token, std::size_t dimension);

EmbeddingVector embed(std::string_view text, const MatcherConfig &cfg);
/// Embeds a batch; the HTTP backend sends one request per `batch_size` texts.
std::vector<EmbeddingVector> embed_all(std::span<const std::string> texts, const MatcherConfig &cfg);

/// Dot product of two unit vectors; throws EmbeddingError on dimension mismatch.
double similarity(const EmbeddingVector &a, const EmbeddingVector &b);

struct DesignCQSet {
    std::vector<std::string> questions;
    std::string source_path;

    /// Plain text (one question per line) or CSV with a "Questions" header.
    static DesignCQSet load(const std::string &path);
    static DesignCQSet parse(std::string_view text, std::string source_path = {});
};

struct CandidateMatch {
    std::optional<std::size_t> best_design;
    double similarity = 0.0;
    bool validated = false;
};

struct DesignCoverage {
    std::optional<std::size_t> best_candidate;
    double similarity = 0.0;
    bool matched = false;
};

struct MatchReport {
    std::vector<CandidateMatch> candidate_matches;
    std::vector<DesignCoverage> design_coverage;
    double threshold = 0.0;
    std::string backend;

    [[nodiscard]] std::size_t validated_count() const;
    [[nodiscard]] std::size_t matched_count() const;
    [[nodiscard]] std::vector<std::size_t> unmatched_design() const;
};

/// Full candidate x design similarity matrix (row-major, candidates as rows).
std::vector<float> similarity_matrix(std::span<const std::string> candidates, std::span<const std::string> design,
                                     const MatcherConfig &cfg);

/// Many-to-one matching: a candidate is validated when its best similarity reaches
/// the threshold, a design CQ is matched when its best similarity does.
MatchReport match_candidates(std::span<const std::string> candidates, const DesignCQSet &design,
                             const MatcherConfig &cfg);
MatchReport match_candidates(std::span<const CandidateCQ> candidates, const DesignCQSet &design,
                             const MatcherConfig &cfg);

/// Flags from an already computed matrix; exposed so tests can feed an independent one.
MatchReport report_from_matrix(std::span<const float> matrix, std::size_t n_candidates, std::size_t n_design,
                               double threshold, std::string backend);

}  // namespace retrofit
