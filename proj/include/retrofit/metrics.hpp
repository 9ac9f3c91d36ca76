#pragma once

// Evaluation numbers: precision/recall/F1 over a match report, questions per
// triple, unmatched design-CQ statistics, label-based precision and the
// grounding / aggregation heuristics used to explain misses.

#include "retrofit/filtration.hpp"
#include "retrofit/matcher.hpp"
#include "retrofit/ontology.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace retrofit {

struct EvalMetrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t n_questions = 0;
    std::size_t n_triples = 0;
    double mean_q_per_triple = 0.0;
    std::size_t n_candidates = 0;
    std::size_t n_design = 0;
    /// Set when the denominator was zero and the value was defaulted to 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
};

/// Formula core shared by compute_metrics and the counts-fixture mode.
EvalMetrics metrics_from_counts(std::size_t n_candidates, std::size_t n_validated, std::size_t n_unmatched,
                                std::size_t n_design, std::size_t n_questions, std::size_t n_triples);
EvalMetrics compute_metrics(const MatchReport &report, std::size_t n_questions, std::size_t n_triples);

double mean_questions_per_triple(std::size_t n_questions, std::size_t n_triples);

/// Half-up rounding at a number of decimals (ties away from zero).
double round_half_up(double value, int decimals);

std::size_t word_count(std::string_view question);

struct StatsRow {
    std::size_t n_unmatched = 0;
    std::optional<double> pct_unmatched;
    std::optional<double> mean;
    std::optional<double> std;
    std::optional<double> min;
    std::optional<double> p25;
    std::optional<double> p50;
    std::optional<double> max;
};

/// Linear-interpolation percentile at index p*(n-1) of sorted values.
double percentile(std::span<const double> sorted, double p);

StatsRow unmatched_stats(std::span<const std::size_t> word_counts, std::size_t n_design);

using Vocabulary = std::unordered_set<std::string>;

/// Lowercased label tokens split on underscores, hyphens, spaces and camelCase,
/// with simple plural folding.
Vocabulary build_vocabulary(const StatementSet &statements);
void add_to_vocabulary(Vocabulary &vocabulary, std::string_view label);

struct GroundingResult {
    std::string cq_text;
    std::vector<std::string> ungrounded_terms;
    bool grounded = true;
};

GroundingResult grounding_check(std::string_view cq, const Vocabulary &vocabulary);

enum class UnmatchedCategory { aggregation, ungrounded };
std::string_view to_string(UnmatchedCategory c);

bool is_aggregation_question(std::string_view cq);
std::set<UnmatchedCategory> categorize_unmatched(std::string_view cq, const Vocabulary &vocabulary);

enum class Verdict { valid, invalid, hindsight_valid };
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct ValidationLabels {
    std::map<std::string, Verdict> entries;

    /// CSV with header `question,verdict`; a repeated question is an error.
    static ValidationLabels parse(std::string_view csv_text);
    static ValidationLabels load(const std::string &path);
};

/// Share of candidates labelled valid or hindsight_valid. Removed candidates are ignored.
double precision_from_labels(std::span<const CandidateCQ> candidates, const ValidationLabels &labels);
double precision_from_labels(std::span<const std::string> candidates, const ValidationLabels &labels);

}  // namespace retrofit
