#include "retrofit/metrics.hpp"

#include "retrofit/csv.hpp"
#include "retrofit/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <regex>

namespace retrofit {
namespace {

constexpr std::string_view kGroundingStopWords[] = {
    "a",     "about", "all",   "an",    "and",   "any",   "are",   "as",    "at",    "be",    "by",
    "can",   "could", "did",   "do",    "does",  "each",  "every", "exist", "exists", "for",  "from",
    "has",   "have",  "how",   "i",     "if",    "in",    "into",  "is",    "it",    "its",   "kind",
    "kinds", "list",  "many",  "much",  "of",    "on",    "one",   "or",    "other", "some",  "such",
    "than",  "that",  "the",   "their", "there", "these", "they",  "this",  "those", "to",    "type",
    "types", "was",   "what",  "when",  "where", "which", "who",   "why",   "with",
};

bool is_grounding_stop_word(std::string_view lower) {
    return std::find(std::begin(kGroundingStopWords), std::end(kGroundingStopWords), lower) != std::end(kGroundingStopWords);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (const char c : text) {
        if (is_word_char(c)) {
            current.push_back(c);
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

// Singular guesses for a lowercased token, the token itself first.
std::vector<std::string> fold_variants(const std::string &t) {
    std::vector<std::string> out{t};
    if (t.size() > 3 && t.ends_with("ies")) out.push_back(t.substr(0, t.size() - 3) + "y");
    if (t.size() > 3 && t.ends_with("es")) out.push_back(t.substr(0, t.size() - 2));
    if (t.size() > 2 && t.ends_with('s') && !t.ends_with("ss")) out.push_back(t.substr(0, t.size() - 1));
    return out;
}

std::vector<std::string> split_label(std::string_view label) {
    std::vector<std::string> parts;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) parts.push_back(lower(current));
        current.clear();
    };
    for (std::size_t i = 0; i < label.size(); ++i) {
        const char c = label[i];
        if (!is_word_char(c)) {
            flush();
            continue;
        }
        const auto u = static_cast<unsigned char>(c);
        if (std::isupper(u) && !current.empty()) {
            const auto prev = static_cast<unsigned char>(current.back());
            const bool next_lower = i + 1 < label.size() && std::islower(static_cast<unsigned char>(label[i + 1]));
            if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower)) flush();
        }
        current.push_back(c);
    }
    flush();
    return parts;
}

}  // namespace

EvalMetrics metrics_from_counts(std::size_t n_candidates, std::size_t n_validated, std::size_t n_unmatched,
                                std::size_t n_design, std::size_t n_questions, std::size_t n_triples) {
    if (n_validated > n_candidates) {
        throw MetricsError(fmt::format("validated count {} exceeds candidate count {}", n_validated, n_candidates));
    }
    if (n_unmatched > n_design) {
        throw MetricsError(fmt::format("unmatched count {} exceeds design count {}", n_unmatched, n_design));
    }
    EvalMetrics m;
    m.tp = n_validated;
    m.fp = n_candidates - n_validated;
    m.fn = n_unmatched;
    m.n_candidates = n_candidates;
    m.n_design = n_design;
    m.n_questions = n_questions;
    m.n_triples = n_triples;
    m.mean_q_per_triple = mean_questions_per_triple(n_questions, n_triples);
    const auto tp = static_cast<double>(m.tp);
    if (m.tp + m.fp == 0) {
        m.precision_undefined = true;
    } else {
        m.precision = tp / static_cast<double>(m.tp + m.fp);
    }
    if (m.tp + m.fn == 0) {
        m.recall_undefined = true;
    } else {
        m.recall = tp / static_cast<double>(m.tp + m.fn);
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

EvalMetrics compute_metrics(const MatchReport &report, std::size_t n_questions, std::size_t n_triples) {
    return metrics_from_counts(report.candidate_matches.size(), report.validated_count(),
                               report.design_coverage.size() - report.matched_count(), report.design_coverage.size(),
                               n_questions, n_triples);
}

double mean_questions_per_triple(std::size_t n_questions, std::size_t n_triples) {
    if (n_triples == 0) {
        throw MetricsError("questions per triple is undefined for zero triples");
    }
    return static_cast<double>(n_questions) / static_cast<double>(n_triples);
}

double round_half_up(double value, int decimals) {
    const double factor = std::pow(10.0, decimals);
    // The nudge keeps decimal ties such as 0.125 from landing just below .5 in binary.
    const double scaled = std::abs(value) * factor;
    const double rounded = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled)) / factor;
    return std::copysign(rounded, value);
}

std::size_t word_count(std::string_view question) {
    while (!question.empty() && (question.back() == '?' || std::isspace(static_cast<unsigned char>(question.back())))) {
        question.remove_suffix(1);
    }
    std::size_t n = 0;
    bool in_word = false;
    for (const char c : question) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

double percentile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw MetricsError("percentile of an empty sample");
    }
    const double index = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(index));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = index - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

StatsRow unmatched_stats(std::span<const std::size_t> word_counts, std::size_t n_design) {
    StatsRow row;
    row.n_unmatched = word_counts.size();
    if (word_counts.empty()) {
        return row;
    }
    if (n_design == 0) {
        throw MetricsError("unmatched statistics need a non-empty design set");
    }
    std::vector<double> v(word_counts.begin(), word_counts.end());
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    row.pct_unmatched = round_half_up(100.0 * n / static_cast<double>(n_design), 0);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    row.mean = mean;
    if (v.size() > 1) {
        double ss = 0.0;
        for (const double x : v) ss += (x - mean) * (x - mean);
        row.std = std::sqrt(ss / (n - 1.0));
    }
    row.min = v.front();
    row.max = v.back();
    row.p25 = percentile(v, 0.25);
    row.p50 = percentile(v, 0.50);
    return row;
}

void add_to_vocabulary(Vocabulary &vocabulary, std::string_view label) {
    const auto parts = split_label(label);
    std::string joined;
    for (const auto &p : parts) {
        for (auto &v : fold_variants(p)) vocabulary.insert(std::move(v));
        joined += p;
    }
    if (parts.size() > 1) vocabulary.insert(joined);
}

Vocabulary build_vocabulary(const StatementSet &statements) {
    Vocabulary vocabulary;
    for (const auto &s : statements.statements) {
        for (const Term *t : {&s.subject, &s.predicate, &s.object}) {
            if (t->label) {
                add_to_vocabulary(vocabulary, *t->label);
            } else if (t->kind == TermKind::literal) {
                add_to_vocabulary(vocabulary, t->lexical);
            }
        }
    }
    return vocabulary;
}

GroundingResult grounding_check(std::string_view cq, const Vocabulary &vocabulary) {
    GroundingResult result;
    result.cq_text = std::string(cq);
    for (const auto &w : words(cq)) {
        const auto l = lower(w);
        if (is_grounding_stop_word(l)) continue;
        if (std::all_of(l.begin(), l.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            continue;
        }
        const auto variants = fold_variants(l);
        const bool known =
            std::any_of(variants.begin(), variants.end(), [&](const auto &v) { return vocabulary.contains(v); });
        if (!known && std::find(result.ungrounded_terms.begin(), result.ungrounded_terms.end(), w) ==
                          result.ungrounded_terms.end()) {
            result.ungrounded_terms.push_back(w);
        }
    }
    result.grounded = result.ungrounded_terms.empty();
    return result;
}

std::string_view to_string(UnmatchedCategory c) {
    return c == UnmatchedCategory::aggregation ? "aggregation" : "ungrounded";
}

bool is_aggregation_question(std::string_view cq) {
    static const std::regex pattern(R"(\b(top(\s+\d+)?|how many|average|total|most|least)\b)",
                                    std::regex::ECMAScript | std::regex::icase);
    return std::regex_search(cq.begin(), cq.end(), pattern);
}

std::set<UnmatchedCategory> categorize_unmatched(std::string_view cq, const Vocabulary &vocabulary) {
    std::set<UnmatchedCategory> out;
    if (is_aggregation_question(cq)) out.insert(UnmatchedCategory::aggregation);
    if (!grounding_check(cq, vocabulary).grounded) out.insert(UnmatchedCategory::ungrounded);
    return out;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::valid: return "valid";
        case Verdict::invalid: return "invalid";
        case Verdict::hindsight_valid: return "hindsight_valid";
    }
    return "invalid";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    const auto l = lower(s);
    if (l == "valid") return Verdict::valid;
    if (l == "invalid") return Verdict::invalid;
    if (l == "hindsight_valid" || l == "hindsight-valid") return Verdict::hindsight_valid;
    return std::nullopt;
}

ValidationLabels ValidationLabels::parse(std::string_view csv_text) {
    const auto rows = parse_csv(csv_text);
    if (rows.empty() || rows.front().size() < 2 || rows.front()[0] != "question" || rows.front()[1] != "verdict") {
        throw ConfigError("validation labels need the header 'question,verdict'");
    }
    ValidationLabels labels;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() < 2) {
            throw ConfigError(fmt::format("validation labels row {} has fewer than two fields", i + 1));
        }
        const auto verdict = parse_verdict(row[1]);
        if (!verdict) {
            throw ConfigError(fmt::format("validation labels row {}: unknown verdict '{}'", i + 1, row[1]));
        }
        if (!labels.entries.emplace(row[0], *verdict).second) {
            throw ConfigError(fmt::format("validation labels row {}: '{}' labelled twice", i + 1, row[0]));
        }
    }
    return labels;
}

ValidationLabels ValidationLabels::load(const std::string &path) { return parse(read_file(path)); }

double precision_from_labels(std::span<const std::string> candidates, const ValidationLabels &labels) {
    if (candidates.empty()) {
        throw MetricsError("label precision needs at least one candidate");
    }
    std::size_t positive = 0;
    std::vector<std::string> missing;
    for (const auto &c : candidates) {
        const auto it = labels.entries.find(c);
        if (it == labels.entries.end()) {
            missing.push_back(c);
        } else if (it->second != Verdict::invalid) {
            ++positive;
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
            list += fmt::format("\n  {}", missing[i]);
        }
        if (missing.size() > 10) list += fmt::format("\n  ... and {} more", missing.size() - 10);
        throw MetricsError(fmt::format("{} candidate(s) have no verdict:{}", missing.size(), list));
    }
    return static_cast<double>(positive) / static_cast<double>(candidates.size());
}

double precision_from_labels(std::span<const CandidateCQ> candidates, const ValidationLabels &labels) {
    const auto texts = kept_texts(candidates);
    return precision_from_labels(std::span<const std::string>(texts), labels);
}

}  // namespace retrofit
