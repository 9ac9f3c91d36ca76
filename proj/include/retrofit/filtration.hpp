#pragma once

// Question filtration: malformed lines, near-duplicates, questions about the
// modelling primitives themselves, and subjective / narrative prompts.

#include "retrofit/gateway.hpp"

#include <cstddef>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

enum class CandidateStatus { kept, removed };
enum class RemovalReason { malformed, duplicate, modelling_primitive, subjective_narrative };
enum class Strictness { off, lenient, strict };

std::string_view to_string(RemovalReason r);
std::string_view to_string(Strictness s);
std::optional<Strictness> parse_strictness(std::string_view s);

struct CandidateCQ {
    std::string text;
    std::size_t statement_ordinal = 0;
    std::string template_id;
    std::string provider_id;
    CandidateStatus status = CandidateStatus::kept;
    std::optional<RemovalReason> removal_reason;

    [[nodiscard]] bool kept() const noexcept { return status == CandidateStatus::kept; }
    void remove(RemovalReason why) {
        status = CandidateStatus::removed;
        removal_reason = why;
    }
};

/// Line-oriented pattern table matched against normalized questions.
///
/// Syntax, one pattern per line ('#' starts a comment line):
///   - plain words match as a phrase at word boundaries anywhere in the question;
///   - a leading '^' anchors the phrase at the start of the question;
///   - `<X>` stands for one or more words, `...` for any (possibly empty) text;
///   - `re:` introduces a raw ECMAScript regular expression.
class PatternSet {
public:
    PatternSet() = default;

    static PatternSet parse(std::string_view text);
    static PatternSet load(const std::string &path);

    [[nodiscard]] bool matches(std::string_view normalized_question) const;
    [[nodiscard]] const std::vector<std::string> &sources() const noexcept { return sources_; }
    [[nodiscard]] bool empty() const noexcept { return sources_.empty(); }

private:
    std::vector<std::string> sources_;
    std::vector<std::regex> compiled_;
};

/// Default table contents; the same text ships under data/patterns/.
std::string_view default_primitive_lexicon_text();
std::string_view default_narrative_patterns_text();
/// Compiled once and shared; copies share the compiled automata.
const PatternSet &default_primitive_lexicon();
const PatternSet &default_narrative_patterns();

struct FiltrationConfig {
    /// Token-sort ratio threshold on the 0-100 scale.
    int dedup_ratio_threshold = 90;
    PatternSet primitive_lexicon = default_primitive_lexicon();
    PatternSet narrative_patterns = default_narrative_patterns();
    /// Bare keywords that flag a question under Strictness::strict.
    std::vector<std::string> strict_keywords{"class", "subclass", "property", "ontology",
                                             "instance", "individual", "triple"};
    Strictness strictness = Strictness::lenient;

    void validate() const;
};

/// Lowercase, trimmed, whitespace-collapsed form with trailing punctuation other than
/// '?' removed. Used only for comparisons; candidates keep their original text.
std::string normalize_question(std::string_view text);

/// token_sort_ratio(a, b) >= threshold, evaluated in exact integer arithmetic.
bool is_duplicate(std::string_view a, std::string_view b, int threshold);

/// Marks as duplicate every kept question that reaches the threshold against an
/// earlier question of the list (first occurrence wins). Malformed entries are skipped.
void dedup(std::span<CandidateCQ> questions, const FiltrationConfig &cfg);

bool is_modelling_primitive(std::string_view normalized, const FiltrationConfig &cfg);
bool is_subjective_narrative(std::string_view normalized, const FiltrationConfig &cfg);

/// Applies malformed -> duplicate -> modelling primitive -> subjective/narrative in
/// that order; the first rule that fires is the removal reason.
std::vector<CandidateCQ> filter_candidates(std::vector<CandidateCQ> questions, const FiltrationConfig &cfg);
std::vector<CandidateCQ> filter_questions(std::span<const GenerationRecord> records, const FiltrationConfig &cfg);

/// Kept texts in order.
std::vector<std::string> kept_texts(std::span<const CandidateCQ> questions);

}  // namespace retrofit
