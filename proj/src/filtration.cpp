#include "retrofit/filtration.hpp"

#include "retrofit/error.hpp"
#include "retrofit/fuzzy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace retrofit {
namespace {

constexpr std::string_view kPrimitiveLexicon = R"(# Questions about the modelling constructs rather than the domain.
# Matched against lowercased, whitespace-collapsed questions.
is <X> a class
what class does
does <X> have any subclasses
what is the subclass of
subclass of <X>
in the ontology
is <X> a property
domain of
range of
is <X> an instance
is <X> an individual
hierarchical relationship between
)";

constexpr std::string_view kNarrativePatterns = R"(# Questions that ask for opinions, designs, or narratives.
^could you envision
^can you design
^can you name ... and describe
why or why not
what do you do to
do you use
in your opinion
how do you measure your
# a second interrogative sentence after a sentence break
re:[.?!]\s+[a-z][^.?!]*\?
)";

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string escape_regex(std::string_view s) {
    static constexpr std::string_view kSpecial = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (const char c : s) {
        if (kSpecial.find(c) != std::string_view::npos) {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out;
}

std::string phrase_to_regex(std::string_view pattern) {
    bool anchored = false;
    if (pattern.starts_with('^')) {
        anchored = true;
        pattern.remove_prefix(1);
    }
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < pattern.size()) {
        while (i < pattern.size() && pattern[i] == ' ') ++i;
        const auto start = i;
        while (i < pattern.size() && pattern[i] != ' ') ++i;
        if (i > start) words.push_back(pattern.substr(start, i - start));
    }
    if (words.empty()) {
        throw ConfigError("empty pattern");
    }
    std::string re = anchored ? "^" : "";
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto word = words[w];
        if (w > 0) {
            re += "\\s+";
        }
        if (word == "<X>") {
            re += "\\S.*?";
        } else if (word == "...") {
            re += "(?:.*?)";
        } else {
            if (is_word_char(word.front()) && (w > 0 || !anchored)) {
                re += "\\b";
            }
            re += escape_regex(word);
            if (is_word_char(word.back())) {
                re += "\\b";
            }
        }
    }
    return re;
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::string_view to_string(RemovalReason r) {
    switch (r) {
        case RemovalReason::malformed: return "malformed";
        case RemovalReason::duplicate: return "duplicate";
        case RemovalReason::modelling_primitive: return "modelling_primitive";
        case RemovalReason::subjective_narrative: return "subjective_narrative";
    }
    return "unknown";
}

std::string_view to_string(Strictness s) {
    switch (s) {
        case Strictness::off: return "off";
        case Strictness::lenient: return "lenient";
        case Strictness::strict: return "strict";
    }
    return "unknown";
}

std::optional<Strictness> parse_strictness(std::string_view s) {
    if (s == "off") return Strictness::off;
    if (s == "lenient") return Strictness::lenient;
    if (s == "strict") return Strictness::strict;
    return std::nullopt;
}

std::string_view default_primitive_lexicon_text() { return kPrimitiveLexicon; }
std::string_view default_narrative_patterns_text() { return kNarrativePatterns; }

const PatternSet &default_primitive_lexicon() {
    static const PatternSet set = PatternSet::parse(kPrimitiveLexicon);
    return set;
}

const PatternSet &default_narrative_patterns() {
    static const PatternSet set = PatternSet::parse(kNarrativePatterns);
    return set;
}

PatternSet PatternSet::parse(std::string_view text) {
    PatternSet set;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        while (!line.empty() && is_ws(line.front())) line.remove_prefix(1);
        while (!line.empty() && is_ws(line.back())) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::string re = line.starts_with("re:") ? std::string(line.substr(3)) : phrase_to_regex(line);
        try {
            set.compiled_.emplace_back(re, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error &e) {
            throw ConfigError(fmt::format("pattern line {} ('{}') is invalid: {}", line_no, line, e.what()));
        }
        set.sources_.emplace_back(line);
    }
    return set;
}

PatternSet PatternSet::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open pattern file '{}'", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool PatternSet::matches(std::string_view q) const {
    return std::any_of(compiled_.begin(), compiled_.end(),
                       [&](const std::regex &re) { return std::regex_search(q.begin(), q.end(), re); });
}

void FiltrationConfig::validate() const {
    if (dedup_ratio_threshold < 0 || dedup_ratio_threshold > 100) {
        throw ConfigError(fmt::format("dedup ratio threshold {} is outside [0, 100]", dedup_ratio_threshold));
    }
}

std::string normalize_question(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (const char c : text) {
        if (is_ws(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    static constexpr std::string_view kTerminal = ".,;:!";
    while (!out.empty() && (kTerminal.find(out.back()) != std::string_view::npos || out.back() == ' ')) {
        out.pop_back();
    }
    return out;
}

namespace {

// Distance capped at `limit + 1`; banded so near-miss pairs stay cheap.
std::size_t bounded_levenshtein(std::string_view a, std::string_view b, std::size_t limit) {
    if (a.size() < b.size()) std::swap(a, b);
    if (a.size() - b.size() > limit) return limit + 1;
    const std::size_t inf = limit + 1;
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = std::min(j, inf);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        const std::size_t lo = i > limit ? i - limit : 1;
        const std::size_t hi = std::min(b.size(), i + limit);
        std::size_t diag = row[lo - 1];
        row[lo - 1] = lo == 1 ? std::min(i, inf) : inf;
        std::size_t best = row[lo - 1];
        for (std::size_t j = lo; j <= hi; ++j) {
            const std::size_t up = row[j];
            const std::size_t v = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            row[j] = std::min(v, inf);
            diag = up;
            best = std::min(best, row[j]);
        }
        if (hi < b.size()) row[hi + 1] = inf;
        if (best >= inf) return inf;
    }
    return row[b.size()];
}

// ratio >= t  <=>  100 * d <= (100 - t) * L
bool keys_within(std::string_view ka, std::string_view kb, int threshold) {
    const std::size_t longest = std::max(ka.size(), kb.size());
    if (longest == 0) return true;
    const std::size_t budget = static_cast<std::size_t>(100 - threshold) * longest / 100;
    return bounded_levenshtein(ka, kb, budget) <= budget;
}

bool is_malformed(std::string_view normalized) {
    return normalized.empty() || normalized.back() != '?' ||
           normalized.find('\n') != std::string_view::npos ||
           std::none_of(normalized.begin(), normalized.end(),
                        [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || (c & 0x80); });
}

}  // namespace

bool is_duplicate(std::string_view a, std::string_view b, int threshold) {
    return keys_within(token_sort_key(a), token_sort_key(b), threshold);
}

void dedup(std::span<CandidateCQ> questions, const FiltrationConfig &cfg) {
    cfg.validate();
    std::vector<std::string> keys;
    std::unordered_set<std::string> exact;
    keys.reserve(questions.size());
    for (auto &q : questions) {
        if (!q.kept()) {
            continue;
        }
        auto key = token_sort_key(normalize_question(q.text));
        bool dup = exact.contains(key);
        if (!dup && cfg.dedup_ratio_threshold < 100) {
            dup = std::any_of(keys.begin(), keys.end(),
                              [&](const std::string &k) { return keys_within(k, key, cfg.dedup_ratio_threshold); });
        }
        if (dup) {
            q.remove(RemovalReason::duplicate);
        }
        exact.insert(key);
        keys.push_back(std::move(key));
    }
}

bool is_modelling_primitive(std::string_view q, const FiltrationConfig &cfg) {
    if (cfg.strictness == Strictness::off) {
        return false;
    }
    if (cfg.primitive_lexicon.matches(q)) {
        return true;
    }
    if (cfg.strictness == Strictness::strict) {
        for (const auto &kw : cfg.strict_keywords) {
            // bare keyword or its plural
            const std::regex re("\\b" + escape_regex(kw) + "(e?s)?\\b");
            if (std::regex_search(q.begin(), q.end(), re)) {
                return true;
            }
            if (kw.ends_with('y')) {
                const std::regex plural("\\b" + escape_regex(kw.substr(0, kw.size() - 1)) + "ies\\b");
                if (std::regex_search(q.begin(), q.end(), plural)) {
                    return true;
                }
            }
        }
    }
    return false;
}

bool is_subjective_narrative(std::string_view q, const FiltrationConfig &cfg) {
    return cfg.strictness != Strictness::off && cfg.narrative_patterns.matches(q);
}

std::vector<CandidateCQ> filter_candidates(std::vector<CandidateCQ> questions, const FiltrationConfig &cfg) {
    cfg.validate();
    for (auto &q : questions) {
        q.status = CandidateStatus::kept;
        q.removal_reason.reset();
        if (is_malformed(normalize_question(q.text))) {
            q.remove(RemovalReason::malformed);
        }
    }
    dedup(questions, cfg);
    for (auto &q : questions) {
        if (!q.kept()) {
            continue;
        }
        const auto norm = normalize_question(q.text);
        if (is_modelling_primitive(norm, cfg)) {
            q.remove(RemovalReason::modelling_primitive);
        } else if (is_subjective_narrative(norm, cfg)) {
            q.remove(RemovalReason::subjective_narrative);
        }
    }
    return questions;
}

std::vector<CandidateCQ> filter_questions(std::span<const GenerationRecord> records, const FiltrationConfig &cfg) {
    std::vector<CandidateCQ> all;
    for (const auto &rec : records) {
        for (const auto &text : rec.questions) {
            all.push_back(CandidateCQ{text, rec.statement_ordinal, rec.template_id, rec.provider_id,
                                      CandidateStatus::kept, std::nullopt});
        }
    }
    return filter_candidates(std::move(all), cfg);
}

std::vector<std::string> kept_texts(std::span<const CandidateCQ> questions) {
    std::vector<std::string> out;
    for (const auto &q : questions) {
        if (q.kept()) {
            out.push_back(q.text);
        }
    }
    return out;
}

}  // namespace retrofit
