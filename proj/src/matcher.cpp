#include "retrofit/matcher.hpp"

#include "retrofit/csv.hpp"
#include "retrofit/error.hpp"
#include "retrofit/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace retrofit {
namespace {

std::string clean_design_line(std::string_view line) {
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
    std::string q(line);
    if (!q.empty() && q.back() != '?') {
        while (!q.empty() && (q.back() == '.' || q.back() == ' ')) q.pop_back();
        q.push_back('?');
    }
    return q;
}

// Embeds every text; texts without content tokens become zero rows that never match.
std::vector<float> embed_rows(std::span<const std::string> texts, const MatcherConfig &cfg, std::size_t &dim) {
    std::vector<std::string> normalized;
    normalized.reserve(texts.size());
    for (const auto &t : texts) {
        normalized.push_back(normalize_question(t));
    }
    std::vector<std::optional<EmbeddingVector>> vectors(texts.size());
    if (cfg.backend == EmbeddingBackend::http_embedding) {
        auto all = embed_all(normalized, cfg);
        for (std::size_t i = 0; i < all.size(); ++i) vectors[i] = std::move(all[i]);
    } else {
        for (std::size_t i = 0; i < normalized.size(); ++i) {
            try {
                vectors[i] = embed(normalized[i], cfg);
            } catch (const EmbeddingError &) {
                vectors[i].reset();
            }
        }
    }
    for (const auto &v : vectors) {
        if (v) {
            if (dim == 0) {
                dim = v->dimension();
            } else if (dim != v->dimension()) {
                throw EmbeddingError("embedding dimension changed within one matching run");
            }
        }
    }
    if (dim == 0) {
        dim = cfg.dimension;
    }
    std::vector<float> rows(texts.size() * dim, 0.0f);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i]) {
            std::copy(vectors[i]->components.begin(), vectors[i]->components.end(), rows.begin() + i * dim);
        }
    }
    return rows;
}

}  // namespace

DesignCQSet DesignCQSet::parse(std::string_view text, std::string source_path) {
    DesignCQSet set;
    set.source_path = std::move(source_path);
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    const auto first_break = text.find_first_of("\r\n");
    const auto first_line = text.substr(0, first_break);
    if (first_line == "Questions" || first_line == "\"Questions\"" || first_line.starts_with("Questions,")) {
        const auto rows = parse_csv(text);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (!rows[i].empty()) {
                if (auto q = clean_design_line(rows[i].front()); !q.empty()) set.questions.push_back(std::move(q));
            }
        }
        return set;
    }
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        if (auto q = clean_design_line(text.substr(start, end - start)); !q.empty()) {
            set.questions.push_back(std::move(q));
        }
        start = end + 1;
    }
    return set;
}

DesignCQSet DesignCQSet::load(const std::string &path) { return parse(read_file(path), path); }

std::size_t MatchReport::validated_count() const {
    return static_cast<std::size_t>(
        std::count_if(candidate_matches.begin(), candidate_matches.end(), [](const auto &m) { return m.validated; }));
}

std::size_t MatchReport::matched_count() const {
    return static_cast<std::size_t>(
        std::count_if(design_coverage.begin(), design_coverage.end(), [](const auto &d) { return d.matched; }));
}

std::vector<std::size_t> MatchReport::unmatched_design() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < design_coverage.size(); ++i) {
        if (!design_coverage[i].matched) out.push_back(i);
    }
    return out;
}

std::vector<float> similarity_matrix(std::span<const std::string> candidates, std::span<const std::string> design,
                                     const MatcherConfig &cfg) {
    cfg.validate();
    std::size_t dim = 0;
    const auto rows = embed_rows(candidates, cfg, dim);
    std::size_t design_dim = dim;
    const auto cols = embed_rows(design, cfg, design_dim);
    if (!candidates.empty() && !design.empty() && design_dim != dim) {
        throw EmbeddingError("candidate and design embeddings differ in dimension");
    }
    std::vector<float> matrix(candidates.size() * design.size());
    if (!matrix.empty()) {
        kernels::similarity_matrix(rows, cols, dim, matrix);
    }
    return matrix;
}

MatchReport report_from_matrix(std::span<const float> matrix, std::size_t n_candidates, std::size_t n_design,
                               double threshold, std::string backend) {
    if (matrix.size() != n_candidates * n_design) {
        throw EmbeddingError("similarity matrix has the wrong shape");
    }
    MatchReport report;
    report.threshold = threshold;
    report.backend = std::move(backend);
    report.candidate_matches.resize(n_candidates);
    report.design_coverage.resize(n_design);
    const double cutoff = threshold - kSimilarityTolerance;
    for (std::size_t i = 0; i < n_candidates; ++i) {
        auto &m = report.candidate_matches[i];
        for (std::size_t j = 0; j < n_design; ++j) {
            const double s = matrix[i * n_design + j];
            if (!m.best_design || s > m.similarity) {
                m.best_design = j;
                m.similarity = s;
            }
            auto &d = report.design_coverage[j];
            if (!d.best_candidate || s > d.similarity) {
                d.best_candidate = i;
                d.similarity = s;
            }
        }
        m.validated = m.best_design.has_value() && m.similarity >= cutoff;
    }
    for (auto &d : report.design_coverage) {
        d.matched = d.best_candidate.has_value() && d.similarity >= cutoff;
    }
    return report;
}

MatchReport match_candidates(std::span<const std::string> candidates, const DesignCQSet &design,
                             const MatcherConfig &cfg) {
    if (design.questions.empty()) {
        throw ConfigError("design CQ set is empty");
    }
    const auto matrix = similarity_matrix(candidates, design.questions, cfg);
    return report_from_matrix(matrix, candidates.size(), design.questions.size(), cfg.similarity_threshold,
                              std::string(to_string(cfg.backend)));
}

MatchReport match_candidates(std::span<const CandidateCQ> candidates, const DesignCQSet &design,
                             const MatcherConfig &cfg) {
    const auto texts = kept_texts(candidates);
    return match_candidates(std::span<const std::string>(texts), design, cfg);
}

}  // namespace retrofit
