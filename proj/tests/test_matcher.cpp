#include "retrofit/error.hpp"
#include "retrofit/matcher.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace retrofit;

namespace {

double norm(const EmbeddingVector &v) {
    double s = 0;
    for (const float x : v.components) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

// Cosine of raw term-count vectors after hashing, computed without the library.
double reference_cosine(const std::string &a, const std::string &b, std::size_t dim) {
    const auto counts = [&](const std::string &s) {
        std::map<std::size_t, double> c;
        for (const auto &t : lexical_tokens(s)) c[feature_bucket(t, dim)] += 1.0;
        return c;
    };
    const auto ca = counts(a);
    const auto cb = counts(b);
    double dot = 0, na = 0, nb = 0;
    for (const auto &[k, v] : ca) {
        na += v * v;
        if (const auto it = cb.find(k); it != cb.end()) dot += v * it->second;
    }
    for (const auto &[k, v] : cb) nb += v * v;
    return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("lexical tokens drop stop words and punctuation") {
    CHECK(lexical_tokens("What is the username of the Player?") ==
          std::vector<std::string>{"what", "username", "player"});
    CHECK(lexical_tokens("?? the a").empty());
}

TEST_CASE("feature bucket is FNV-1a modulo the dimension") {
    // FNV-1a 64 of "a" is 0xaf63dc4c8601ec8c
    CHECK(feature_bucket("a", 512) == 0xaf63dc4c8601ec8cULL % 512);
    CHECK(feature_bucket("player", 7) < 7);
}

TEST_CASE("embeddings are unit vectors") {
    MatcherConfig cfg;
    for (const char *q : {"What is a Game?", "Which player owns the sword of a thousand truths?", "x"}) {
        const auto v = embed(q, cfg);
        CHECK(v.dimension() == 512);
        CHECK(std::abs(norm(v) - 1.0) <= 1e-6);
    }
    CHECK_THROWS_AS(embed("", cfg), EmbeddingError);
    CHECK_THROWS_AS(embed("the of a?", cfg), EmbeddingError);
}

TEST_CASE("similarity is symmetric, self-similar and matches the reference cosine") {
    MatcherConfig cfg;
    const std::vector<std::string> qs{"what is the username of the player?", "what is the player's username?",
                                      "which game does a player play?", "who are the top 3 players in the game?",
                                      "what is a multiplayer achievement?"};
    for (const auto &a : qs) {
        const auto va = embed(a, cfg);
        CHECK(std::abs(similarity(va, va) - 1.0) <= 1e-6);
        for (const auto &b : qs) {
            const auto vb = embed(b, cfg);
            CHECK(similarity(va, vb) == doctest::Approx(similarity(vb, va)).epsilon(1e-7));
            CHECK(similarity(va, vb) == doctest::Approx(reference_cosine(a, b, 512)).epsilon(1e-5));
        }
    }
    MatcherConfig small = cfg;
    small.dimension = 16;
    CHECK_THROWS_AS(similarity(embed("game", cfg), embed("game", small)), EmbeddingError);
}

TEST_CASE("design CQ files") {
    const auto plain = DesignCQSet::parse("\xEF\xBB\xBFWhat is a game?\n\n  Who plays a game  \r\nWhich item.\n", "x");
    CHECK(plain.questions == std::vector<std::string>{"What is a game?", "Who plays a game?", "Which item?"});
    const auto csv = DesignCQSet::parse("Questions\n\"What is a game, exactly?\"\nWho plays?\n");
    CHECK(csv.questions == std::vector<std::string>{"What is a game, exactly?", "Who plays?"});
    const auto file = DesignCQSet::load(retrofit::testing::data_path("videogame_design_cqs.txt"));
    CHECK(file.questions.size() == 6);
}

TEST_CASE("matching against a brute-force matrix") {
    MatcherConfig cfg;
    cfg.similarity_threshold = 0.5;
    const std::vector<std::string> candidates{"What is the username of the player?", "Which game is played?",
                                              "Is Alice a player?", "the of a?"};
    DesignCQSet design;
    design.questions = {"What is the player's username?", "Which game does a player play?", "Who ranks first?"};
    const auto report = match_candidates(candidates, design, cfg);
    REQUIRE(report.candidate_matches.size() == 4);
    REQUIRE(report.design_coverage.size() == 3);

    std::size_t validated = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double best = -1;
        for (const auto &d : design.questions) {
            const bool empty = lexical_tokens(normalize_question(candidates[i])).empty();
            best = std::max(best, empty ? 0.0 : reference_cosine(normalize_question(candidates[i]),
                                                                 normalize_question(d), cfg.dimension));
        }
        CHECK(report.candidate_matches[i].similarity == doctest::Approx(best).epsilon(1e-5));
        const bool v = best >= cfg.similarity_threshold - kSimilarityTolerance;
        CHECK(report.candidate_matches[i].validated == v);
        validated += v ? 1 : 0;
    }
    CHECK(report.validated_count() == validated);
    CHECK_FALSE(report.candidate_matches[3].validated);
    CHECK(report.unmatched_design() == std::vector<std::size_t>{2});
    CHECK(report.matched_count() == 2);
}

TEST_CASE("report_from_matrix thresholds with a tolerance") {
    const std::vector<float> m{0.7f, 0.2f, 0.69999f, 0.1f};
    const auto r = report_from_matrix(m, 2, 2, 0.7, "test");
    CHECK(r.candidate_matches[0].validated);
    CHECK_FALSE(r.candidate_matches[1].validated);
    CHECK(r.candidate_matches[0].best_design == 0u);
    CHECK(r.design_coverage[0].best_candidate == 0u);
    CHECK_FALSE(r.design_coverage[1].matched);
    CHECK_THROWS_AS(report_from_matrix(m, 3, 2, 0.7, "test"), EmbeddingError);
}

TEST_CASE("empty design set and bad thresholds are rejected") {
    MatcherConfig cfg;
    const std::vector<std::string> c{"What is a game?"};
    CHECK_THROWS_AS(match_candidates(c, DesignCQSet{}, cfg), ConfigError);
    cfg.similarity_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.similarity_threshold = 0.7;
    cfg.backend = EmbeddingBackend::http_embedding;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("only kept candidates take part in matching") {
    MatcherConfig cfg;
    DesignCQSet design;
    design.questions = {"What is a game?"};
    std::vector<CandidateCQ> cands(2);
    cands[0].text = "What is a game?";
    cands[1].text = "What is a game?";
    cands[1].remove(RemovalReason::duplicate);
    const auto r = match_candidates(std::span<const CandidateCQ>(cands), design, cfg);
    CHECK(r.candidate_matches.size() == 1);
}
