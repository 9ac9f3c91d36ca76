#include "retrofit/fuzzy.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace retrofit;

namespace {

// Full dynamic-programming table, no banding or early exit.
std::size_t reference_levenshtein(const std::string &a, const std::string &b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
    }
    return d[a.size()][b.size()];
}

}  // namespace

TEST_CASE("levenshtein known values") {
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("flaw", "lawn") == 2);
    CHECK(levenshtein("same", "same") == 0);
}

TEST_CASE("levenshtein agrees with the full table on random strings") {
    std::mt19937 rng(5);
    const std::string alphabet = "abc d";
    for (int iter = 0; iter < 2000; ++iter) {
        std::string a(rng() % 30, ' ');
        std::string b(rng() % 30, ' ');
        for (auto &c : a) c = alphabet[rng() % alphabet.size()];
        for (auto &c : b) c = alphabet[rng() % alphabet.size()];
        REQUIRE(levenshtein(a, b) == reference_levenshtein(a, b));
    }
}

TEST_CASE("token sort key") {
    CHECK(token_sort_key("What is the username of the player?") == "is of player the the username what");
    CHECK(token_sort_key("What is the player's username?") == "is player s the username what");
    CHECK(token_sort_key("  ?? ") == "");
}

TEST_CASE("token sort ratio") {
    CHECK(token_sort_ratio("what is a game?", "game a is what") == doctest::Approx(100.0));
    CHECK(token_sort_ratio("what is the username of the player?", "what is the player's username?") ==
          doctest::Approx(100.0 * (1.0 - 6.0 / 34.0)));
    CHECK(token_sort_ratio("kitten", "sitting") == doctest::Approx(100.0 * (1.0 - 3.0 / 7.0)));
    CHECK(token_sort_ratio("", "") == doctest::Approx(100.0));
    CHECK(token_sort_ratio("abc", "") == doctest::Approx(0.0));
}

TEST_CASE("token sort ratio is symmetric and bounded") {
    std::mt19937 rng(9);
    const char *words[] = {"what", "is", "a", "game", "player", "achievement", "the", "of"};
    for (int iter = 0; iter < 500; ++iter) {
        std::string a;
        std::string b;
        for (unsigned i = 0, n = rng() % 6; i < n; ++i) a += std::string(words[rng() % 8]) + " ";
        for (unsigned i = 0, n = rng() % 6; i < n; ++i) b += std::string(words[rng() % 8]) + " ";
        const double r = token_sort_ratio(a, b);
        CHECK(r >= 0.0);
        CHECK(r <= 100.0);
        CHECK(r == token_sort_ratio(b, a));
    }
}
