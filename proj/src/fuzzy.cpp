#include "retrofit/fuzzy.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace retrofit {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::string token_sort_key(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    std::sort(tokens.begin(), tokens.end());
    std::string out;
    for (const auto &t : tokens) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += t;
    }
    return out;
}

double token_sort_ratio(std::string_view a, std::string_view b) {
    const auto ka = token_sort_key(a);
    const auto kb = token_sort_key(b);
    const auto longest = std::max(ka.size(), kb.size());
    if (longest == 0) {
        return 100.0;
    }
    return 100.0 * (1.0 - static_cast<double>(levenshtein(ka, kb)) / static_cast<double>(longest));
}

}  // namespace retrofit
