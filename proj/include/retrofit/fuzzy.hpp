#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace retrofit {

/// Unit-cost Levenshtein distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Lowercases, maps non-alphanumerics to spaces, sorts the tokens and joins them
/// with single spaces.
std::string token_sort_key(std::string_view s);

/// 100 * (1 - distance / max length) between token-sorted forms, in [0, 100].
/// Two strings that are both empty after processing score 100.
double token_sort_ratio(std::string_view a, std::string_view b);

}  // namespace retrofit
