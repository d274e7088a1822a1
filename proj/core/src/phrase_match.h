#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tscore::detail {

// A token sequence where each position accepts one of a few alternatives.
template <typename Token>
using Pattern = std::vector<std::vector<Token>>;

template <typename Token>
bool matches_at(std::span<const Token> text, std::size_t start,
                const Pattern<Token>& pattern) {
  if (pattern.empty() || text.size() - start < pattern.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto& accepted = pattern[i];
    if (std::find(accepted.begin(), accepted.end(), text[start + i]) ==
        accepted.end()) {
      return false;
    }
  }
  return true;
}

struct Match {
  std::size_t position = 0;
  std::size_t length = 0;
};

// Earliest start at which any pattern matches contiguously; among patterns
// matching there, the longest.
template <typename Token>
std::optional<Match> earliest_match(std::span<const Token> text,
                                    const std::vector<Pattern<Token>>& patterns) {
  for (std::size_t start = 0; start < text.size(); ++start) {
    std::optional<Match> best;
    for (const auto& pattern : patterns) {
      if (matches_at(text, start, pattern) &&
          (!best || pattern.size() > best->length)) {
        best = Match{start, pattern.size()};
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

template <typename Token>
bool contains_any(std::span<const Token> text,
                  const std::vector<Pattern<Token>>& patterns) {
  return earliest_match(text, patterns).has_value();
}

}  // namespace tscore::detail
