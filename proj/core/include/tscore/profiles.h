#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tscore/corpus.h"
#include "tscore/index.h"

namespace tscore {

struct WeightedTerm {
  TermId term = 0;
  double weight = 0.0;

  bool operator==(const WeightedTerm&) const = default;
};

// A person's or profession's TF.IDF profile: eligible terms (neither
// stopwords nor entity tokens) sorted by descending weight, ties broken by
// ascending term.
struct WeightedTermVector {
  std::string owner;
  std::vector<WeightedTerm> entries;
};

// Raw term counts over a sentence set S(.): sum of tf(t, s) per term and the
// summed sentence length sum |s|, which counts every token.
class ScopeCounts {
 public:
  ScopeCounts() = default;
  ScopeCounts(const SentenceIndex& index, std::span<const SentencePos> postings);

  std::uint64_t tf(TermId term) const {
    const auto it = tf_.find(term);
    return it == tf_.end() ? 0 : it->second;
  }
  std::uint64_t total_length() const { return total_length_; }
  const std::unordered_map<TermId, std::uint64_t>& counts() const { return tf_; }

 private:
  std::unordered_map<TermId, std::uint64_t> tf_;
  std::uint64_t total_length_ = 0;
};

// TF.IDF term weighting over the sentence index:
//
//   w(t, x) = (sum_{s in S(x)} tf(t, s) / sum_{s in S(x)} |s|) * ln(|S| / df(t))
//
// where x is a person or a profession. Empty S(x) and unseen terms weigh 0.
// Profession profiles are computed once and cached; all methods are safe to
// call concurrently.
class TermProfiles {
 public:
  TermProfiles(const SentenceIndex& index, std::unordered_set<Term> stopwords);
  ~TermProfiles();
  TermProfiles(TermProfiles&&) noexcept;

  const SentenceIndex& index() const { return *index_; }
  const std::unordered_set<Term>& stopwords() const { return stopwords_; }

  // False for stopwords and entity tokens.
  bool eligible(TermId term) const { return eligible_[term]; }
  bool eligible(std::string_view term) const;

  double idf(TermId term) const;
  double weight(const ScopeCounts& counts, TermId term) const;

  double term_weight(const EntityId& person, std::string_view term) const;
  double term_weight(const Label& profession, std::string_view term) const;

  ScopeCounts person_counts(const EntityId& person) const;
  ScopeCounts profession_counts(const Label& profession) const;

  WeightedTermVector person_profile(const EntityId& person) const;
  const WeightedTermVector& profession_profile(const Label& profession) const;

  // First min(k, available) entries of the profession profile, T_k(pr).
  std::span<const WeightedTerm> top_k_terms(const Label& profession,
                                            std::size_t k) const;

 private:
  struct Cache;

  WeightedTermVector make_profile(std::string owner,
                                  const ScopeCounts& counts) const;

  const SentenceIndex* index_;
  std::unordered_set<Term> stopwords_;
  std::vector<bool> eligible_;
  std::unique_ptr<Cache> cache_;
};

}  // namespace tscore
