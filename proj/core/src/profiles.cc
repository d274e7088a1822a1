#include "tscore/profiles.h"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "tscore/error.h"

namespace tscore {

ScopeCounts::ScopeCounts(const SentenceIndex& index,
                         std::span<const SentencePos> postings) {
  for (const SentencePos pos : postings) {
    const auto& tokens = index.sentence_at(pos).tokens;
    total_length_ += tokens.size();
    for (const TermId t : tokens) ++tf_[t];
  }
}

struct TermProfiles::Cache {
  std::mutex mu;
  std::unordered_map<Label, std::unique_ptr<const WeightedTermVector>> profiles;
};

TermProfiles::TermProfiles(const SentenceIndex& index,
                           std::unordered_set<Term> stopwords)
    : index_(&index),
      stopwords_(std::move(stopwords)),
      eligible_(index.vocabulary_size()),
      cache_(std::make_unique<Cache>()) {
  for (TermId t = 0; t < index.vocabulary_size(); ++t) {
    eligible_[t] = eligible(index.term(t));
  }
}

TermProfiles::~TermProfiles() = default;
TermProfiles::TermProfiles(TermProfiles&&) noexcept = default;

bool TermProfiles::eligible(std::string_view term) const {
  return !is_entity_token(term) && !stopwords_.contains(std::string(term));
}

double TermProfiles::idf(TermId term) const {
  const auto df = index_->doc_freq(term);
  if (df == 0) return 0.0;
  return std::log(static_cast<double>(index_->total_sentences()) /
                  static_cast<double>(df));
}

double TermProfiles::weight(const ScopeCounts& counts, TermId term) const {
  if (counts.total_length() == 0) return 0.0;
  const auto tf = counts.tf(term);
  if (tf == 0) return 0.0;
  return static_cast<double>(tf) / static_cast<double>(counts.total_length()) *
         idf(term);
}

double TermProfiles::term_weight(const EntityId& person,
                                 std::string_view term) const {
  const auto id = index_->find_term(term);
  if (!id) return 0.0;
  return weight(person_counts(person), *id);
}

double TermProfiles::term_weight(const Label& profession,
                                 std::string_view term) const {
  const auto id = index_->find_term(term);
  if (!id) return 0.0;
  return weight(profession_counts(profession), *id);
}

ScopeCounts TermProfiles::person_counts(const EntityId& person) const {
  return ScopeCounts(*index_, index_->person_postings(person));
}

ScopeCounts TermProfiles::profession_counts(const Label& profession) const {
  return ScopeCounts(*index_, index_->profession_postings(profession));
}

WeightedTermVector TermProfiles::make_profile(std::string owner,
                                              const ScopeCounts& counts) const {
  WeightedTermVector profile{std::move(owner), {}};
  profile.entries.reserve(counts.counts().size());
  for (const auto& [term, tf] : counts.counts()) {
    if (!eligible_[term]) continue;
    profile.entries.push_back({term, weight(counts, term)});
  }
  std::sort(profile.entries.begin(), profile.entries.end(),
            [](const WeightedTerm& a, const WeightedTerm& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return a.term < b.term;
            });
  return profile;
}

WeightedTermVector TermProfiles::person_profile(const EntityId& person) const {
  return make_profile(person.str(), person_counts(person));
}

const WeightedTermVector& TermProfiles::profession_profile(
    const Label& profession) const {
  {
    std::lock_guard lock(cache_->mu);
    const auto it = cache_->profiles.find(profession);
    if (it != cache_->profiles.end()) return *it->second;
  }
  // Computed outside the lock; a racing thread computes the same profile and
  // the first insert wins.
  auto profile = std::make_unique<const WeightedTermVector>(
      make_profile(profession, profession_counts(profession)));
  std::lock_guard lock(cache_->mu);
  const auto [it, inserted] =
      cache_->profiles.try_emplace(profession, std::move(profile));
  return *it->second;
}

std::span<const WeightedTerm> TermProfiles::top_k_terms(const Label& profession,
                                                        std::size_t k) const {
  if (k == 0) throw ContractViolation("top_k_terms: k must be positive");
  const auto& entries = profession_profile(profession).entries;
  return std::span<const WeightedTerm>(entries).first(
      std::min(k, entries.size()));
}

}  // namespace tscore
