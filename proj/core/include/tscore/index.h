#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tscore/corpus.h"

namespace tscore {

// Terms are interned in lexicographic order, so comparing ids compares the
// underlying strings.
using TermId = std::uint32_t;

// Position of a sentence in the index store, which is sorted by sid.
using SentencePos = std::uint32_t;

struct StoredSentence {
  std::uint64_t sid = 0;
  std::vector<TermId> tokens;
  std::vector<TermId> mentions;  // entity tokens, sorted, unique
};

struct TermStats {
  std::uint64_t doc_freq = 0;
  std::uint64_t total_sentences = 0;

  bool operator==(const TermStats&) const = default;
};

// Corpus-wide statistics over annotated sentences: |S|, per-term sentence
// frequencies, and the sentence sets of persons S(pe) and professions S(pr).
// Immutable once built; safe to share between threads.
class SentenceIndex {
 public:
  SentenceIndex();
  ~SentenceIndex();
  SentenceIndex(SentenceIndex&&) noexcept;
  SentenceIndex& operator=(SentenceIndex&&) noexcept;

  std::size_t total_sentences() const { return sentences_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }

  std::optional<TermId> find_term(std::string_view term) const;
  const Term& term(TermId id) const { return terms_[id]; }

  // Number of sentences that contain the term at least once.
  std::uint64_t doc_freq(TermId id) const { return doc_freq_[id]; }
  TermStats term_stats(std::string_view term) const;

  std::span<const StoredSentence> sentences() const { return sentences_; }
  const StoredSentence& sentence_at(SentencePos pos) const {
    return sentences_[pos];
  }

  // Sorted store positions of the sentences mentioning the person.
  std::span<const SentencePos> person_postings(const EntityId& person) const;
  // Union of the postings of every person holding the profession. Filled on
  // first use and cached; concurrent callers are safe.
  std::span<const SentencePos> profession_postings(const Label& profession) const;

  // Same sets as sentence ids. Unknown keys give an empty set.
  std::vector<std::uint64_t> sentences_of(const EntityId& person) const;
  std::vector<std::uint64_t> sentences_of(const Label& profession) const;

  const std::vector<EntityId>& profession_members(const Label& profession) const;
  bool knows_profession(const Label& profession) const {
    return members_.contains(profession);
  }

  // Binary snapshot of terms and sentences. Statistics are recomputed on
  // load, so the snapshot stays valid for any knowledge base.
  void save(const std::string& path) const;
  static SentenceIndex load(const std::string& path, const KnowledgeBase& kb,
                            std::size_t jobs = 1);

 private:
  friend class IndexBuilder;
  struct ProfessionCache;

  static SentenceIndex assemble(std::vector<Term> terms,
                                std::vector<StoredSentence> sentences,
                                const KnowledgeBase& kb, std::size_t jobs);
  std::vector<std::uint64_t> to_sids(std::span<const SentencePos> postings) const;

  std::vector<Term> terms_;
  std::unordered_map<std::string_view, TermId> term_ids_;
  std::vector<std::uint32_t> doc_freq_;
  std::vector<StoredSentence> sentences_;
  std::unordered_map<EntityId, std::vector<SentencePos>> person_postings_;
  std::unordered_map<Label, std::vector<EntityId>> members_;
  std::unique_ptr<ProfessionCache> cache_;
};

// Streaming construction: sentences are interned as they arrive, so only
// token ids are held in memory. finish() renumbers terms lexicographically,
// sorts by sid and derives all statistics, so the result does not depend on
// the order of add() calls.
class IndexBuilder {
 public:
  void add(const AnnotatedSentence& sentence);
  std::size_t size() const { return sentences_.size(); }

  // Throws BuildError on duplicate sentence ids.
  SentenceIndex finish(const KnowledgeBase& kb, std::size_t jobs = 1) &&;

 private:
  TermId intern(const Term& term);

  std::unordered_map<Term, TermId> ids_;
  std::vector<Term> terms_;
  std::vector<StoredSentence> sentences_;
};

SentenceIndex build_index(std::span<const AnnotatedSentence> sentences,
                          const KnowledgeBase& kb, std::size_t jobs = 1);

// Streams a sentence file straight into an IndexBuilder.
SentenceIndex build_index_from_file(const std::string& path,
                                    const KnowledgeBase& kb,
                                    std::size_t jobs = 1);

}  // namespace tscore
