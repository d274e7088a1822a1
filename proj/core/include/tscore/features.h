#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tscore/corpus.h"
#include "tscore/embeddings.h"
#include "tscore/index.h"
#include "tscore/profiles.h"

namespace tscore {

// Profile sizes k for the top-k profession term features.
inline constexpr std::array<std::size_t, 6> kTopKGrid = {10, 50, 100,
                                                         200, 500, 1000};
inline constexpr std::size_t kParagraphTopK = 100;

// Ordered feature names. Profession: sumProfTerms{k}, simCos{k} and
// simCosVec{k} over kTopKGrid, then simCosVecPar100 and the four
// first-sentence/paragraph flags (23 in all). Nationality: freqPerNat and
// the four flags, each in adjective then noun form (10 in all).
const std::vector<std::string>& feature_schema(Relation relation);

struct FeatureVector {
  Relation relation = Relation::kProfession;
  std::vector<double> values;

  const std::vector<std::string>& names() const {
    return feature_schema(relation);
  }
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureOptions {
  // Also accept a trailing `s` on the final token of a label when matching
  // it in text.
  bool plural_tolerance = false;
};

// Read-only bundle of every store feature extraction needs. The embedding
// store may be null for nationality-only use; profession features then
// throw ContractViolation.
class FeatureContext {
 public:
  FeatureContext(const SentenceIndex& index, const TermProfiles& profiles,
                 const EmbeddingStore* embeddings,
                 const AbstractStore& abstracts, const KnowledgeBase& kb,
                 FeatureOptions options = {});

  const SentenceIndex& index() const { return *index_; }
  const TermProfiles& profiles() const { return *profiles_; }
  const EmbeddingStore* embeddings() const { return embeddings_; }
  const EmbeddingStore& require_embeddings() const;
  const AbstractStore& abstracts() const { return *abstracts_; }
  const KnowledgeBase& kb() const { return *kb_; }
  const FeatureOptions& options() const { return options_; }

  // Logs a warning the first time an unknown label is seen.
  void note_unknown(Relation relation, const Label& label) const;

 private:
  const SentenceIndex* index_;
  const TermProfiles* profiles_;
  const EmbeddingStore* embeddings_;
  const AbstractStore* abstracts_;
  const KnowledgeBase* kb_;
  FeatureOptions options_;
  mutable std::mutex warned_mu_;
  mutable std::set<std::pair<Relation, Label>> warned_;
};

// One entry of T_k(pr) together with the person's statistics for the term.
struct TopTerm {
  std::string_view term;
  double profession_weight = 0.0;
  double person_weight = 0.0;
  std::uint64_t person_tf = 0;
};

// The top-k features over explicit T_k(pr) entries. The context overloads
// below feed these from the TF.IDF profiles.
double sum_prof_terms(std::span<const TopTerm> top);
double sim_cos(std::span<const TopTerm> top);
double sim_cos_vec(const EmbeddingStore& store, std::span<const TopTerm> top);
double sim_cos_vec_par(const EmbeddingStore& store, std::span<const Term> paragraph,
                       const std::unordered_set<Term>& stopwords,
                       std::span<const TopTerm> top);

// sum over t in T_k(pr) of w(t, pr) * sum_{s in S(pe)} tf(t, s).
double sum_prof_terms(const FeatureContext& ctx, const EntityId& person,
                      const Label& profession, std::size_t k);

// Cosine between the person and profession TF.IDF weights restricted to the
// coordinates T_k(pr).
double sim_cos(const FeatureContext& ctx, const EntityId& person,
               const Label& profession, std::size_t k);

// Cosine between the TF.IDF-weighted embedding centroids of T_k(pr), using
// profession weights for one and person weights for the other.
double sim_cos_vec(const FeatureContext& ctx, const EntityId& person,
                   const Label& profession, std::size_t k);

// Cosine between the person's first-paragraph centroid and the profession
// centroid over T_100(pr). 0 without a stored paragraph.
double sim_cos_vec_par(const FeatureContext& ctx, const EntityId& person,
                       const Label& profession);

struct TextFlags {
  bool in_sentence = false;
  bool in_paragraph = false;
  bool first_in_sentence = false;
  bool first_in_paragraph = false;

  bool operator==(const TextFlags&) const = default;
};

// Occurrence of the object's surface forms in the person's first sentence
// and paragraph, and whether it is the earliest of the person's objects of
// this relation to occur there. An earlier start wins; at equal starts the
// longer match wins; a full tie gives the flag to neither. `form` selects the
// demonym form and is ignored for professions.
TextFlags first_text_flags(const FeatureContext& ctx, const EntityId& person,
                           const Label& object, Relation relation,
                           DemonymForm form = DemonymForm::kAdjective);

// |{s in S(pe) : a demonym of the selected form occurs in s}| / |S(pe)|.
double freq_per_nat(const FeatureContext& ctx, const EntityId& person,
                    const Label& nationality, DemonymForm form);

FeatureVector profession_features(const FeatureContext& ctx,
                                  const EntityId& person,
                                  const Label& profession);
FeatureVector nationality_features(const FeatureContext& ctx,
                                   const EntityId& person,
                                   const Label& nationality);
FeatureVector extract_features(const FeatureContext& ctx, Relation relation,
                               const EntityId& person, const Label& object);

struct SubjectObject {
  EntityId subject;
  Label object;
};

// Extracts every pair on up to `jobs` threads; output order follows input.
std::vector<FeatureVector> extract_all(const FeatureContext& ctx,
                                       Relation relation,
                                       std::span<const SubjectObject> pairs,
                                       std::size_t jobs = 1);

}  // namespace tscore
