#include "tscore/features.h"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "phrase_match.h"
#include "tscore/error.h"
#include "tscore/parallel.h"

namespace tscore {
namespace {

std::vector<std::string> make_profession_schema() {
  std::vector<std::string> names;
  for (const char* family : {"sumProfTerms", "simCos", "simCosVec"}) {
    for (const auto k : kTopKGrid) names.push_back(family + std::to_string(k));
  }
  names.push_back("simCosVecPar" + std::to_string(kParagraphTopK));
  for (const char* flag : {"isProfWPSent", "isProfWPPar", "isFirstProfWPSent",
                           "isFirstProfWPPar"}) {
    names.emplace_back(flag);
  }
  return names;
}

std::vector<std::string> make_nationality_schema() {
  std::vector<std::string> names;
  for (const char* base : {"freqPerNat", "isNatWPSent", "isNatWPPar",
                           "isFirstNatWPSent", "isFirstNatWPPar"}) {
    names.push_back(std::string(base) + "Adj");
    names.push_back(std::string(base) + "Noun");
  }
  return names;
}

// Running sums over a prefix of the profession profile T_k(pr).
struct PrefixSums {
  double sum_prof_terms = 0.0;
  double dot = 0.0;
  double person_norm2 = 0.0;
  double profession_norm2 = 0.0;
  std::vector<double> person_centroid;
  std::vector<double> profession_centroid;

  explicit PrefixSums(const EmbeddingStore* store) {
    if (store) {
      person_centroid.assign(store->dimension(), 0.0);
      profession_centroid.assign(store->dimension(), 0.0);
    }
  }

  void add(const TopTerm& t, const EmbeddingStore* store) {
    sum_prof_terms += t.profession_weight * static_cast<double>(t.person_tf);
    dot += t.person_weight * t.profession_weight;
    person_norm2 += t.person_weight * t.person_weight;
    profession_norm2 += t.profession_weight * t.profession_weight;
    if (!store) return;
    if (const auto vec = store->find(t.term)) {
      for (std::size_t i = 0; i < vec->size(); ++i) {
        const double x = (*vec)[i];
        person_centroid[i] += t.person_weight * x;
        profession_centroid[i] += t.profession_weight * x;
      }
    }
  }

  double sim_cos() const {
    if (person_norm2 == 0.0 || profession_norm2 == 0.0) return 0.0;
    return dot / (std::sqrt(person_norm2) * std::sqrt(profession_norm2));
  }
  double sim_cos_vec() const {
    return cosine(person_centroid, profession_centroid);
  }
};

PrefixSums sums_of(std::span<const TopTerm> top, const EmbeddingStore* store) {
  PrefixSums sums(store);
  for (const auto& t : top) sums.add(t, store);
  return sums;
}

double paragraph_cosine(const EmbeddingStore& store,
                        std::span<const Term> paragraph,
                        const std::unordered_set<Term>& stopwords,
                        const PrefixSums& top) {
  const auto par = paragraph_centroid(store, paragraph, stopwords);
  return cosine(par.values, top.profession_centroid);
}

// One pass over the profile, snapshotting the sums after the first
// min(k, n) entries for every k in `cutoffs` (ascending). Sharing the pass
// keeps every k consistent with evaluating it on its own.
std::vector<PrefixSums> accumulate(const FeatureContext& ctx,
                                   const ScopeCounts& person,
                                   const Label& profession,
                                   std::span<const std::size_t> cutoffs,
                                   bool with_vectors) {
  const auto& profiles = ctx.profiles();
  const auto& entries = profiles.profession_profile(profession).entries;
  const EmbeddingStore* store = with_vectors ? &ctx.require_embeddings() : nullptr;

  PrefixSums running(store);
  std::vector<PrefixSums> snapshots;
  snapshots.reserve(cutoffs.size());
  std::size_t next = 0;
  for (const std::size_t k : cutoffs) {
    const std::size_t limit = std::min(k, entries.size());
    for (; next < limit; ++next) {
      const auto& [term, pr_weight] = entries[next];
      running.add({ctx.index().term(term), pr_weight, profiles.weight(person, term),
                   person.tf(term)},
                  store);
    }
    snapshots.push_back(running);
  }
  return snapshots;
}

PrefixSums accumulate_one(const FeatureContext& ctx, const EntityId& person,
                          const Label& profession, std::size_t k,
                          bool with_vectors) {
  if (k == 0) throw ContractViolation("k must be positive");
  const auto counts = ctx.profiles().person_counts(person);
  const std::array<std::size_t, 1> cutoff = {k};
  return accumulate(ctx, counts, profession, cutoff, with_vectors).front();
}

double paragraph_similarity(const FeatureContext& ctx, const EntityId& person,
                            const PrefixSums& top100) {
  const Abstract* abstract = ctx.abstracts().find(person);
  if (abstract == nullptr || abstract->first_paragraph.empty()) return 0.0;
  return paragraph_cosine(ctx.require_embeddings(), abstract->first_paragraph,
                          ctx.profiles().stopwords(), top100);
}

detail::Pattern<Term> string_pattern(const std::vector<Term>& form,
                                     bool plural) {
  detail::Pattern<Term> pattern;
  for (const auto& token : form) pattern.push_back({token});
  if (plural && !pattern.empty()) pattern.back().push_back(form.back() + "s");
  return pattern;
}

std::vector<detail::Pattern<Term>> string_patterns(
    const std::vector<std::vector<Term>>& forms, bool plural) {
  std::vector<detail::Pattern<Term>> patterns;
  for (const auto& form : forms) patterns.push_back(string_pattern(form, plural));
  return patterns;
}

// Id-level patterns; a form with a token unknown to the index cannot match
// and is dropped.
std::vector<detail::Pattern<TermId>> id_patterns(
    const SentenceIndex& index, const std::vector<std::vector<Term>>& forms,
    bool plural) {
  std::vector<detail::Pattern<TermId>> patterns;
  for (const auto& form : forms) {
    detail::Pattern<TermId> pattern;
    bool usable = true;
    for (std::size_t i = 0; i < form.size() && usable; ++i) {
      std::vector<TermId> accepted;
      if (const auto id = index.find_term(form[i])) accepted.push_back(*id);
      if (plural && i + 1 == form.size()) {
        if (const auto id = index.find_term(form[i] + "s")) accepted.push_back(*id);
      }
      usable = !accepted.empty();
      pattern.push_back(std::move(accepted));
    }
    if (usable && !pattern.empty()) patterns.push_back(std::move(pattern));
  }
  return patterns;
}

struct FlagPair {
  bool occurs = false;
  bool first = false;
};

FlagPair flags_in(std::span<const Term> text,
                  const std::vector<detail::Pattern<Term>>& object_patterns,
                  const std::vector<std::vector<detail::Pattern<Term>>>& rivals) {
  const auto own = detail::earliest_match(text, object_patterns);
  if (!own) return {};
  bool first = true;
  for (const auto& rival_patterns : rivals) {
    const auto other = detail::earliest_match(text, rival_patterns);
    if (!other) continue;
    const bool wins = own->position < other->position ||
                      (own->position == other->position &&
                       own->length > other->length);
    if (!wins) {
      first = false;
      break;
    }
  }
  return {true, first};
}

}  // namespace

double sum_prof_terms(std::span<const TopTerm> top) {
  return sums_of(top, nullptr).sum_prof_terms;
}

double sim_cos(std::span<const TopTerm> top) { return sums_of(top, nullptr).sim_cos(); }

double sim_cos_vec(const EmbeddingStore& store, std::span<const TopTerm> top) {
  return sums_of(top, &store).sim_cos_vec();
}

double sim_cos_vec_par(const EmbeddingStore& store, std::span<const Term> paragraph,
                       const std::unordered_set<Term>& stopwords,
                       std::span<const TopTerm> top) {
  return paragraph_cosine(store, paragraph, stopwords, sums_of(top, &store));
}

const std::vector<std::string>& feature_schema(Relation relation) {
  static const std::vector<std::string> kProfession = make_profession_schema();
  static const std::vector<std::string> kNationality = make_nationality_schema();
  return relation == Relation::kProfession ? kProfession : kNationality;
}

FeatureContext::FeatureContext(const SentenceIndex& index,
                               const TermProfiles& profiles,
                               const EmbeddingStore* embeddings,
                               const AbstractStore& abstracts,
                               const KnowledgeBase& kb, FeatureOptions options)
    : index_(&index),
      profiles_(&profiles),
      embeddings_(embeddings),
      abstracts_(&abstracts),
      kb_(&kb),
      options_(options) {}

const EmbeddingStore& FeatureContext::require_embeddings() const {
  if (embeddings_ == nullptr) {
    throw ContractViolation("embedding-based features need an embedding store");
  }
  return *embeddings_;
}

void FeatureContext::note_unknown(Relation relation, const Label& label) const {
  std::lock_guard lock(warned_mu_);
  if (warned_.emplace(relation, label).second) {
    spdlog::warn("unknown {} '{}': corpus statistics are zero", to_string(relation),
                 label);
  }
}

double sum_prof_terms(const FeatureContext& ctx, const EntityId& person,
                      const Label& profession, std::size_t k) {
  return accumulate_one(ctx, person, profession, k, false).sum_prof_terms;
}

double sim_cos(const FeatureContext& ctx, const EntityId& person,
               const Label& profession, std::size_t k) {
  return accumulate_one(ctx, person, profession, k, false).sim_cos();
}

double sim_cos_vec(const FeatureContext& ctx, const EntityId& person,
                   const Label& profession, std::size_t k) {
  return accumulate_one(ctx, person, profession, k, true).sim_cos_vec();
}

double sim_cos_vec_par(const FeatureContext& ctx, const EntityId& person,
                       const Label& profession) {
  const auto top = accumulate_one(ctx, person, profession, kParagraphTopK, true);
  return paragraph_similarity(ctx, person, top);
}

TextFlags first_text_flags(const FeatureContext& ctx, const EntityId& person,
                           const Label& object, Relation relation,
                           DemonymForm form) {
  const Abstract* abstract = ctx.abstracts().find(person);
  if (abstract == nullptr) return {};

  const bool plural = ctx.options().plural_tolerance;
  const auto& kb = ctx.kb();
  const auto own = string_patterns(kb.surface_forms(relation, object, form), plural);
  std::vector<std::vector<detail::Pattern<Term>>> rivals;
  for (const auto& other : kb.objects_of(relation, person)) {
    if (other == object) continue;
    rivals.push_back(
        string_patterns(kb.surface_forms(relation, other, form), plural));
  }

  const auto sent = flags_in(abstract->first_sentence, own, rivals);
  const auto par = flags_in(abstract->first_paragraph, own, rivals);
  return {sent.occurs, par.occurs, sent.first, par.first};
}

double freq_per_nat(const FeatureContext& ctx, const EntityId& person,
                    const Label& nationality, DemonymForm form) {
  if (!ctx.kb().demonyms.contains(nationality)) {
    ctx.note_unknown(Relation::kNationality, nationality);
    return 0.0;
  }
  const auto& index = ctx.index();
  const auto postings = index.person_postings(person);
  if (postings.empty()) return 0.0;

  const auto patterns =
      id_patterns(index,
                  ctx.kb().surface_forms(Relation::kNationality, nationality, form),
                  ctx.options().plural_tolerance);
  if (patterns.empty()) return 0.0;

  std::size_t hits = 0;
  for (const SentencePos pos : postings) {
    const std::span<const TermId> tokens = index.sentence_at(pos).tokens;
    if (detail::contains_any(tokens, patterns)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(postings.size());
}

FeatureVector profession_features(const FeatureContext& ctx,
                                  const EntityId& person,
                                  const Label& profession) {
  if (!ctx.index().knows_profession(profession)) {
    ctx.note_unknown(Relation::kProfession, profession);
  }
  const auto counts = ctx.profiles().person_counts(person);
  const auto sums = accumulate(ctx, counts, profession, kTopKGrid, true);

  FeatureVector fv{Relation::kProfession, {}};
  fv.values.reserve(feature_schema(Relation::kProfession).size());
  for (const auto& s : sums) fv.values.push_back(s.sum_prof_terms);
  for (const auto& s : sums) fv.values.push_back(s.sim_cos());
  for (const auto& s : sums) fv.values.push_back(s.sim_cos_vec());

  const auto top100 = std::find(kTopKGrid.begin(), kTopKGrid.end(), kParagraphTopK);
  fv.values.push_back(paragraph_similarity(
      ctx, person, sums[static_cast<std::size_t>(top100 - kTopKGrid.begin())]));

  const auto flags =
      first_text_flags(ctx, person, profession, Relation::kProfession);
  fv.values.push_back(flags.in_sentence);
  fv.values.push_back(flags.in_paragraph);
  fv.values.push_back(flags.first_in_sentence);
  fv.values.push_back(flags.first_in_paragraph);
  return fv;
}

FeatureVector nationality_features(const FeatureContext& ctx,
                                   const EntityId& person,
                                   const Label& nationality) {
  constexpr std::array<DemonymForm, 2> kForms = {DemonymForm::kAdjective,
                                                 DemonymForm::kNoun};
  std::array<TextFlags, 2> flags;
  for (std::size_t f = 0; f < kForms.size(); ++f) {
    flags[f] = first_text_flags(ctx, person, nationality,
                                Relation::kNationality, kForms[f]);
  }

  FeatureVector fv{Relation::kNationality, {}};
  for (const auto form : kForms) {
    fv.values.push_back(freq_per_nat(ctx, person, nationality, form));
  }
  for (const auto& f : flags) fv.values.push_back(f.in_sentence);
  for (const auto& f : flags) fv.values.push_back(f.in_paragraph);
  for (const auto& f : flags) fv.values.push_back(f.first_in_sentence);
  for (const auto& f : flags) fv.values.push_back(f.first_in_paragraph);
  return fv;
}

FeatureVector extract_features(const FeatureContext& ctx, Relation relation,
                               const EntityId& person, const Label& object) {
  return relation == Relation::kProfession
             ? profession_features(ctx, person, object)
             : nationality_features(ctx, person, object);
}

std::vector<FeatureVector> extract_all(const FeatureContext& ctx,
                                       Relation relation,
                                       std::span<const SubjectObject> pairs,
                                       std::size_t jobs) {
  std::vector<FeatureVector> out(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    out[i] = extract_features(ctx, relation, pairs[i].subject, pairs[i].object);
  });
  return out;
}

}  // namespace tscore
