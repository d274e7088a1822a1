#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscore/corpus.h"
#include "tscore/features.h"
#include "tscore/model.h"

namespace tscore {

struct ScoredPair {
  double predicted = 0.0;
  double truth = 0.0;
};

inline constexpr int kDefaultAccuracyThreshold = 2;

// Fraction of pairs with |predicted - truth| <= threshold.
double accuracy(std::span<const ScoredPair> pairs,
                int threshold = kDefaultAccuracyThreshold);

// Mean |predicted - truth|.
double asd(std::span<const ScoredPair> pairs);

// Normalized Kendall tau distance of one subject's triples: a discordant
// pair counts 1, a pair tied in exactly one ordering counts 0.5, and the
// total is divided by n(n-1)/2. Needs at least 2 pairs.
double kendall_distance(std::span<const ScoredPair> group);

// Average of the per-subject distances over subjects with >= 2 triples.
// Throws ContractViolation when no subject qualifies.
double kendall_distance(std::span<const std::vector<ScoredPair>> groups);

struct ScoredTriple {
  EntityId subject;
  Label object;
  int predicted = 0;
  int truth = 0;
};

struct SubjectBreakdown {
  EntityId subject;
  std::size_t triples = 0;
  double accuracy = 0.0;
  double asd = 0.0;
  std::optional<double> kendall;  // absent with fewer than 2 triples
};

struct EvaluationReport {
  Relation relation = Relation::kProfession;
  double accuracy = 0.0;
  double asd = 0.0;
  std::optional<double> kendall;  // absent when no subject has 2 triples
  std::size_t instances = 0;
  std::vector<SubjectBreakdown> subjects;  // sorted by subject
};

EvaluationReport evaluate(Relation relation,
                          std::span<const ScoredTriple> triples,
                          int accuracy_threshold = kDefaultAccuracyThreshold);

struct LabeledInstance {
  EntityId subject;
  Label object;
  FeatureVector features;
  int label = 0;
};

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  int accuracy_threshold = kDefaultAccuracyThreshold;
  std::size_t jobs = 1;
};

// Distinct subjects, sorted, shuffled with `seed` and dealt round-robin
// into `folds` groups. Throws ContractViolation with fewer subjects than
// folds.
std::vector<std::vector<EntityId>> assign_folds(std::span<const EntityId> subjects,
                                                std::size_t folds,
                                                std::uint64_t seed);

struct CrossValidationResult {
  EvaluationReport report;
  std::vector<std::size_t> fold_of;     // per input instance
  std::vector<ScoredTriple> predictions;  // input order
};

// k-fold cross-validation with whole subjects per fold. Each fold's forest
// uses the stream seed derived from (params.seed, fold); metrics are pooled
// over all held-out predictions.
CrossValidationResult cross_validate(std::span<const LabeledInstance> instances,
                                     const ForestParams& params,
                                     const CvOptions& options);

struct ImportanceRow {
  std::string feature;
  double importance = 0.0;
};

// Descending importance. With `collapse`, each top-k family
// (sumProfTerms, simCos, simCosVec) keeps only its best variant.
std::vector<ImportanceRow> importance_report(const RegressionForest& forest,
                                             bool collapse = false);

std::string format_importance_tsv(std::span<const ImportanceRow> rows);

}  // namespace tscore
