#include "tscore/evalx.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "tscore/error.h"
#include "tscore/random.h"

namespace tscore {
namespace {

void require_nonempty(std::span<const ScoredPair> pairs, const char* what) {
  if (pairs.empty()) {
    throw ContractViolation(std::string(what) + ": no scored pairs");
  }
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

// "simCos50" -> "simCos" when the name belongs to a top-k family.
std::optional<std::string> topk_family(const std::string& name) {
  std::size_t end = name.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(name[end - 1]))) --end;
  if (end == name.size()) return std::nullopt;
  const std::string base = name.substr(0, end);
  if (base == "sumProfTerms" || base == "simCos" || base == "simCosVec") {
    return base;
  }
  return std::nullopt;
}

}  // namespace

double accuracy(std::span<const ScoredPair> pairs, int threshold) {
  require_nonempty(pairs, "accuracy");
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    if (std::abs(p.predicted - p.truth) <= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double asd(std::span<const ScoredPair> pairs) {
  require_nonempty(pairs, "asd");
  double total = 0.0;
  for (const auto& p : pairs) total += std::abs(p.predicted - p.truth);
  return total / static_cast<double>(pairs.size());
}

double kendall_distance(std::span<const ScoredPair> group) {
  const std::size_t n = group.size();
  if (n < 2) throw ContractViolation("kendall_distance: need at least 2 triples");
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int dp = sign(group[i].predicted - group[j].predicted);
      const int dt = sign(group[i].truth - group[j].truth);
      if (dp == dt) continue;
      penalty += (dp == 0 || dt == 0) ? 0.5 : 1.0;
    }
  }
  return penalty / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double kendall_distance(std::span<const std::vector<ScoredPair>> groups) {
  double total = 0.0;
  std::size_t qualifying = 0;
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    total += kendall_distance(std::span<const ScoredPair>(group));
    ++qualifying;
  }
  if (qualifying == 0) {
    throw ContractViolation("kendall_distance: no subject has 2 or more triples");
  }
  return total / static_cast<double>(qualifying);
}

EvaluationReport evaluate(Relation relation,
                          std::span<const ScoredTriple> triples,
                          int accuracy_threshold) {
  if (triples.empty()) throw ContractViolation("evaluate: no triples");
  EvaluationReport report;
  report.relation = relation;
  report.instances = triples.size();

  std::vector<ScoredPair> all;
  std::map<EntityId, std::vector<ScoredPair>> by_subject;
  for (const auto& t : triples) {
    const ScoredPair p{static_cast<double>(t.predicted),
                       static_cast<double>(t.truth)};
    all.push_back(p);
    by_subject[t.subject].push_back(p);
  }
  report.accuracy = accuracy(all, accuracy_threshold);
  report.asd = asd(all);

  std::vector<std::vector<ScoredPair>> groups;
  for (auto& [subject, pairs] : by_subject) {
    SubjectBreakdown row{subject, pairs.size(), accuracy(pairs, accuracy_threshold),
                         asd(pairs), std::nullopt};
    if (pairs.size() >= 2) row.kendall = kendall_distance(pairs);
    report.subjects.push_back(std::move(row));
    groups.push_back(std::move(pairs));
  }
  const bool any_group = std::any_of(groups.begin(), groups.end(),
                                     [](const auto& g) { return g.size() >= 2; });
  if (any_group) report.kendall = kendall_distance(groups);
  return report;
}

std::vector<std::vector<EntityId>> assign_folds(std::span<const EntityId> subjects,
                                                std::size_t folds,
                                                std::uint64_t seed) {
  if (folds < 2) throw ContractViolation("cross-validation needs at least 2 folds");
  std::vector<EntityId> distinct(subjects.begin(), subjects.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < folds) {
    throw ContractViolation("cross-validation: " + std::to_string(distinct.size()) +
                            " subjects cannot fill " + std::to_string(folds) +
                            " folds");
  }
  Rng rng(seed);
  rng.shuffle(std::span<EntityId>(distinct));
  std::vector<std::vector<EntityId>> out(folds);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    out[i % folds].push_back(distinct[i]);
  }
  for (auto& fold : out) std::sort(fold.begin(), fold.end());
  return out;
}

CrossValidationResult cross_validate(std::span<const LabeledInstance> instances,
                                     const ForestParams& params,
                                     const CvOptions& options) {
  if (instances.size() < options.folds) {
    throw ContractViolation("cross-validation: fewer instances than folds");
  }
  std::vector<EntityId> subjects;
  for (const auto& inst : instances) subjects.push_back(inst.subject);
  const auto folds = assign_folds(subjects, options.folds, options.seed);

  std::map<EntityId, std::size_t> fold_by_subject;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& s : folds[f]) fold_by_subject[s] = f;
  }

  CrossValidationResult result;
  result.fold_of.resize(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    result.fold_of[i] = fold_by_subject.at(instances[i].subject);
  }
  result.predictions.resize(instances.size());

  // Folds run in order; each forest parallelizes over its trees.
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<FeatureVector> train_x;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (result.fold_of[i] == f) continue;
      train_x.push_back(instances[i].features);
      train_y.push_back(instances[i].label);
    }
    ForestParams fold_params = params;
    fold_params.seed = Rng::stream_seed(params.seed, f);
    const auto forest = train(train_x, train_y, fold_params, options.jobs);

    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (result.fold_of[i] != f) continue;
      const auto& inst = instances[i];
      result.predictions[i] = {inst.subject, inst.object,
                               map_score(forest.predict(inst.features)),
                               inst.label};
    }
  }

  const Relation relation = instances.front().features.relation;
  result.report = evaluate(relation, result.predictions, options.accuracy_threshold);
  return result;
}

std::vector<ImportanceRow> importance_report(const RegressionForest& forest,
                                             bool collapse) {
  const auto importances = feature_importance(forest);
  std::vector<ImportanceRow> rows;
  std::map<std::string, std::size_t> family_row;
  for (const auto& [name, value] : importances) {
    const auto family = collapse ? topk_family(name) : std::nullopt;
    if (!family) {
      rows.push_back({name, value});
      continue;
    }
    const auto [it, inserted] = family_row.try_emplace(*family, rows.size());
    if (inserted) {
      rows.push_back({name, value});
    } else if (value > rows[it->second].importance) {
      rows[it->second] = {name, value};
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) {
                     return a.importance > b.importance;
                   });
  return rows;
}

std::string format_importance_tsv(std::span<const ImportanceRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "# impurity: variance reduction (regression), normalized to sum 1\n";
  out << "feature\timportance\n";
  for (const auto& row : rows) out << row.feature << '\t' << row.importance << '\n';
  return out.str();
}

}  // namespace tscore
