#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tscore/corpus.h"
#include "tscore/features.h"

namespace tscore {

struct ForestParams {
  std::size_t n_trees = 1000;
  // Features sampled without replacement at every split.
  std::size_t max_features = 3;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;

  // n = 1000 trees; m = 3 for profession and 2 for nationality.
  static ForestParams defaults_for(Relation relation);

  bool operator==(const ForestParams&) const = default;
};

// Dense row-major training data.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::vector<double> labels;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols(), cols());
  }
  void add(std::span<const double> features, double label);
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // mean bootstrap label reaching this node
  std::uint32_t samples = 0;
  double impurity_decrease = 0.0;  // parent SSE minus children SSE

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  std::span<const TreeNode> nodes() const { return nodes_; }
  const TreeNode& leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return leaf_for(x).value; }

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

class RegressionForest {
 public:
  RegressionForest(std::optional<Relation> relation,
                   std::vector<std::string> schema, ForestParams params,
                   std::vector<RegressionTree> trees);

  std::optional<Relation> relation() const { return relation_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const ForestParams& params() const { return params_; }
  std::span<const RegressionTree> trees() const { return trees_; }

  // Mean of the per-tree leaf values. Throws ContractViolation when the
  // vector's relation or width does not match the forest.
  double predict(const FeatureVector& fv) const;
  double predict(std::span<const double> x) const;

  std::string serialize() const;
  static RegressionForest deserialize(std::string_view bytes,
                                      const std::string& what = "model");
  void save(const std::string& path) const;
  static RegressionForest load(const std::string& path);

  bool operator==(const RegressionForest&) const = default;

 private:
  std::optional<Relation> relation_;
  std::vector<std::string> schema_;
  ForestParams params_;
  std::vector<RegressionTree> trees_;
};

// Breiman random forest regression: every tree is grown on a bootstrap
// sample of the rows; every split samples `max_features` features and takes
// the midpoint threshold with the largest variance reduction. Results depend
// only on (data, params), never on `jobs`.
RegressionForest train(const Dataset& data, const ForestParams& params,
                       std::size_t jobs = 1);

// Same, for extracted feature vectors of one relation with integer labels.
RegressionForest train(std::span<const FeatureVector> features,
                       std::span<const int> labels, const ForestParams& params,
                       std::size_t jobs = 1);

// Clamp to [0, 7], round half away from zero. Throws ContractViolation on
// non-finite input.
int map_score(double raw);

struct TripleScore {
  EntityId subject;
  Label object;
  double raw = 0.0;
  int mapped = 0;
};

TripleScore score_triple(const RegressionForest& forest, const EntityId& subject,
                         const Label& object, const FeatureVector& fv);

// Mean over trees of the sample-weighted impurity (variance) decrease per
// feature, normalized to sum to 1; all zeros when no tree has a split.
// Schema order.
std::vector<std::pair<std::string, double>> feature_importance(
    const RegressionForest& forest);

}  // namespace tscore
