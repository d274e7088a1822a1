#include "tscore/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "tscore/error.h"
#include "tscore/io.h"
#include "tscore/parallel.h"
#include "tscore/random.h"

namespace tscore {
namespace {

constexpr char kModelMagic[8] = {'T', 'S', 'R', 'F', 0, 0, 0, 0};
constexpr std::uint32_t kModelVersion = 1;

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const ForestParams& params, Rng rng)
      : data_(data), params_(params), rng_(std::move(rng)) {}

  RegressionTree grow() {
    const std::size_t n = data_.rows();
    std::vector<std::uint32_t> sample(n);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng_.below(n));

    struct Task {
      std::size_t node, begin, end;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Task> stack = {{0, 0, n}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::span<std::uint32_t> rows(sample.data() + task.begin,
                                          task.end - task.begin);
      auto& node = nodes[task.node];
      node.samples = static_cast<std::uint32_t>(rows.size());
      node.value = mean_label(rows);

      const auto split = best_split(rows);
      if (split.feature < 0) continue;

      const auto mid = std::stable_partition(
          rows.begin(), rows.end(), [&](std::uint32_t r) {
            return data_.row(r)[static_cast<std::size_t>(split.feature)] <=
                   split.threshold;
          });
      const std::size_t left_size = static_cast<std::size_t>(mid - rows.begin());

      node.feature = split.feature;
      node.threshold = split.threshold;
      node.impurity_decrease = split.gain;
      node.left = static_cast<std::int32_t>(nodes.size());
      node.right = node.left + 1;
      const Task left{static_cast<std::size_t>(node.left), task.begin,
                      task.begin + left_size};
      const Task right{static_cast<std::size_t>(node.right),
                       task.begin + left_size, task.end};
      nodes.resize(nodes.size() + 2);  // invalidates `node`
      stack.push_back(right);
      stack.push_back(left);
    }
    return RegressionTree(std::move(nodes));
  }

 private:
  double mean_label(std::span<const std::uint32_t> rows) const {
    const double first = data_.labels[rows.front()];
    if (std::all_of(rows.begin(), rows.end(),
                    [&](std::uint32_t r) { return data_.labels[r] == first; })) {
      return first;
    }
    double sum = 0.0;
    for (const auto r : rows) sum += data_.labels[r];
    return sum / static_cast<double>(rows.size());
  }

  Split best_split(std::span<const std::uint32_t> rows) {
    const std::size_t n = rows.size();
    const std::size_t min_leaf = params_.min_samples_leaf;
    if (n < 2 * min_leaf) return {};

    double lo = data_.labels[rows[0]];
    double hi = lo;
    double sum = 0.0;
    for (const auto r : rows) {
      lo = std::min(lo, data_.labels[r]);
      hi = std::max(hi, data_.labels[r]);
      sum += data_.labels[r];
    }
    if (lo == hi) return {};
    const double base = sum * sum / static_cast<double>(n);
    double parent_sse = 0.0;
    const double mean = sum / static_cast<double>(n);
    for (const auto r : rows) {
      const double d = data_.labels[r] - mean;
      parent_sse += d * d;
    }

    // Features are drawn in random order until max_features non-constant
    // ones have been examined or the schema is exhausted.
    std::vector<std::size_t> features(data_.cols());
    std::iota(features.begin(), features.end(), 0);
    Split best;
    double best_score = 0.0;
    std::size_t examined = 0;
    for (std::size_t drawn = 0;
         drawn < features.size() && examined < params_.max_features; ++drawn) {
      const std::size_t pick = drawn + rng_.below(features.size() - drawn);
      std::swap(features[drawn], features[pick]);
      const std::size_t f = features[drawn];

      column_.clear();
      for (const auto r : rows) column_.emplace_back(data_.row(r)[f], data_.labels[r]);
      std::sort(column_.begin(), column_.end());
      if (column_.front().first == column_.back().first) continue;
      ++examined;

      // Maximizing sl^2/nl + sr^2/nr is equivalent to minimizing the summed
      // child SSE.
      double left_sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        left_sum += column_[i - 1].second;
        if (column_[i - 1].first == column_[i].first) continue;
        if (i < min_leaf || n - i < min_leaf) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double right_sum = sum - left_sum;
        const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
        if (best.feature < 0 || score > best_score) {
          const double a = column_[i - 1].first;
          const double b = column_[i].first;
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;
          best = {static_cast<std::int32_t>(f), threshold, 0.0};
          best_score = score;
        }
      }
    }
    if (best.feature < 0) return {};
    best.gain = std::min(best_score - base, parent_sse);
    if (!(best.gain > 1e-12 * std::max(1.0, parent_sse))) return {};
    return best;
  }

  const Dataset& data_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::pair<double, double>> column_;
};

void validate(const Dataset& data, const ForestParams& params) {
  if (data.rows() < 2) {
    throw TrainingError("training needs at least 2 instances, got " +
                        std::to_string(data.rows()));
  }
  if (data.cols() == 0) throw TrainingError("training data has no features");
  if (data.values.size() != data.rows() * data.cols()) {
    throw TrainingError("training matrix does not match its schema");
  }
  if (params.n_trees == 0) throw TrainingError("n_trees must be positive");
  if (params.min_samples_leaf == 0) {
    throw TrainingError("min_samples_leaf must be positive");
  }
  if (params.max_features == 0 || params.max_features > data.cols()) {
    throw TrainingError("max_features must be in 1.." +
                        std::to_string(data.cols()) + ", got " +
                        std::to_string(params.max_features));
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(data.values.begin(), data.values.end(), finite) ||
      !std::all_of(data.labels.begin(), data.labels.end(), finite)) {
    throw TrainingError("training data contains non-finite values");
  }
}

RegressionForest train_impl(std::optional<Relation> relation,
                            const Dataset& data, const ForestParams& params,
                            std::size_t jobs) {
  validate(data, params);
  std::vector<RegressionTree> trees(params.n_trees);
  parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    TreeGrower grower(data, params, Rng::for_stream(params.seed, t));
    trees[t] = grower.grow();
  });
  return RegressionForest(relation, data.feature_names, params, std::move(trees));
}

}  // namespace

ForestParams ForestParams::defaults_for(Relation relation) {
  ForestParams params;
  params.max_features = relation == Relation::kProfession ? 3 : 2;
  return params;
}

void Dataset::add(std::span<const double> features, double label) {
  if (features.size() != cols()) {
    throw ContractViolation("dataset row has " + std::to_string(features.size()) +
                            " features, expected " + std::to_string(cols()));
  }
  values.insert(values.end(), features.begin(), features.end());
  labels.push_back(label);
}

const TreeNode& RegressionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    const bool go_left = x[static_cast<std::size_t>(node->feature)] <= node->threshold;
    node = &nodes_[static_cast<std::size_t>(go_left ? node->left : node->right)];
  }
  return *node;
}

RegressionForest::RegressionForest(std::optional<Relation> relation,
                                   std::vector<std::string> schema,
                                   ForestParams params,
                                   std::vector<RegressionTree> trees)
    : relation_(relation),
      schema_(std::move(schema)),
      params_(params),
      trees_(std::move(trees)) {}

double RegressionForest::predict(const FeatureVector& fv) const {
  if (relation_ && *relation_ != fv.relation) {
    throw ContractViolation("feature vector is for the " +
                            std::string(to_string(fv.relation)) +
                            " relation but the model scores " +
                            std::string(to_string(*relation_)));
  }
  return predict(std::span<const double>(fv.values));
}

double RegressionForest::predict(std::span<const double> x) const {
  if (x.size() != schema_.size()) {
    throw ContractViolation("feature vector has " + std::to_string(x.size()) +
                            " values, model expects " +
                            std::to_string(schema_.size()));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(x);
  return sum / static_cast<double>(trees_.size());
}

std::string RegressionForest::serialize() const {
  detail::ByteWriter out;
  out.put_raw(std::string_view(kModelMagic, sizeof(kModelMagic)));
  out.put(kModelVersion);
  out.put(static_cast<std::uint8_t>(relation_.has_value()));
  out.put(static_cast<std::uint8_t>(relation_.value_or(Relation::kProfession)));
  out.put(static_cast<std::uint64_t>(params_.n_trees));
  out.put(static_cast<std::uint64_t>(params_.max_features));
  out.put(static_cast<std::uint64_t>(params_.min_samples_leaf));
  out.put(params_.seed);
  out.put(static_cast<std::uint64_t>(schema_.size()));
  for (const auto& name : schema_) out.put_string(name);
  out.put(static_cast<std::uint64_t>(trees_.size()));
  for (const auto& tree : trees_) {
    out.put(static_cast<std::uint64_t>(tree.nodes().size()));
    for (const auto& node : tree.nodes()) {
      out.put(node.feature);
      out.put(node.threshold);
      out.put(node.left);
      out.put(node.right);
      out.put(node.value);
      out.put(node.samples);
      out.put(node.impurity_decrease);
    }
  }
  return out.take();
}

RegressionForest RegressionForest::deserialize(std::string_view bytes,
                                               const std::string& what) {
  detail::ByteReader in(bytes, what);
  if (in.get_raw(sizeof(kModelMagic)) !=
      std::string_view(kModelMagic, sizeof(kModelMagic))) {
    throw LoadError(what + ": not a model file");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw LoadError(what + ": unsupported model version " +
                    std::to_string(version));
  }
  const bool has_relation = in.get<std::uint8_t>() != 0;
  const auto relation_code = in.get<std::uint8_t>();
  if (relation_code > 1) throw LoadError(what + ": bad relation tag");
  std::optional<Relation> relation;
  if (has_relation) relation = static_cast<Relation>(relation_code);

  ForestParams params;
  params.n_trees = in.get<std::uint64_t>();
  params.max_features = in.get<std::uint64_t>();
  params.min_samples_leaf = in.get<std::uint64_t>();
  params.seed = in.get<std::uint64_t>();

  std::vector<std::string> schema(in.get_count(4));
  for (auto& name : schema) name = in.get_string();
  if (relation && schema != feature_schema(*relation)) {
    throw LoadError(what + ": schema does not match the " +
                    std::string(to_string(*relation)) + " features");
  }

  std::vector<RegressionTree> trees(in.get_count(8));
  if (trees.size() != params.n_trees || trees.empty()) {
    throw LoadError(what + ": tree count does not match parameters");
  }
  for (auto& tree : trees) {
    std::vector<TreeNode> nodes(in.get_count(40));
    if (nodes.empty()) throw LoadError(what + ": empty tree");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto& node = nodes[i];
      node.feature = in.get<std::int32_t>();
      node.threshold = in.get<double>();
      node.left = in.get<std::int32_t>();
      node.right = in.get<std::int32_t>();
      node.value = in.get<double>();
      node.samples = in.get<std::uint32_t>();
      node.impurity_decrease = in.get<double>();
      const auto child_ok = [&](std::int32_t c) {
        return c > static_cast<std::int64_t>(i) &&
               static_cast<std::size_t>(c) < nodes.size();
      };
      const bool ok =
          node.is_leaf()
              ? node.feature == -1 && node.left == -1 && node.right == -1
              : static_cast<std::size_t>(node.feature) < schema.size() &&
                    child_ok(node.left) && child_ok(node.right);
      if (!ok) throw LoadError(what + ": corrupt tree node");
    }
    tree = RegressionTree(std::move(nodes));
  }
  if (!in.done()) throw LoadError(what + ": trailing bytes after model");
  return RegressionForest(relation, std::move(schema), params, std::move(trees));
}

void RegressionForest::save(const std::string& path) const {
  write_atomically(path, serialize());
}

RegressionForest RegressionForest::load(const std::string& path) {
  return deserialize(read_file(path), path);
}

RegressionForest train(const Dataset& data, const ForestParams& params,
                       std::size_t jobs) {
  return train_impl(std::nullopt, data, params, jobs);
}

RegressionForest train(std::span<const FeatureVector> features,
                       std::span<const int> labels, const ForestParams& params,
                       std::size_t jobs) {
  if (features.empty()) throw TrainingError("no training instances");
  if (features.size() != labels.size()) {
    throw TrainingError("feature and label counts differ");
  }
  const Relation relation = features.front().relation;
  Dataset data{feature_schema(relation), {}, {}};
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].relation != relation) {
      throw TrainingError("training instances mix relations");
    }
    if (labels[i] < 0 || labels[i] > 7) {
      throw TrainingError("label " + std::to_string(labels[i]) +
                          " outside 0..7");
    }
    data.add(features[i].values, labels[i]);
  }
  return train_impl(relation, data, params, jobs);
}

int map_score(double raw) {
  if (!std::isfinite(raw)) throw ContractViolation("map_score: non-finite score");
  if (raw < 0.0) return 0;
  if (raw > 7.0) return 7;
  return static_cast<int>(std::round(raw));
}

TripleScore score_triple(const RegressionForest& forest, const EntityId& subject,
                         const Label& object, const FeatureVector& fv) {
  const double raw = forest.predict(fv);
  return {subject, object, raw, map_score(raw)};
}

std::vector<std::pair<std::string, double>> feature_importance(
    const RegressionForest& forest) {
  const auto& schema = forest.schema();
  std::vector<double> totals(schema.size(), 0.0);
  for (const auto& tree : forest.trees()) {
    const auto nodes = tree.nodes();
    const double n = nodes.front().samples;
    if (n == 0) continue;
    for (const auto& node : nodes) {
      if (node.is_leaf()) continue;
      totals[static_cast<std::size_t>(node.feature)] += node.impurity_decrease / n;
    }
  }
  const double trees = static_cast<double>(forest.trees().size());
  double sum = 0.0;
  for (auto& t : totals) {
    t /= trees;
    sum += t;
  }
  if (sum > 0.0) {
    for (auto& t : totals) t /= sum;
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) out.emplace_back(schema[i], totals[i]);
  return out;
}

}  // namespace tscore
