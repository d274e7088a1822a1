#include "tscore/model.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.h"
#include "tscore/error.h"
#include "tscore/random.h"

using namespace tscore;

namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t c = 0; c < cols; ++c) d.feature_names.push_back("f" + std::to_string(c));
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> x(cols);
    for (auto& v : x) v = rng.uniform() * 10.0;
    const double label = std::min(7.0, std::floor(x[0] * 0.7 + rng.uniform()));
    d.add(x, label);
  }
  return d;
}

Dataset threshold_dataset() {
  Dataset d;
  d.feature_names = {"x"};
  for (int i = 0; i < 20; ++i) {
    const double x = i / 20.0 + 0.01;
    d.add(std::vector<double>{x}, x < 0.5 ? 0.0 : 7.0);
  }
  return d;
}

// A single hand-built tree: x0 <= 1 -> 2.0; else x1 <= 5 -> 4.5 else 6.0.
RegressionTree fixture_tree() {
  std::vector<TreeNode> nodes(5);
  nodes[0] = {0, 1.0, 1, 2, 4.0, 10, 1.0};
  nodes[1] = {-1, 0.0, -1, -1, 2.0, 4, 0.0};
  nodes[2] = {1, 5.0, 3, 4, 5.0, 6, 1.0};
  nodes[3] = {-1, 0.0, -1, -1, 4.5, 3, 0.0};
  nodes[4] = {-1, 0.0, -1, -1, 6.0, 3, 0.0};
  return RegressionTree(nodes);
}

RegressionTree constant_tree(double value) {
  return RegressionTree({TreeNode{-1, 0.0, -1, -1, value, 1, 0.0}});
}

}  // namespace

TEST_CASE("map_score table") {
  const std::vector<std::pair<double, int>> table = {
      {-5, 0},  {-0.3, 0}, {0, 0},    {0.49, 0}, {0.5, 1}, {3.4, 3},
      {3.5, 4}, {6.99, 7}, {7, 7},    {7.01, 7}, {8.2, 7}, {100, 7}};
  for (const auto& [raw, want] : table) {
    CAPTURE(raw);
    CHECK(map_score(raw) == want);
  }
  CHECK_THROWS_AS(map_score(std::nan("")), ContractViolation);
  CHECK_THROWS_AS(map_score(INFINITY), ContractViolation);
}

TEST_CASE("map_score is monotone with range 0..7") {
  int prev = map_score(-10.0);
  for (double x = -10.0; x <= 20.0; x += 0.01) {
    const int m = map_score(x);
    CHECK(m >= prev);
    CHECK((m >= 0 && m <= 7));
    prev = m;
  }
}

TEST_CASE("manual trace through a fixture tree") {
  const RegressionForest forest(std::nullopt, {"a", "b"}, ForestParams{}, {fixture_tree()});
  CHECK(forest.predict(std::vector<double>{0.5, 100.0}) == 2.0);
  CHECK(forest.predict(std::vector<double>{1.0, 0.0}) == 2.0);
  CHECK(forest.predict(std::vector<double>{1.5, 5.0}) == 4.5);
  CHECK(forest.predict(std::vector<double>{1.5, 5.1}) == 6.0);
  CHECK_THROWS_AS(forest.predict(std::vector<double>{1.0}), ContractViolation);

  const RegressionForest pair(std::nullopt, {"a"}, ForestParams{},
                              {constant_tree(2.0), constant_tree(6.0)});
  CHECK(pair.predict(std::vector<double>{0.0}) == 4.0);
}

TEST_CASE("constant labels predict the constant exactly") {
  Dataset d;
  d.feature_names = {"a", "b", "c"};
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    d.add(std::vector<double>{rng.uniform(), rng.uniform(), rng.uniform()}, 3.0);
  }
  const auto forest = train(d, {50, 2, 1, 9});
  for (int i = 0; i < 100; ++i) {
    CHECK(forest.predict(std::vector<double>{rng.uniform() * 5, rng.uniform(), -rng.uniform()}) ==
          3.0);
  }
}

TEST_CASE("threshold dataset is learned") {
  const auto d = threshold_dataset();
  const auto forest = train(d, {100, 1, 1, 3});
  double mse = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double e = forest.predict(d.row(i)) - d.labels[i];
    mse += e * e;
  }
  mse /= static_cast<double>(d.rows());
  CHECK(mse < 0.5);
}

TEST_CASE("predictions stay within the training label range") {
  const auto d = random_dataset(5, 80, 4);
  const auto forest = train(d, {60, 2, 1, 17});
  const auto [lo, hi] = std::minmax_element(d.labels.begin(), d.labels.end());
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform() * 30.0 - 10.0;
    const double p = forest.predict(x);
    CHECK(p >= *lo);
    CHECK(p <= *hi);
  }
}

TEST_CASE("leaf values are means of the labels routed there") {
  const auto d = random_dataset(8, 40, 3);
  const auto forest = train(d, {5, 3, 1, 2});
  for (const auto& tree : forest.trees()) {
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) continue;
      const auto& l = tree.nodes()[node.left];
      const auto& r = tree.nodes()[node.right];
      CHECK(l.samples + r.samples == node.samples);
      const double weighted = (l.value * l.samples + r.value * r.samples) / node.samples;
      CHECK(weighted == doctest::Approx(node.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("training is deterministic across runs and thread counts") {
  const auto d = random_dataset(9, 60, 5);
  const ForestParams params{40, 2, 1, 1234};
  const auto a = train(d, params, 1);
  const auto b = train(d, params, 1);
  const auto c = train(d, params, 4);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.serialize() == c.serialize());
  CHECK(a.serialize() != train(d, {40, 2, 1, 1235}).serialize());
}

TEST_CASE("training input validation") {
  Dataset one;
  one.feature_names = {"a"};
  one.add(std::vector<double>{1.0}, 1.0);
  CHECK_THROWS_AS(train(one, {10, 1, 1, 0}), TrainingError);
  const auto d = random_dataset(1, 10, 2);
  CHECK_THROWS_AS(train(d, {10, 3, 1, 0}), TrainingError);
  CHECK_THROWS_AS(train(d, {10, 0, 1, 0}), TrainingError);
}

TEST_CASE("min_samples_leaf is respected") {
  const auto d = random_dataset(12, 60, 3);
  const auto forest = train(d, {20, 2, 5, 4});
  for (const auto& tree : forest.trees()) {
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) CHECK(node.samples >= 5);
    }
  }
}

TEST_CASE("importance of a single decisive feature") {
  Dataset d;
  d.feature_names = {"noise", "signal", "constant"};
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    const double s = (i % 2) ? 1.0 : 0.0;
    d.add(std::vector<double>{static_cast<double>(i % 2), s, 5.0}, s * 7.0);
  }
  // "noise" equals "signal" above, so make it uninformative instead.
  for (std::size_t i = 0; i < d.rows(); ++i) d.values[i * 3] = rng.uniform();
  const auto forest = train(d, {50, 3, 1, 6});
  const auto imp = feature_importance(forest);
  REQUIRE(imp.size() == 3);
  CHECK(imp[1].first == "signal");
  CHECK(imp[1].second == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(imp[0].second == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(imp[2].second == 0.0);
}

TEST_CASE("importances are nonnegative and sum to one") {
  const auto d = random_dataset(21, 80, 6);
  const auto imp = feature_importance(train(d, {30, 2, 1, 5}));
  double sum = 0.0;
  for (const auto& [name, v] : imp) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  const RegressionForest stump(std::nullopt, {"a"}, ForestParams{}, {constant_tree(1.0)});
  CHECK(feature_importance(stump).front().second == 0.0);
}

TEST_CASE("serialization round trip") {
  testing::TempDir dir;
  const auto d = random_dataset(30, 50, 4);
  const auto forest = train(d, {25, 2, 1, 8});
  const auto path = dir.file("model.bin");
  forest.save(path);
  const auto loaded = RegressionForest::load(path);
  CHECK(loaded == forest);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform() * 10.0;
    CHECK(loaded.predict(x) == forest.predict(x));
  }

  SUBCASE("corrupted header") {
    auto bytes = testing::read_text(path);
    bytes[1] ^= 0x5a;
    CHECK_THROWS_AS(RegressionForest::deserialize(bytes), LoadError);
  }
  SUBCASE("unsupported version") {
    auto bytes = testing::read_text(path);
    bytes[8] = 99;
    CHECK_THROWS_AS(RegressionForest::deserialize(bytes), LoadError);
  }
  SUBCASE("truncated") {
    const auto bytes = testing::read_text(path);
    CHECK_THROWS_AS(RegressionForest::deserialize(bytes.substr(0, bytes.size() - 3)),
                    LoadError);
  }
  SUBCASE("trailing bytes") {
    CHECK_THROWS_AS(RegressionForest::deserialize(testing::read_text(path) + "x"),
                    LoadError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(RegressionForest::load(dir.file("none.bin")), LoadError);
  }
}

TEST_CASE("a profession model rejects nationality vectors") {
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    FeatureVector fv{Relation::kProfession, std::vector<double>(23)};
    for (auto& v : fv.values) v = rng.uniform();
    xs.push_back(fv);
    ys.push_back(i % 8);
  }
  const auto forest = train(xs, ys, {10, 3, 1, 1});
  testing::TempDir dir;
  forest.save(dir.file("m.bin"));
  const auto loaded = RegressionForest::load(dir.file("m.bin"));
  CHECK(loaded.relation() == Relation::kProfession);
  CHECK(loaded.schema() == feature_schema(Relation::kProfession));
  const FeatureVector nat{Relation::kNationality, std::vector<double>(10, 0.0)};
  CHECK_THROWS_AS(loaded.predict(nat), ContractViolation);
  CHECK_NOTHROW(loaded.predict(xs.front()));

  const auto s = score_triple(loaded, testing::id("fb_a"), "poet", xs.front());
  CHECK(s.mapped == map_score(s.raw));
}

TEST_CASE("relation defaults") {
  CHECK(ForestParams::defaults_for(Relation::kProfession).n_trees == 1000);
  CHECK(ForestParams::defaults_for(Relation::kProfession).max_features == 3);
  CHECK(ForestParams::defaults_for(Relation::kNationality).max_features == 2);
}
