#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "synthetic.h"
#include "test_support.h"
#include "tscore/corpus.h"
#include "tscore/embeddings.h"
#include "tscore/evalx.h"
#include "tscore/features.h"
#include "tscore/index.h"
#include "tscore/model.h"
#include "tscore/profiles.h"

using namespace tscore;

namespace {

// One on-disk world per persons count, built on first use.
struct Bench {
  testing::TempDir dir;
  synthetic::WorldFiles files;
  KnowledgeBase kb;
  SentenceIndex index;
  std::unique_ptr<TermProfiles> profiles;
  EmbeddingStore embeddings{1};
  AbstractStore abstracts;
  std::unique_ptr<FeatureContext> ctx;

  explicit Bench(std::size_t persons)
      : files(synthetic::write_world(dir.path(), {persons, 30, 1})),
        kb(load_kb(files.professions, files.nationalities, files.demonyms)),
        index(build_index_from_file(files.sentences, kb, 0)),
        profiles(std::make_unique<TermProfiles>(index, load_stopwords(files.stopwords))),
        embeddings(load_embeddings(files.embeddings)),
        abstracts(load_abstracts(files.abstracts)),
        ctx(std::make_unique<FeatureContext>(index, *profiles, &embeddings, abstracts, kb)) {}

  std::vector<LabeledInstance> instances(Relation relation) const {
    const auto pairs = load_labeled_pairs(relation == Relation::kProfession
                                              ? files.profession_pairs
                                              : files.nationality_pairs);
    std::vector<SubjectObject> keys;
    for (const auto& p : pairs) keys.push_back({p.subject, p.object});
    const auto vectors = extract_all(*ctx, relation, keys, 1);
    std::vector<LabeledInstance> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.push_back({pairs[i].subject, pairs[i].object, vectors[i], pairs[i].score});
    }
    return out;
  }
};

Bench& world(std::size_t persons) {
  static std::map<std::size_t, std::unique_ptr<Bench>> cache;
  auto& slot = cache[persons];
  if (!slot) slot = std::make_unique<Bench>(persons);
  return *slot;
}

void BM_BuildIndex(benchmark::State& state) {
  auto& w = world(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_index_from_file(w.files.sentences, w.kb, 1));
  }
  state.counters["sentences"] = static_cast<double>(w.files.sentence_count);
}
BENCHMARK(BM_BuildIndex)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExtractProfession(benchmark::State& state) {
  auto& w = world(static_cast<std::size_t>(state.range(0)));
  // Fresh profiles each round so cached profession vectors are rebuilt.
  for (auto _ : state) {
    TermProfiles profiles(w.index, load_stopwords(w.files.stopwords));
    FeatureContext ctx(w.index, profiles, &w.embeddings, w.abstracts, w.kb);
    const auto pairs = load_labeled_pairs(w.files.profession_pairs);
    std::vector<SubjectObject> keys;
    for (const auto& p : pairs) keys.push_back({p.subject, p.object});
    benchmark::DoNotOptimize(extract_all(ctx, Relation::kProfession, keys, 1));
  }
}
BENCHMARK(BM_ExtractProfession)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExtractNationality(benchmark::State& state) {
  auto& w = world(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(w.instances(Relation::kNationality));
}
BENCHMARK(BM_ExtractNationality)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state) {
  const auto instances = world(100).instances(Relation::kProfession);
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  for (const auto& inst : instances) {
    xs.push_back(inst.features);
    ys.push_back(inst.label);
  }
  auto params = ForestParams::defaults_for(Relation::kProfession);
  params.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(xs, ys, params, 1));
  state.counters["rows"] = static_cast<double>(xs.size());
}
BENCHMARK(BM_TrainForest)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
