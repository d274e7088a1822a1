#include "cli.h"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "tables.h"
#include "tscore/corpus.h"
#include "tscore/embeddings.h"
#include "tscore/error.h"
#include "tscore/evalx.h"
#include "tscore/features.h"
#include "tscore/index.h"
#include "tscore/io.h"
#include "tscore/model.h"
#include "tscore/parallel.h"
#include "tscore/profiles.h"

namespace tscore::cli {
namespace {

constexpr const char* kFormats = R"(File formats (UTF-8, tab-separated unless noted):
  sentences      one sentence per line; entity mentions as [[mid|surface text]],
                 mid in m.xxx, /m/xxx or fb_xxx form
  professions    person_mid<TAB>label, one fact per line
  nationalities  person_mid<TAB>label, one fact per line
  demonyms       label<TAB>noun_forms<TAB>adjective_forms, forms comma-separated
  abstracts      person_mid<TAB>first_sentence<TAB>first_paragraph
  stopwords      one word per line (default: built-in English list)
  embeddings     text vectors: term v1 ... vD, space-separated, optional
                 "count dim" header line
  pairs          person_mid<TAB>label[<TAB>score], score an integer 0..7
  features       header person, object, feature names[, label]; one row per pair
  scores         subject<TAB>object<TAB>score
)";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // Inputs.
  std::string sentences;
  std::string index;
  std::string professions;
  std::string nationalities;
  std::string demonyms;
  std::string abstracts;
  std::string stopwords;
  std::string embeddings;
  std::string pairs;
  std::string features;
  std::string model;
  std::string truth;
  std::string predictions;
  bool plural_tolerance = false;

  // Outputs.
  std::string output;
  std::string metrics_json;

  std::string relation;
  std::string profession;
  std::string person;
  std::size_t top = 0;

  std::optional<std::size_t> trees;
  std::optional<std::size_t> max_features;
  std::size_t min_leaf = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::size_t folds = 5;
  int accuracy_threshold = kDefaultAccuracyThreshold;
  bool collapse = false;
  bool verbose = false;
};

void require_file(const std::string& path, const char* flag) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    throw LoadError(std::string(flag) + ": no such file: " + path);
  }
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_atomically(path, content);
  }
}

Relation relation_of(const Options& o) { return parse_relation(o.relation); }

ForestParams forest_params(const Options& o, Relation relation) {
  auto params = ForestParams::defaults_for(relation);
  if (o.trees) params.n_trees = *o.trees;
  if (o.max_features) params.max_features = *o.max_features;
  params.min_samples_leaf = o.min_leaf;
  params.seed = o.seed;
  return params;
}

// Every store the feature pipeline reads, loaded once per invocation.
struct Pipeline {
  KnowledgeBase kb;
  SentenceIndex index;
  std::unique_ptr<TermProfiles> profiles;
  std::optional<EmbeddingStore> embeddings;
  AbstractStore abstracts;
  std::unique_ptr<FeatureContext> ctx;
};

std::unique_ptr<Pipeline> load_pipeline(const Options& o, std::optional<Relation> relation) {
  require_file(o.sentences, "--sentences");
  require_file(o.index, "--index");
  require_file(o.professions, "--professions");
  require_file(o.nationalities, "--nationalities");
  require_file(o.demonyms, "--demonyms");
  require_file(o.abstracts, "--abstracts");
  require_file(o.stopwords, "--stopwords");
  require_file(o.embeddings, "--embeddings");
  if (o.sentences.empty() == o.index.empty()) {
    throw UsageError("give exactly one of --sentences and --index");
  }
  if (relation == Relation::kProfession && o.embeddings.empty()) {
    throw Error("profession features need word embeddings (--embeddings)");
  }

  const std::size_t jobs = resolve_jobs(o.jobs);
  auto p = std::make_unique<Pipeline>();
  p->kb = load_kb(o.professions, o.nationalities, o.demonyms);
  p->index = o.index.empty() ? build_index_from_file(o.sentences, p->kb, jobs)
                             : SentenceIndex::load(o.index, p->kb, jobs);
  p->profiles = std::make_unique<TermProfiles>(
      p->index, o.stopwords.empty() ? default_stopwords() : load_stopwords(o.stopwords));
  if (!o.embeddings.empty()) p->embeddings = load_embeddings(o.embeddings);
  if (!o.abstracts.empty()) p->abstracts = load_abstracts(o.abstracts);
  p->ctx = std::make_unique<FeatureContext>(
      p->index, *p->profiles, p->embeddings ? &*p->embeddings : nullptr, p->abstracts,
      p->kb, FeatureOptions{o.plural_tolerance});
  spdlog::info("index: {} sentences, {} terms", p->index.total_sentences(),
               p->index.vocabulary_size());
  return p;
}

// Feature rows for --pairs (extracted) or --features (read back).
std::vector<FeatureRow> feature_rows(const Options& o, Relation relation) {
  if (o.pairs.empty() == o.features.empty()) {
    throw UsageError("give exactly one of --pairs and --features");
  }
  if (!o.features.empty()) {
    require_file(o.features, "--features");
    return load_feature_table(o.features, relation);
  }
  require_file(o.pairs, "--pairs");
  const auto pairs = load_query_pairs(o.pairs);
  const auto pipeline = load_pipeline(o, relation);
  std::vector<SubjectObject> keys;
  for (const auto& p : pairs) keys.push_back({p.subject, p.object});
  auto vectors = extract_all(*pipeline->ctx, relation, keys, resolve_jobs(o.jobs));
  std::vector<FeatureRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    rows.push_back({pairs[i].raw_subject, pairs[i].raw_object, std::move(vectors[i]),
                    pairs[i].score});
  }
  return rows;
}

std::vector<LabeledInstance> labeled_instances(const std::vector<FeatureRow>& rows,
                                               const std::string& source) {
  std::vector<LabeledInstance> out;
  for (const auto& row : rows) {
    if (!row.label) throw LoadError(source + ": every pair needs a score 0..7");
    out.push_back({normalize_entity_id(row.subject), canonical_label(row.object),
                   row.features, *row.label});
  }
  return out;
}

std::string source_of(const Options& o) { return o.pairs.empty() ? o.features : o.pairs; }

void cmd_index(const Options& o) {
  require_file(o.sentences, "--sentences");
  const auto index = build_index_from_file(o.sentences, KnowledgeBase{}, resolve_jobs(o.jobs));
  index.save(o.output);
  spdlog::info("wrote {} ({} sentences, {} terms)", o.output, index.total_sentences(),
               index.vocabulary_size());
}

void cmd_dump_profile(const Options& o, std::ostream& out) {
  if (o.profession.empty() == o.person.empty()) {
    throw UsageError("give exactly one of --profession and --person");
  }
  const auto p = load_pipeline(o, std::nullopt);
  WeightedTermVector profile;
  if (!o.profession.empty()) {
    const Label label = canonical_label(o.profession);
    if (!p->index.knows_profession(label)) {
      spdlog::warn("profession '{}' has no members in the knowledge base", label);
    }
    profile = p->profiles->profession_profile(label);
  } else {
    profile = p->profiles->person_profile(normalize_entity_id(o.person));
  }
  std::string text = "term\tweight\n";
  const std::size_t n = o.top == 0 ? profile.entries.size()
                                   : std::min(o.top, profile.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = profile.entries[i];
    text += p->index.term(e.term) + '\t' + format_double(e.weight) + '\n';
  }
  emit(o.output, text, out);
}

void cmd_extract(const Options& o, std::ostream& out) {
  const Relation relation = relation_of(o);
  require_file(o.pairs, "--pairs");
  const auto rows = feature_rows(o, relation);
  emit(o.output, format_feature_table(relation, rows), out);
}

void cmd_train(const Options& o) {
  const Relation relation = relation_of(o);
  const auto instances = labeled_instances(feature_rows(o, relation), source_of(o));
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  for (const auto& inst : instances) {
    xs.push_back(inst.features);
    ys.push_back(inst.label);
  }
  const auto forest = train(xs, ys, forest_params(o, relation), resolve_jobs(o.jobs));
  forest.save(o.model);
  spdlog::info("wrote {} ({} trees over {} instances)", o.model, forest.trees().size(),
               xs.size());
}

void cmd_score(const Options& o, std::ostream& out) {
  const Relation relation = relation_of(o);
  require_file(o.model, "--model");
  const auto forest = RegressionForest::load(o.model);
  if (forest.relation() && *forest.relation() != relation) {
    throw ContractViolation(o.model + " is a " + std::string(to_string(*forest.relation())) +
                            " model, not " + std::string(to_string(relation)));
  }
  const auto rows = feature_rows(o, relation);
  std::vector<ScoreRow> scores;
  for (const auto& row : rows) {
    scores.push_back({row.subject, row.object, map_score(forest.predict(row.features))});
  }
  emit(o.output, format_scores(scores), out);
}

void cmd_evaluate(const Options& o, std::ostream& out) {
  require_file(o.predictions, "--predictions");
  require_file(o.truth, "--truth");
  const auto predicted = load_labeled_pairs(o.predictions);
  const auto truth = load_labeled_pairs(o.truth);
  std::map<std::pair<EntityId, Label>, int> by_key;
  for (const auto& p : predicted) {
    if (!by_key.emplace(std::pair{p.subject, p.object}, p.score).second) {
      throw LoadError(o.predictions + ": duplicate prediction for " + p.subject.str() +
                      " / " + p.object);
    }
  }
  std::vector<ScoredTriple> triples;
  for (const auto& t : truth) {
    const auto it = by_key.find({t.subject, t.object});
    if (it == by_key.end()) {
      throw LoadError(o.predictions + ": no prediction for " + t.subject.str() + " / " +
                      t.object);
    }
    triples.push_back({t.subject, t.object, it->second, t.score});
  }
  if (predicted.size() > truth.size()) {
    spdlog::warn("{} predictions have no truth row and are ignored",
                 predicted.size() - truth.size());
  }
  if (triples.empty()) throw LoadError(o.truth + ": no truth rows");
  const bool with_relation = !o.relation.empty();
  const Relation relation = with_relation ? relation_of(o) : Relation::kProfession;
  const auto report = evaluate(relation, triples, o.accuracy_threshold);
  out << format_report(report, with_relation);
  if (!o.metrics_json.empty()) {
    write_atomically(o.metrics_json, report_json(report, with_relation));
  }
}

void cmd_cv(const Options& o, std::ostream& out) {
  const Relation relation = relation_of(o);
  const auto instances = labeled_instances(feature_rows(o, relation), source_of(o));
  CvOptions options;
  options.folds = o.folds;
  options.seed = o.seed;
  options.accuracy_threshold = o.accuracy_threshold;
  options.jobs = resolve_jobs(o.jobs);
  const auto result = cross_validate(instances, forest_params(o, relation), options);
  out << format_report(result.report, true);
  if (!o.metrics_json.empty()) {
    write_atomically(o.metrics_json, report_json(result.report, true));
  }
  if (!o.output.empty()) {
    std::vector<ScoreRow> rows;
    for (const auto& p : result.predictions) {
      rows.push_back({p.subject.str(), p.object, p.predicted});
    }
    write_atomically(o.output, format_scores(rows));
  }
}

void cmd_importance(const Options& o, std::ostream& out) {
  require_file(o.model, "--model");
  const auto forest = RegressionForest::load(o.model);
  emit(o.output, format_importance_tsv(importance_report(forest, o.collapse)), out);
}

// Routes spdlog output to the caller's error stream for one run.
class LogScope {
 public:
  LogScope(std::ostream& err, bool verbose) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("tscore", sink);
    logger->set_pattern("%l: %v");
    logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
    spdlog::set_default_logger(logger);
  }
  ~LogScope() { spdlog::set_default_logger(previous_); }
  LogScope(const LogScope&) = delete;
  LogScope& operator=(const LogScope&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

void add_corpus_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--sentences", o.sentences, "Annotated sentence file")->group("Inputs");
  cmd->add_option("--index", o.index, "Index snapshot written by `tscore index`")
      ->group("Inputs");
  cmd->add_option("--professions", o.professions, "Person/profession facts")->group("Inputs");
  cmd->add_option("--nationalities", o.nationalities, "Person/nationality facts")
      ->group("Inputs");
  cmd->add_option("--demonyms", o.demonyms, "Demonym table for nationalities")
      ->group("Inputs");
  cmd->add_option("--stopwords", o.stopwords, "Stopword list (default: built-in English)")
      ->group("Inputs");
}

void add_feature_inputs(CLI::App* cmd, Options& o) {
  add_corpus_inputs(cmd, o);
  cmd->add_option("--abstracts", o.abstracts, "First sentences and paragraphs")
      ->group("Inputs");
  cmd->add_option("--embeddings", o.embeddings,
                  "Word vectors (required for profession features)")
      ->group("Inputs");
  cmd->add_flag("--plural-tolerance", o.plural_tolerance,
                "Also match labels with a trailing `s` on their last token");
}

void add_relation(CLI::App* cmd, Options& o, bool required) {
  auto* opt = cmd->add_option("--relation", o.relation, "profession or nationality")
                  ->check(CLI::IsMember({"profession", "nationality"}));
  if (required) opt->required();
}

void add_pairs_or_features(CLI::App* cmd, Options& o) {
  cmd->add_option("--pairs", o.pairs, "Pairs TSV; features are extracted from the inputs")
      ->group("Inputs");
  cmd->add_option("--features", o.features, "Feature table from `tscore extract`")
      ->group("Inputs");
}

void add_forest_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--trees", o.trees, "Trees in the forest (default 1000)")
      ->check(CLI::PositiveNumber)
      ->group("Forest");
  cmd->add_option("--max-features", o.max_features,
                  "Features tried per split (default 3 profession, 2 nationality)")
      ->check(CLI::PositiveNumber)
      ->group("Forest");
  cmd->add_option("--min-leaf", o.min_leaf, "Minimum training rows per leaf")
      ->check(CLI::PositiveNumber)
      ->capture_default_str()
      ->group("Forest");
  cmd->add_option("--seed", o.seed, "Seed for every random choice")
      ->capture_default_str()
      ->group("Forest");
}

void add_jobs(CLI::App* cmd, Options& o) {
  cmd->add_option("--jobs", o.jobs, "Worker threads; 0 uses every core")
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Scores knowledge-base triples for type-like relations on a 0..7 scale",
               "tscore"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file of flag values, one [section] per "
                 "subcommand; command-line flags override it");
  app.add_flag("-v,--verbose", o.verbose, "Log progress to stderr");

  auto* index = app.add_subcommand("index", "Build a sentence index snapshot");
  index->add_option("--sentences", o.sentences, "Annotated sentence file")->required();
  index->add_option("--output", o.output, "Snapshot path")->required();
  add_jobs(index, o);

  auto* dump = app.add_subcommand("dump-profile", "Print a TF.IDF term profile as TSV");
  add_corpus_inputs(dump, o);
  dump->add_option("--profession", o.profession, "Profession label");
  dump->add_option("--person", o.person, "Person id");
  dump->add_option("--top", o.top, "Only the first N terms (0 = all)")->capture_default_str();
  dump->add_option("--output", o.output, "Output path (default stdout)");
  add_jobs(dump, o);

  auto* extract = app.add_subcommand("extract", "Write the feature table for pairs");
  add_relation(extract, o, true);
  extract->add_option("--pairs", o.pairs, "Pairs TSV")->required()->group("Inputs");
  add_feature_inputs(extract, o);
  extract->add_option("--output", o.output, "Output path (default stdout)");
  add_jobs(extract, o);

  auto* train_cmd = app.add_subcommand("train", "Train a model on labeled pairs");
  add_relation(train_cmd, o, true);
  add_pairs_or_features(train_cmd, o);
  add_feature_inputs(train_cmd, o);
  train_cmd->add_option("--model", o.model, "Model output path")->required();
  add_forest_flags(train_cmd, o);
  add_jobs(train_cmd, o);

  auto* score = app.add_subcommand("score", "Score pairs with a trained model");
  add_relation(score, o, true);
  add_pairs_or_features(score, o);
  add_feature_inputs(score, o);
  score->add_option("--model", o.model, "Model from `tscore train`")->required();
  score->add_option("--output", o.output, "Scores TSV path (default stdout)");
  add_jobs(score, o);

  auto* eval = app.add_subcommand("evaluate", "Compare predicted scores with the truth");
  eval->add_option("--predictions", o.predictions, "Predicted scores TSV")->required();
  eval->add_option("--truth", o.truth, "True scores TSV")->required();
  add_relation(eval, o, false);
  eval->add_option("--accuracy-threshold", o.accuracy_threshold,
                   "Largest |predicted - truth| counted as accurate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval->add_option("--metrics-json", o.metrics_json, "Also write the metrics as JSON");

  auto* cv = app.add_subcommand("cv", "Cross-validate on labeled pairs");
  add_relation(cv, o, true);
  add_pairs_or_features(cv, o);
  add_feature_inputs(cv, o);
  add_forest_flags(cv, o);
  cv->add_option("--folds", o.folds, "Number of folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cv->add_option("--accuracy-threshold", o.accuracy_threshold,
                 "Largest |predicted - truth| counted as accurate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cv->add_option("--metrics-json", o.metrics_json, "Also write the metrics as JSON");
  cv->add_option("--output", o.output, "Write held-out predictions as a scores TSV");
  add_jobs(cv, o);

  auto* importance = app.add_subcommand("importance", "Rank a model's features");
  importance->add_option("--model", o.model, "Model from `tscore train`")->required();
  importance->add_flag("--collapse", o.collapse,
                       "Keep only the best k of each top-k feature family");
  importance->add_option("--output", o.output, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsageError;
  }

  LogScope logging(err, o.verbose);
  try {
    if (*index) cmd_index(o);
    if (*dump) cmd_dump_profile(o, out);
    if (*extract) cmd_extract(o, out);
    if (*train_cmd) cmd_train(o);
    if (*score) cmd_score(o, out);
    if (*eval) cmd_evaluate(o, out);
    if (*cv) cmd_cv(o, out);
    if (*importance) cmd_importance(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  out.flush();
  return kOk;
}

}  // namespace tscore::cli
