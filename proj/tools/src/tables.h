#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscore/corpus.h"
#include "tscore/evalx.h"
#include "tscore/features.h"

namespace tscore::cli {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Feature table: header `person object <schema...> [label]`, then one row
// per pair. The label column is present only when every row has a score.
struct FeatureRow {
  std::string subject;
  std::string object;
  FeatureVector features;
  std::optional<int> label;
};

std::string format_feature_table(Relation relation, std::span<const FeatureRow> rows);

// Reads a table written by format_feature_table. Throws ParseError when the
// header does not match the relation's schema.
std::vector<FeatureRow> load_feature_table(const std::string& path, Relation relation);

struct ScoreRow {
  std::string subject;
  std::string object;
  int score = 0;
};

// `subject object score` rows without a header.
std::string format_scores(std::span<const ScoreRow> rows);

std::string format_report(const EvaluationReport& report, bool with_relation);
std::string report_json(const EvaluationReport& report, bool with_relation);

}  // namespace tscore::cli
