#include "tables.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tscore/error.h"

namespace tscore::cli {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw LoadError(where + ": not a number: '" + field + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_feature_table(Relation relation, std::span<const FeatureRow> rows) {
  bool labeled = !rows.empty();
  for (const auto& row : rows) labeled = labeled && row.label.has_value();

  std::string out = "person\tobject";
  for (const auto& name : feature_schema(relation)) out += '\t' + name;
  if (labeled) out += "\tlabel";
  out += '\n';
  for (const auto& row : rows) {
    out += row.subject + '\t' + row.object;
    for (double v : row.features.values) out += '\t' + format_double(v);
    if (labeled) out += '\t' + std::to_string(*row.label);
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> load_feature_table(const std::string& path, Relation relation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  const auto& schema = feature_schema(relation);

  std::string line;
  if (!std::getline(in, line)) throw LoadError(path + ": empty feature table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_tabs(line);
  const bool labeled = header.size() == schema.size() + 3 && header.back() == "label";
  const bool shape_ok = header.size() == schema.size() + 2 + (labeled ? 1 : 0) &&
                        header[0] == "person" && header[1] == "object" &&
                        std::equal(schema.begin(), schema.end(), header.begin() + 2);
  if (!shape_ok) {
    throw ParseError(path + ": header does not match the " +
                         std::string(to_string(relation)) + " feature schema",
                     1);
  }

  std::vector<FeatureRow> rows;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != header.size()) {
      throw ParseError(path + ": expected " + std::to_string(header.size()) +
                           " columns, found " + std::to_string(cols.size()),
                       line_no);
    }
    const std::string where = path + ":" + std::to_string(line_no);
    FeatureRow row{cols[0], cols[1], {relation, {}}, std::nullopt};
    for (std::size_t i = 0; i < schema.size(); ++i) {
      row.features.values.push_back(parse_double(cols[i + 2], where));
    }
    if (labeled) {
      const double label = parse_double(cols.back(), where);
      if (label != static_cast<int>(label) || label < 0 || label > 7) {
        throw ParseError(path + ": label must be an integer 0..7", line_no);
      }
      row.label = static_cast<int>(label);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_scores(std::span<const ScoreRow> rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.subject + '\t' + row.object + '\t' + std::to_string(row.score) + '\n';
  }
  return out;
}

std::string format_report(const EvaluationReport& report, bool with_relation) {
  std::ostringstream out;
  if (with_relation) out << "relation\t" << to_string(report.relation) << '\n';
  out << "instances\t" << report.instances << '\n';
  out << "subjects\t" << report.subjects.size() << '\n';
  out << "accuracy\t" << format_double(report.accuracy) << '\n';
  out << "asd\t" << format_double(report.asd) << '\n';
  out << "kendall\t" << (report.kendall ? format_double(*report.kendall) : "n/a") << '\n';
  return out.str();
}

std::string report_json(const EvaluationReport& report, bool with_relation) {
  nlohmann::ordered_json j;
  if (with_relation) j["relation"] = std::string(to_string(report.relation));
  j["instances"] = report.instances;
  j["subjects"] = report.subjects.size();
  j["accuracy"] = report.accuracy;
  j["asd"] = report.asd;
  j["kendall"] = report.kendall ? nlohmann::ordered_json(*report.kendall) : nullptr;
  return j.dump(2) + "\n";
}

}  // namespace tscore::cli
