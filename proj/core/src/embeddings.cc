#include "tscore/embeddings.h"

#include <charconv>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "text_io.h"
#include "tscore/error.h"

namespace tscore {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ContractViolation("embedding dimension must be > 0");
}

bool EmbeddingStore::set(std::string_view term, std::span<const float> values) {
  if (values.size() != dimension_) {
    throw ContractViolation("embedding for '" + std::string(term) + "' has " +
                            std::to_string(values.size()) +
                            " components, expected " +
                            std::to_string(dimension_));
  }
  const auto [it, inserted] = rows_.try_emplace(std::string(term), size());
  if (inserted) {
    data_.insert(data_.end(), values.begin(), values.end());
  } else {
    std::copy(values.begin(), values.end(),
              data_.begin() + static_cast<std::ptrdiff_t>(it->second * dimension_));
  }
  return inserted;
}

std::optional<std::span<const float>> EmbeddingStore::find(
    std::string_view term) const {
  const auto it = rows_.find(std::string(term));
  if (it == rows_.end()) return std::nullopt;
  return std::span<const float>(data_).subspan(it->second * dimension_,
                                               dimension_);
}

EmbeddingStore load_embeddings(const std::string& path) {
  std::optional<EmbeddingStore> store;
  std::size_t expected_dim = 0;
  std::size_t header_count = 0;
  bool first = true;
  std::size_t duplicates = 0;
  std::vector<float> values;

  detail::for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_spaces(line);
    if (first) {
      first = false;
      std::size_t count = 0;
      std::size_t dim = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) &&
          parse_size(fields[1], dim)) {
        if (dim == 0) throw LoadError(path + ": header declares dimension 0");
        header_count = count;
        expected_dim = dim;
        return;
      }
    }
    if (fields.size() < 2) {
      throw LoadError(path + ":" + std::to_string(line_no) +
                      ": expected a term followed by its components");
    }
    const std::size_t dim = fields.size() - 1;
    if (expected_dim == 0) expected_dim = dim;
    if (dim != expected_dim) {
      throw LoadError(path + ":" + std::to_string(line_no) + ": row has " +
                      std::to_string(dim) + " components, expected " +
                      std::to_string(expected_dim));
    }
    if (!store) store.emplace(expected_dim);

    values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = fields[i + 1];
      float v = 0.0f;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw LoadError(path + ":" + std::to_string(line_no) +
                        ": bad component '" + std::string(f) + "'");
      }
      values[i] = v;
    }
    if (!store->set(fields[0], values)) ++duplicates;
  });

  if (!store) throw LoadError(path + ": no embedding rows");
  if (duplicates > 0) {
    spdlog::warn("{}: {} duplicate terms, last row kept", path, duplicates);
  }
  if (header_count != 0 && header_count != store->size() + duplicates) {
    spdlog::warn("{}: header declares {} rows, found {}", path, header_count,
                 store->size() + duplicates);
  }
  return std::move(*store);
}

Centroid centroid(const EmbeddingStore& store,
                  std::span<const TermWeight> weighted_terms) {
  Centroid c{std::vector<double>(store.dimension(), 0.0), 0};
  for (const auto& [term, weight] : weighted_terms) {
    const auto vec = store.find(term);
    if (!vec) continue;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      c.values[i] += weight * static_cast<double>((*vec)[i]);
    }
    ++c.contributing_terms;
  }
  return c;
}

Centroid paragraph_centroid(const EmbeddingStore& store,
                            std::span<const Term> paragraph,
                            const std::unordered_set<Term>& stopwords) {
  std::map<std::string_view, std::size_t> tf;
  for (const auto& token : paragraph) ++tf[token];

  std::vector<TermWeight> weighted;
  for (const auto& [term, count] : tf) {
    if (term.size() < 4 || count < 2) continue;
    if (is_entity_token(term) || stopwords.contains(std::string(term))) continue;
    weighted.push_back({term, static_cast<double>(count)});
  }
  return centroid(store, weighted);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ContractViolation("cosine: dimension mismatch (" +
                            std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine(const Centroid& u, const Centroid& v) {
  return cosine(std::span<const double>(u.values),
                std::span<const double>(v.values));
}

}  // namespace tscore
