#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tscore/corpus.h"

namespace tscore {

// Pretrained word vectors, all of one dimension. Lookups are by exact
// token.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return rows_.size(); }

  // Inserts or replaces; returns false when the term was already present.
  bool set(std::string_view term, std::span<const float> values);
  std::optional<std::span<const float>> find(std::string_view term) const;

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> rows_;
  std::vector<float> data_;
};

// Text format: `term v1 ... vD` per line, single spaces, with an optional
// `count dim` header line. Throws LoadError on an empty file, a row of the
// wrong width (naming the line) or a non-finite component.
EmbeddingStore load_embeddings(const std::string& path);

struct Centroid {
  std::vector<double> values;
  std::size_t contributing_terms = 0;
};

struct TermWeight {
  std::string_view term;
  double weight = 0.0;
};

// sum of weight * vec(t) over the terms found in the store; others are
// skipped and not counted as contributing.
Centroid centroid(const EmbeddingStore& store,
                  std::span<const TermWeight> weighted_terms);

// sum of tf(t, par) * vec(t) over paragraph terms with |t| >= 4 and
// tf(t, par) >= 2, excluding stopwords and entity tokens.
Centroid paragraph_centroid(const EmbeddingStore& store,
                            std::span<const Term> paragraph,
                            const std::unordered_set<Term>& stopwords);

// Cosine similarity; 0 when either vector has zero norm. Throws
// ContractViolation on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const Centroid& u, const Centroid& v);

}  // namespace tscore
