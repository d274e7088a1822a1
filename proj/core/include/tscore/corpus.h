#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tscore {

// A lowercase token from the alphabet [a-z0-9_].
using Term = std::string;

// Canonical form of a profession or nationality label: its tokens joined by
// single spaces ("Singer-songwriter" -> "singer songwriter").
using Label = std::string;

enum class Relation { kProfession, kNationality };

std::string_view to_string(Relation relation);
// Accepts "profession" or "nationality"; throws ContractViolation otherwise.
Relation parse_relation(std::string_view text);

// Normalized knowledge-base identifier: `fb_` followed by [a-z0-9_]+.
class EntityId {
 public:
  EntityId() = default;

  // Wraps an already normalized id. Throws ParseError if `id` does not
  // match the normalized pattern.
  static EntityId from_normalized(std::string id);

  const std::string& str() const { return id_; }
  bool empty() const { return id_.empty(); }

  auto operator<=>(const EntityId&) const = default;

 private:
  explicit EntityId(std::string id) : id_(std::move(id)) {}
  std::string id_;
};

bool is_entity_token(std::string_view token);

// `m.06dfpq` -> `fb_06dfpq`. Also accepts `/m/06dfpq` and ids that are
// already normalized. Throws ParseError on empty or unusable input.
EntityId normalize_entity_id(std::string_view mid);

// Lowercases and splits on every character outside [a-z0-9_].
std::vector<Term> tokenize(std::string_view text);

// Throws ParseError when the label has no tokens.
Label canonical_label(std::string_view raw);

struct AnnotatedSentence {
  std::uint64_t sid = 0;
  std::vector<Term> tokens;
  std::vector<EntityId> mentions;  // sorted, unique

  bool operator==(const AnnotatedSentence&) const = default;
};

// Parses one line of the sentence file. Each `[[mid|surface]]` marker
// becomes a single entity token; the surface text is dropped. `line_no` is
// only used in error messages.
AnnotatedSentence parse_sentence_line(std::string_view line, std::uint64_t sid,
                                      std::size_t line_no = 0);

// Inverse of parse_sentence_line up to whitespace and case: mentioned
// entity tokens are written back as `[[id|id]]` markers.
std::string serialize_sentence(const AnnotatedSentence& sentence);

// True for lines that carry neither tokens nor markers; readers skip them.
bool is_blank_sentence_line(std::string_view line);

// Reads a whole sentence file; sid is the 0-based line number. Blank lines
// consume an sid but produce no sentence.
std::vector<AnnotatedSentence> read_sentences(std::istream& in);
std::vector<AnnotatedSentence> load_sentences(const std::string& path);

enum class DemonymForm { kAdjective, kNoun };

std::string_view to_string(DemonymForm form);

struct DemonymForms {
  std::vector<std::vector<Term>> nouns;
  std::vector<std::vector<Term>> adjectives;

  const std::vector<std::vector<Term>>& get(DemonymForm form) const {
    return form == DemonymForm::kAdjective ? adjectives : nouns;
  }
};

struct KnowledgeBase {
  // Labels per person keep file order, without duplicates.
  std::map<EntityId, std::vector<Label>> professions;
  std::map<EntityId, std::vector<Label>> nationalities;
  std::map<Label, DemonymForms> demonyms;

  // Persons holding each profession, sorted.
  std::map<Label, std::vector<EntityId>> profession_members() const;

  const std::vector<Label>& objects_of(Relation relation,
                                       const EntityId& person) const;

  // Token sequences that count as an occurrence of `label` in text. For
  // professions this is the label itself; for nationalities it is the
  // demonym table entry of the requested form, falling back to the label as
  // its own noun form when the table has no entry.
  std::vector<std::vector<Term>> surface_forms(Relation relation,
                                               const Label& label,
                                               DemonymForm form) const;
};

// Any path may be empty, which yields an empty mapping. Throws LoadError if a
// nationality label has no demonym entry.
KnowledgeBase load_kb(const std::string& professions_path,
                      const std::string& nationalities_path,
                      const std::string& demonyms_path);

struct Abstract {
  std::vector<Term> first_sentence;
  std::vector<Term> first_paragraph;
};

class AbstractStore {
 public:
  void insert(const EntityId& person, Abstract abstract);
  const Abstract* find(const EntityId& person) const;
  std::size_t size() const { return abstracts_.size(); }

 private:
  std::unordered_map<std::string, Abstract> abstracts_;
};

AbstractStore load_abstracts(const std::string& path);

std::unordered_set<Term> load_stopwords(const std::string& path);

// The built-in English list used when no stopword file is given.
const std::unordered_set<Term>& default_stopwords();

struct LabeledPair {
  EntityId subject;
  Label object;
  int score = 0;

  bool operator==(const LabeledPair&) const = default;
};

std::vector<LabeledPair> load_labeled_pairs(const std::string& path);

// A pair to be scored. The raw columns are kept so output can echo them.
struct QueryPair {
  EntityId subject;
  Label object;
  std::string raw_subject;
  std::string raw_object;
  std::optional<int> score;
};

// Same TSV layout as labeled pairs, with the score column optional.
std::vector<QueryPair> load_query_pairs(const std::string& path);

}  // namespace tscore

template <>
struct std::hash<tscore::EntityId> {
  std::size_t operator()(const tscore::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
