#include "tscore/corpus.h"

#include <algorithm>
#include <charconv>

#include <spdlog/spdlog.h>

#include "tscore/error.h"
#include "text_io.h"

namespace tscore {
namespace {

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void append_tokens(std::string_view text, std::vector<Term>& out) {
  Term current;
  for (const char raw : text) {
    const char c = ascii_lower(raw);
    if (is_token_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
}

void push_unique(std::vector<Label>& labels, Label label) {
  if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
    labels.push_back(std::move(label));
  }
}

void load_facts(const std::string& path,
                std::map<EntityId, std::vector<Label>>& facts) {
  if (path.empty()) return;
  detail::for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 2) {
      throw ParseError(path + ": expected person<TAB>label", line_no);
    }
    EntityId person;
    Label label;
    try {
      person = normalize_entity_id(cols[0]);
      label = canonical_label(cols[1]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
    push_unique(facts[person], std::move(label));
  });
}

std::vector<std::vector<Term>> parse_forms(std::string_view field) {
  std::vector<std::vector<Term>> forms;
  for (const auto part : detail::split(field, ',')) {
    auto tokens = tokenize(part);
    if (tokens.empty()) continue;
    if (std::find(forms.begin(), forms.end(), tokens) == forms.end()) {
      forms.push_back(std::move(tokens));
    }
  }
  return forms;
}

int parse_score(std::string_view field, const std::string& path,
                std::size_t line_no) {
  field = detail::trim(field);
  int score = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), score);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(path + ": score '" + std::string(field) +
                         "' is not an integer",
                     line_no);
  }
  if (score < 0 || score > 7) {
    throw ParseError(
        path + ": score " + std::to_string(score) + " outside 0..7", line_no);
  }
  return score;
}

std::vector<QueryPair> read_pairs(const std::string& path,
                                  bool require_score) {
  std::vector<QueryPair> pairs;
  detail::for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    const auto cols = detail::split(line, '\t');
    const bool shape_ok = require_score
                              ? cols.size() == 3
                              : (cols.size() == 2 || cols.size() == 3);
    if (!shape_ok) {
      throw ParseError(path + (require_score
                                   ? ": expected person<TAB>label<TAB>score"
                                   : ": expected person<TAB>label[<TAB>score]"),
                       line_no);
    }
    QueryPair pair;
    try {
      pair.subject = normalize_entity_id(cols[0]);
      pair.object = canonical_label(cols[1]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
    pair.raw_subject = std::string(detail::trim(cols[0]));
    pair.raw_object = std::string(detail::trim(cols[1]));
    if (cols.size() == 3) pair.score = parse_score(cols[2], path, line_no);
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

}  // namespace

bool is_blank_sentence_line(std::string_view line) {
  return line.find("[[") == std::string_view::npos &&
         std::none_of(line.begin(), line.end(),
                      [](char c) { return is_token_char(ascii_lower(c)); });
}

std::string_view to_string(Relation relation) {
  return relation == Relation::kProfession ? "profession" : "nationality";
}

Relation parse_relation(std::string_view text) {
  if (text == "profession") return Relation::kProfession;
  if (text == "nationality") return Relation::kNationality;
  throw ContractViolation("unknown relation '" + std::string(text) +
                          "' (expected profession or nationality)");
}

std::string_view to_string(DemonymForm form) {
  return form == DemonymForm::kAdjective ? "adjective" : "noun";
}

bool is_entity_token(std::string_view token) {
  return token.size() > 3 && token.substr(0, 3) == "fb_";
}

EntityId EntityId::from_normalized(std::string id) {
  if (!is_entity_token(id) ||
      !std::all_of(id.begin(), id.end(), is_token_char)) {
    throw ParseError("'" + id + "' is not a normalized entity id", 0);
  }
  return EntityId(std::move(id));
}

EntityId normalize_entity_id(std::string_view mid) {
  mid = detail::trim(mid);
  if (mid.empty()) throw ParseError("empty entity id", 0);

  std::string id;
  id.reserve(mid.size() + 2);
  for (const char c : mid) id.push_back(ascii_lower(c));

  if (id.starts_with("m.")) {
    id = "fb_" + id.substr(2);
  } else if (id.starts_with("/m/")) {
    id = "fb_" + id.substr(3);
  } else if (!id.starts_with("fb_")) {
    throw ParseError("malformed entity id '" + std::string(mid) + "'", 0);
  }
  std::replace(id.begin(), id.end(), '.', '_');
  std::replace(id.begin(), id.end(), '/', '_');
  return EntityId::from_normalized(std::move(id));
}

std::vector<Term> tokenize(std::string_view text) {
  std::vector<Term> out;
  append_tokens(text, out);
  return out;
}

Label canonical_label(std::string_view raw) {
  const auto tokens = tokenize(raw);
  if (tokens.empty()) {
    throw ParseError("label '" + std::string(raw) + "' has no tokens", 0);
  }
  Label label = tokens.front();
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    label += ' ';
    label += tokens[i];
  }
  return label;
}

AnnotatedSentence parse_sentence_line(std::string_view line, std::uint64_t sid,
                                      std::size_t line_no) {
  AnnotatedSentence sentence;
  sentence.sid = sid;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t open = line.find("[[", pos);
    if (open == std::string_view::npos) {
      append_tokens(line.substr(pos), sentence.tokens);
      break;
    }
    append_tokens(line.substr(pos, open - pos), sentence.tokens);
    const std::size_t close = line.find("]]", open + 2);
    if (close == std::string_view::npos) {
      throw ParseError("unterminated [[ marker", line_no);
    }
    const std::string_view body = line.substr(open + 2, close - open - 2);
    const std::string_view mid = body.substr(0, body.find('|'));
    EntityId id;
    try {
      id = normalize_entity_id(mid);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    sentence.tokens.push_back(id.str());
    sentence.mentions.push_back(std::move(id));
    pos = close + 2;
  }
  if (sentence.tokens.empty()) throw ParseError("sentence has no tokens", line_no);

  std::sort(sentence.mentions.begin(), sentence.mentions.end());
  sentence.mentions.erase(
      std::unique(sentence.mentions.begin(), sentence.mentions.end()),
      sentence.mentions.end());
  return sentence;
}

std::string serialize_sentence(const AnnotatedSentence& sentence) {
  std::string out;
  for (const auto& token : sentence.tokens) {
    if (!out.empty()) out += ' ';
    const bool mentioned =
        is_entity_token(token) &&
        std::binary_search(sentence.mentions.begin(), sentence.mentions.end(),
                           EntityId::from_normalized(token));
    if (mentioned) {
      out += "[[" + token + "|" + token + "]]";
    } else {
      out += token;
    }
  }
  return out;
}

std::vector<AnnotatedSentence> read_sentences(std::istream& in) {
  std::vector<AnnotatedSentence> sentences;
  std::string line;
  std::uint64_t sid = 0;
  std::size_t skipped = 0;
  for (; std::getline(in, line); ++sid) {
    const std::string_view view = detail::strip_cr(line);
    if (detail::trim(view).empty()) continue;
    if (is_blank_sentence_line(view)) {
      ++skipped;
      continue;
    }
    sentences.push_back(parse_sentence_line(view, sid, sid + 1));
  }
  if (skipped > 0) spdlog::debug("skipped {} token-less sentence lines", skipped);
  return sentences;
}

std::vector<AnnotatedSentence> load_sentences(const std::string& path) {
  auto in = detail::open_input(path);
  try {
    return read_sentences(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::map<Label, std::vector<EntityId>> KnowledgeBase::profession_members()
    const {
  std::map<Label, std::vector<EntityId>> members;
  // `professions` iterates persons in sorted order, so each list is sorted.
  for (const auto& [person, labels] : professions) {
    for (const auto& label : labels) members[label].push_back(person);
  }
  return members;
}

const std::vector<Label>& KnowledgeBase::objects_of(
    Relation relation, const EntityId& person) const {
  static const std::vector<Label> kNone;
  const auto& facts =
      relation == Relation::kProfession ? professions : nationalities;
  const auto it = facts.find(person);
  return it == facts.end() ? kNone : it->second;
}

std::vector<std::vector<Term>> KnowledgeBase::surface_forms(
    Relation relation, const Label& label, DemonymForm form) const {
  if (relation == Relation::kProfession) return {tokenize(label)};
  const auto it = demonyms.find(label);
  if (it == demonyms.end()) {
    // Without a table entry the label itself is the only known noun form.
    if (form == DemonymForm::kNoun) return {tokenize(label)};
    return {};
  }
  return it->second.get(form);
}

KnowledgeBase load_kb(const std::string& professions_path,
                      const std::string& nationalities_path,
                      const std::string& demonyms_path) {
  KnowledgeBase kb;
  load_facts(professions_path, kb.professions);
  load_facts(nationalities_path, kb.nationalities);

  if (!demonyms_path.empty()) {
    detail::for_each_line(
        demonyms_path, [&](std::string_view line, std::size_t line_no) {
          const auto cols = detail::split(line, '\t');
          if (cols.size() != 3) {
            throw ParseError(demonyms_path +
                                 ": expected label<TAB>nouns<TAB>adjectives",
                             line_no);
          }
          Label label;
          try {
            label = canonical_label(cols[0]);
          } catch (const ParseError& e) {
            throw ParseError(demonyms_path + ": " + e.what(), line_no);
          }
          auto& entry = kb.demonyms[label];
          entry.nouns = parse_forms(cols[1]);
          entry.adjectives = parse_forms(cols[2]);
        });
  }

  std::set<Label> missing;
  for (const auto& [person, labels] : kb.nationalities) {
    for (const auto& label : labels) {
      if (!kb.demonyms.contains(label)) missing.insert(label);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& label : missing) {
      if (!list.empty()) list += ", ";
      list += label;
    }
    throw LoadError("nationalities without a demonym entry: " + list);
  }
  return kb;
}

void AbstractStore::insert(const EntityId& person, Abstract abstract) {
  abstracts_[person.str()] = std::move(abstract);
}

const Abstract* AbstractStore::find(const EntityId& person) const {
  const auto it = abstracts_.find(person.str());
  return it == abstracts_.end() ? nullptr : &it->second;
}

AbstractStore load_abstracts(const std::string& path) {
  AbstractStore store;
  std::size_t mismatched = 0;
  detail::for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError(
          path + ": expected person<TAB>first_sentence<TAB>first_paragraph",
          line_no);
    }
    EntityId person;
    try {
      person = normalize_entity_id(cols[0]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
    Abstract abstract{tokenize(cols[1]), tokenize(cols[2])};
    const auto& sent = abstract.first_sentence;
    const auto& par = abstract.first_paragraph;
    if (!sent.empty() && !par.empty() &&
        (sent.size() > par.size() ||
         !std::equal(sent.begin(), sent.end(), par.begin()))) {
      ++mismatched;
      spdlog::debug("{}:{}: first sentence is not a prefix of the paragraph",
                    path, line_no);
    }
    store.insert(person, std::move(abstract));
  });
  if (mismatched > 0) {
    spdlog::warn("{}: {} abstracts whose first sentence does not start the "
                 "first paragraph",
                 path, mismatched);
  }
  return store;
}

std::unordered_set<Term> load_stopwords(const std::string& path) {
  std::unordered_set<Term> words;
  detail::for_each_line(path, [&](std::string_view line, std::size_t) {
    for (auto& token : tokenize(line)) words.insert(std::move(token));
  });
  return words;
}

const std::unordered_set<Term>& default_stopwords() {
  static const std::unordered_set<Term> kWords = {
      "i",          "me",      "my",      "myself",  "we",      "our",
      "ours",       "ourselves", "you",   "your",    "yours",   "yourself",
      "yourselves", "he",      "him",     "his",     "himself", "she",
      "her",        "hers",    "herself", "it",      "its",     "itself",
      "they",       "them",    "their",   "theirs",  "themselves", "what",
      "which",      "who",     "whom",    "this",    "that",    "these",
      "those",      "am",      "is",      "are",     "was",     "were",
      "be",         "been",    "being",   "have",    "has",     "had",
      "having",     "do",      "does",    "did",     "doing",   "a",
      "an",         "the",     "and",     "but",     "if",      "or",
      "because",    "as",      "until",   "while",   "of",      "at",
      "by",         "for",     "with",    "about",   "against", "between",
      "into",       "through", "during",  "before",  "after",   "above",
      "below",      "to",      "from",    "up",      "down",    "in",
      "out",        "on",      "off",     "over",    "under",   "again",
      "further",    "then",    "once",    "here",    "there",   "when",
      "where",      "why",     "how",     "all",     "any",     "both",
      "each",       "few",     "more",    "most",    "other",   "some",
      "such",       "no",      "nor",     "not",     "only",    "own",
      "same",       "so",      "than",    "too",     "very",    "s",
      "t",          "can",     "will",    "just",    "don",     "should",
      "now"};
  return kWords;
}

std::vector<LabeledPair> load_labeled_pairs(const std::string& path) {
  std::vector<LabeledPair> pairs;
  for (auto& q : read_pairs(path, /*require_score=*/true)) {
    pairs.push_back({std::move(q.subject), std::move(q.object), *q.score});
  }
  return pairs;
}

std::vector<QueryPair> load_query_pairs(const std::string& path) {
  return read_pairs(path, /*require_score=*/false);
}

}  // namespace tscore
