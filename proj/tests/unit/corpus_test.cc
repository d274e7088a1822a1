#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "test_support.h"
#include "tscore/corpus.h"
#include "tscore/error.h"

namespace tscore {
namespace {

using testing::TempDir;

// Replays the two normalization rules on a raw `m.` id.
std::string normalize_oracle(std::string mid) {
  std::transform(mid.begin(), mid.end(), mid.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (mid.rfind("m.", 0) == 0) mid = "fb_" + mid.substr(2);
  std::replace(mid.begin(), mid.end(), '.', '_');
  return mid;
}

std::vector<std::string> tokenize_oracle(std::string text) {
  for (auto& c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  static const std::regex kToken("[a-z0-9_]+");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kToken);
       it != std::sregex_iterator(); ++it) {
    out.push_back(it->str());
  }
  return out;
}

TEST_CASE("normalize_entity_id") {
  CHECK(normalize_entity_id("m.06dfpq").str() == "fb_06dfpq");
  CHECK(normalize_entity_id("fb_06dfpq").str() == "fb_06dfpq");
  CHECK(normalize_entity_id("m.0d1.x").str() == normalize_oracle("m.0d1.x"));
  CHECK(normalize_entity_id("m.0d1.x").str() == "fb_0d1_x");
  CHECK(normalize_entity_id("/m/06dfpq").str() == "fb_06dfpq");
  CHECK(normalize_entity_id("M.06DFPQ").str() == "fb_06dfpq");

  CHECK_THROWS_AS(normalize_entity_id(""), ParseError);
  CHECK_THROWS_AS(normalize_entity_id("   "), ParseError);
  CHECK_THROWS_AS(normalize_entity_id("Bob Dylan"), ParseError);
  CHECK_THROWS_AS(normalize_entity_id("m."), ParseError);
  CHECK_THROWS_AS(normalize_entity_id("m.06-df"), ParseError);
}

TEST_CASE("normalize_entity_id is idempotent on generated ids") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789_.ABCXYZ";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string mid = "m.";
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) mid += alphabet[rng() % alphabet.size()];
    const auto once = normalize_entity_id(mid);
    CHECK(once.str() == normalize_oracle(mid));
    CHECK(normalize_entity_id(once.str()) == once);
    CHECK(once.str().find('.') == std::string::npos);
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Directed by fb_06dfpq.") ==
        std::vector<Term>{"directed", "by", "fb_06dfpq"});
  CHECK(tokenize("Directed by fb_06dfpq.") ==
        tokenize_oracle("Directed by fb_06dfpq."));
  CHECK(tokenize("").empty());
  CHECK(tokenize("Singer-songwriter") == std::vector<Term>{"singer", "songwriter"});
  CHECK(tokenize("Singer-songwriter") == tokenize_oracle("Singer-songwriter"));
  CHECK(tokenize("don't  stop") == std::vector<Term>{"don", "t", "stop"});
  CHECK(tokenize("caf\xc3\xa9 au lait") == std::vector<Term>{"caf", "au", "lait"});
}

TEST_CASE("tokenize matches the regex oracle on random text") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) text += static_cast<char>(rng() % 256);
    const auto tokens = tokenize(text);
    CHECK(tokens == tokenize_oracle(text));
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      CHECK(std::none_of(t.begin(), t.end(),
                         [](char c) { return c >= 'A' && c <= 'Z'; }));
    }
  }
}

TEST_CASE("canonical_label") {
  CHECK(canonical_label("Poet") == "poet");
  CHECK(canonical_label("Singer-songwriter") == "singer songwriter");
  CHECK_THROWS_AS(canonical_label("--"), ParseError);
}

TEST_CASE("parse_sentence_line") {
  SUBCASE("marker becomes one entity token") {
    const auto s = parse_sentence_line(".. directed by [[m.06dfpq|Ventura Pons]]", 3);
    CHECK(s.sid == 3);
    CHECK(s.tokens == std::vector<Term>{"directed", "by", "fb_06dfpq"});
    REQUIRE(s.mentions.size() == 1);
    CHECK(s.mentions[0].str() == "fb_06dfpq");
  }
  SUBCASE("no markers") {
    const auto s = parse_sentence_line("A plain sentence.", 0);
    CHECK(s.mentions.empty());
    CHECK(s.tokens.size() == 3);
  }
  SUBCASE("repeated entity") {
    const auto s = parse_sentence_line(
        "[[m.0abc|Bob]] met [[m.0abc|Robert]] twice", 0);
    CHECK(std::count(s.tokens.begin(), s.tokens.end(), "fb_0abc") == 2);
    CHECK(s.mentions.size() == 1);
  }
  SUBCASE("marker without surface text") {
    const auto s = parse_sentence_line("see [[m.0abc]] here", 0);
    CHECK(s.tokens == std::vector<Term>{"see", "fb_0abc", "here"});
  }
  SUBCASE("unterminated marker reports the line") {
    try {
      parse_sentence_line("broken [[m.0abc|Bob", 0, 17);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 17);
      CHECK(std::string(e.what()).find("line 17") != std::string::npos);
    }
  }
  SUBCASE("bad id inside a marker") {
    CHECK_THROWS_AS(parse_sentence_line("x [[Bob Dylan|Bob]]", 0, 2), ParseError);
  }
}

TEST_CASE("sentence serialize round trip") {
  const std::vector<std::string> lines = {
      ".. directed by [[m.06dfpq|Ventura Pons]]",
      "[[m.0abc|Bob]] and [[m.0def|Joan]] sang with [[m.0abc|him]] fb_0zzz",
      "Singer-songwriter born in 1941.",
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto first = parse_sentence_line(lines[i], i);
    const auto again = parse_sentence_line(serialize_sentence(first), i);
    CHECK(first == again);
  }
}

TEST_CASE("read_sentences numbers lines and skips blanks") {
  std::istringstream in("first [[m.0a1|A]]\n\n...\nthird line\n");
  const auto sentences = read_sentences(in);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0].sid == 0);
  CHECK(sentences[1].sid == 3);
}

TEST_CASE("load_kb") {
  TempDir dir;
  const auto prof = dir.write("prof.tsv", "m.0abc\tPoet\nm.0abc\tSinger-songwriter\n"
                                          "m.0abc\tpoet\nm.0def\tActor\n");
  const auto nat = dir.write("nat.tsv", "m.0abc\tGermany\n");
  const auto dem = dir.write("dem.tsv", "Germany\tgermany\tgerman\n"
                                        "United States\tunited states,usa\tamerican\n");
  const auto kb = load_kb(prof, nat, dem);

  const auto& abc = kb.professions.at(testing::id("fb_0abc"));
  CHECK(abc == std::vector<Label>{"poet", "singer songwriter"});
  CHECK(kb.nationalities.at(testing::id("fb_0abc")) == std::vector<Label>{"germany"});
  const auto& de = kb.demonyms.at("germany");
  CHECK(de.nouns == std::vector<std::vector<Term>>{{"germany"}});
  CHECK(de.adjectives == std::vector<std::vector<Term>>{{"german"}});
  CHECK(kb.demonyms.at("united states").nouns ==
        std::vector<std::vector<Term>>{{"united", "states"}, {"usa"}});

  const auto members = kb.profession_members();
  CHECK(members.at("poet") == std::vector<EntityId>{testing::id("fb_0abc")});

  SUBCASE("empty files give empty mappings") {
    const auto empty = dir.write("empty.tsv", "");
    const auto none = load_kb(empty, "", "");
    CHECK(none.professions.empty());
    CHECK(none.nationalities.empty());
  }
  SUBCASE("nationality without demonym entry") {
    const auto nat2 = dir.write("nat2.tsv", "m.0abc\tGermany\nm.0def\tAtlantis\n");
    try {
      load_kb(prof, nat2, dem);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("atlantis") != std::string::npos);
    }
  }
  SUBCASE("malformed row") {
    const auto bad = dir.write("bad.tsv", "m.0abc\tPoet\textra\n");
    CHECK_THROWS_AS(load_kb(bad, "", ""), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_kb(dir.file("nope.tsv"), "", ""), LoadError);
  }
}

TEST_CASE("surface forms") {
  KnowledgeBase kb;
  kb.demonyms["germany"] = {{{"germany"}}, {{"german"}}};
  CHECK(kb.surface_forms(Relation::kProfession, "singer songwriter",
                         DemonymForm::kNoun) ==
        std::vector<std::vector<Term>>{{"singer", "songwriter"}});
  CHECK(kb.surface_forms(Relation::kNationality, "germany", DemonymForm::kAdjective) ==
        std::vector<std::vector<Term>>{{"german"}});
  CHECK(kb.surface_forms(Relation::kNationality, "atlantis", DemonymForm::kNoun) ==
        std::vector<std::vector<Term>>{{"atlantis"}});
  CHECK(kb.surface_forms(Relation::kNationality, "atlantis", DemonymForm::kAdjective)
            .empty());
}

TEST_CASE("load_abstracts") {
  TempDir dir;
  const auto path = dir.write(
      "abs.tsv",
      "m.0abc\tBob Dylan is an American singer.\tBob Dylan is an American "
      "singer. He won prizes.\n"
      "m.0def\tShort.\tSomething else entirely.\n");
  const auto store = load_abstracts(path);
  CHECK(store.size() == 2);
  const auto* bob = store.find(testing::id("fb_0abc"));
  REQUIRE(bob != nullptr);
  CHECK(bob->first_sentence.size() == 6);
  CHECK(bob->first_paragraph.size() == 9);
  // Prefix mismatch is only logged.
  CHECK(store.find(testing::id("fb_0def")) != nullptr);
  CHECK(store.find(testing::id("fb_0zzz")) == nullptr);
}

TEST_CASE("stopwords") {
  TempDir dir;
  std::string text;
  const std::vector<std::string> words(default_stopwords().begin(),
                                       default_stopwords().end());
  for (int i = 0; i < 127; ++i) text += words[static_cast<std::size_t>(i % 100)] + "\n";
  const auto loaded = load_stopwords(dir.write("stop.txt", text));
  CHECK(loaded.size() <= 127);
  CHECK(loaded.size() == 100);

  CHECK(default_stopwords().size() == 127);
  const auto shipped = load_stopwords(std::string(TSCORE_DATA_DIR) + "/stopwords.txt");
  CHECK(shipped == default_stopwords());
}

TEST_CASE("load_labeled_pairs") {
  TempDir dir;
  const auto pairs = load_labeled_pairs(dir.write("p.tsv", "m.0abc\tPoet\t7\n"));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == LabeledPair{testing::id("fb_0abc"), "poet", 7});

  try {
    load_labeled_pairs(dir.write("bad.tsv", "m.0abc\tPoet\t7\nm.0abc\tActor\t9\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_labeled_pairs(dir.write("neg.tsv", "m.0abc\tPoet\t-1\n")),
                  ParseError);
  CHECK_THROWS_AS(load_labeled_pairs(dir.write("nan.tsv", "m.0abc\tPoet\tx\n")),
                  ParseError);
  CHECK_THROWS_AS(load_labeled_pairs(dir.write("two.tsv", "m.0abc\tPoet\n")),
                  ParseError);

  const auto queries = load_query_pairs(dir.write("q.tsv", "m.0abc\tPoet\n"));
  REQUIRE(queries.size() == 1);
  CHECK_FALSE(queries[0].score.has_value());
  CHECK(queries[0].raw_object == "Poet");
}

}  // namespace
}  // namespace tscore
