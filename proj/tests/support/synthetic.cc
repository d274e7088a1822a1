#include "synthetic.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "tscore/random.h"

namespace tscore::synthetic {
namespace {

std::string person_mid(std::size_t i) {
  std::ostringstream s;
  s << "m.0p" << (i < 10 ? "0" : "") << i;
  return s.str();
}

std::string person_name(std::size_t i) {
  static const std::array<const char*, 10> digits = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
  return std::string("Person ") + digits[(i / 10) % 10] + " " + digits[i % 10];
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

// Index drawn with probability proportional to weights.
std::size_t weighted(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  return weights.size() - 1;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct ProfessionSpec {
  std::string label;
  std::vector<std::string> words;
};

struct NationSpec {
  std::string label;
  std::string noun;
  std::string adjective;
};

const std::vector<ProfessionSpec>& world_professions() {
  static const std::vector<ProfessionSpec> v = {
      {"Poet", {"poem", "verse", "stanza", "poetry", "sonnet", "rhyme"}},
      {"Painter", {"canvas", "portrait", "brush", "fresco", "gallery", "landscape"}},
      {"Composer", {"symphony", "opera", "sonata", "orchestra", "concerto", "score"}},
      {"Physicist", {"quantum", "particle", "theory", "relativity", "laboratory", "energy"}},
      {"Film Director", {"film", "cinema", "screenplay", "camera", "studio", "premiere"}},
  };
  return v;
}

const std::vector<NationSpec>& world_nations() {
  static const std::vector<NationSpec> v = {
      {"Germany", "germany", "german"},
      {"France", "france", "french"},
      {"Italy", "italy", "italian"},
      {"Spain", "spain", "spanish"},
  };
  return v;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> v = {
      "the",    "of",      "and",    "in",     "was",     "his",     "her",
      "a",      "with",    "after",  "city",   "year",    "later",   "known",
      "work",   "early",   "life",   "family", "public",  "during",  "career",
      "moved",  "returned", "famous", "friend", "married", "travel",  "letters",
      "house",  "school",  "award",  "honor",  "season",  "visited", "region",
      "writing", "period", "society", "member", "founded", "village", "river"};
  return v;
}

}  // namespace

ToyCorpus random_toy_corpus(std::uint64_t seed, std::size_t max_sentences,
                            std::size_t vocab) {
  Rng rng(seed);
  ToyCorpus out;
  static const std::vector<std::string> stop = {"the", "of", "and", "a", "in"};
  for (const auto& s : stop) out.vocabulary.push_back(s);
  out.professions = {"poet", "film director", "painter", "singer"};
  for (const auto& p : out.professions) {
    for (const auto& t : tokenize(p)) out.vocabulary.push_back(t);
  }
  for (std::size_t i = 0; out.vocabulary.size() < vocab; ++i) {
    out.vocabulary.push_back("w" + std::to_string(i));
  }

  for (std::size_t i = 0; i < 8; ++i) {
    const auto person = EntityId::from_normalized("fb_p" + std::to_string(i));
    out.persons.push_back(person);
    auto& labels = out.kb.professions[person];
    labels.push_back(pick(rng, out.professions));
    if (rng.below(2) == 1) {
      const auto& extra = pick(rng, out.professions);
      if (extra != labels.front()) labels.push_back(extra);
    }
  }

  const std::size_t n = 1 + rng.below(std::max<std::size_t>(max_sentences, 1));
  for (std::size_t i = 0; i < n; ++i) {
    AnnotatedSentence s;
    s.sid = i * 3 + rng.below(3);
    const std::size_t len = 3 + rng.below(13);
    for (std::size_t t = 0; t < len; ++t) s.tokens.push_back(pick(rng, out.vocabulary));
    const std::size_t mentions = rng.below(3);
    for (std::size_t m = 0; m < mentions; ++m) {
      const auto& person = pick(rng, out.persons);
      s.tokens.insert(s.tokens.begin() + static_cast<std::ptrdiff_t>(rng.below(s.tokens.size() + 1)),
                      person.str());
      s.mentions.push_back(person);
    }
    std::sort(s.mentions.begin(), s.mentions.end());
    s.mentions.erase(std::unique(s.mentions.begin(), s.mentions.end()), s.mentions.end());
    out.sentences.push_back(std::move(s));
  }
  return out;
}

WorldFiles write_world(const std::filesystem::path& dir, const WorldSpec& spec) {
  std::filesystem::create_directories(dir);
  Rng rng(spec.seed);
  const auto& profs = world_professions();
  const auto& nations = world_nations();
  const auto& filler = filler_words();

  std::ostringstream sentences, professions, nationalities, demonyms, abstracts,
      embeddings, stopwords, prof_pairs, nat_pairs;
  std::size_t sentence_count = 0;

  for (const auto& n : nations) {
    demonyms << n.label << '\t' << n.noun << '\t' << n.adjective << '\n';
  }

  for (std::size_t p = 0; p < spec.persons; ++p) {
    const std::string mid = person_mid(p);
    const std::string name = person_name(p);

    // Three professions and two nationalities per person, with gold scores.
    std::vector<std::size_t> prof_ids(profs.size());
    for (std::size_t i = 0; i < prof_ids.size(); ++i) prof_ids[i] = i;
    rng.shuffle(std::span<std::size_t>(prof_ids));
    prof_ids.resize(3);
    std::vector<int> prof_scores;
    for (std::size_t i = 0; i < prof_ids.size(); ++i) {
      prof_scores.push_back(static_cast<int>(rng.below(8)));
    }
    std::vector<std::size_t> nat_ids(nations.size());
    for (std::size_t i = 0; i < nat_ids.size(); ++i) nat_ids[i] = i;
    rng.shuffle(std::span<std::size_t>(nat_ids));
    nat_ids.resize(2);
    std::vector<int> nat_scores;
    for (std::size_t i = 0; i < nat_ids.size(); ++i) {
      nat_scores.push_back(static_cast<int>(rng.below(8)));
    }

    for (std::size_t i = 0; i < prof_ids.size(); ++i) {
      professions << mid << '\t' << profs[prof_ids[i]].label << '\n';
      prof_pairs << mid << '\t' << profs[prof_ids[i]].label << '\t' << prof_scores[i] << '\n';
    }
    for (std::size_t i = 0; i < nat_ids.size(); ++i) {
      nationalities << mid << '\t' << nations[nat_ids[i]].label << '\n';
      nat_pairs << mid << '\t' << nations[nat_ids[i]].label << '\t' << nat_scores[i] << '\n';
    }

    std::vector<double> prof_weights, nat_weights;
    for (int s : prof_scores) prof_weights.push_back((s + 0.3) * (s + 0.3));
    for (int s : nat_scores) nat_weights.push_back((s + 0.3) * (s + 0.3));

    for (std::size_t k = 0; k < spec.sentences_per_person; ++k) {
      std::vector<std::string> words;
      for (int f = 0; f < 4; ++f) words.push_back(pick(rng, filler));
      const auto& prof = profs[prof_ids[weighted(rng, prof_weights)]];
      const std::size_t topical = 1 + rng.below(2);
      for (std::size_t t = 0; t < topical; ++t) words.push_back(pick(rng, prof.words));
      if (rng.below(4) == 0) {
        for (const auto& t : tokenize(prof.label)) words.push_back(t);
      }
      if (rng.below(3) == 0) {
        const auto& nat = nations[nat_ids[weighted(rng, nat_weights)]];
        words.push_back(rng.below(2) == 0 ? nat.adjective : nat.noun);
      }
      rng.shuffle(std::span<std::string>(words));
      const std::size_t at = rng.below(words.size() + 1);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at),
                   "[[" + mid + "|" + name + "]]");
      for (std::size_t w = 0; w < words.size(); ++w) {
        sentences << (w ? " " : "") << words[w];
      }
      sentences << '\n';
      ++sentence_count;
    }

    // Abstract: strongest profession and nationality first.
    std::vector<std::size_t> order(prof_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return prof_scores[a] > prof_scores[b];
    });
    const std::size_t top_nat = nat_scores[0] >= nat_scores[1] ? 0 : 1;
    std::ostringstream first;
    first << name << " was a " << nations[nat_ids[top_nat]].adjective << ' '
          << profs[prof_ids[order[0]]].label;
    if (prof_scores[order[1]] >= 4) first << " and " << profs[prof_ids[order[1]]].label;
    first << '.';
    std::ostringstream paragraph;
    paragraph << first.str() << " Born in " << nations[nat_ids[top_nat]].noun
              << ", later also active as";
    for (std::size_t i = 1; i < order.size(); ++i) {
      paragraph << ' ' << profs[prof_ids[order[i]]].label;
    }
    paragraph << ". Lived in " << nations[nat_ids[1 - top_nat]].noun << '.';
    abstracts << mid << '\t' << first.str() << '\t' << paragraph.str() << '\n';
  }

  // Embeddings: topical words cluster around their profession's axis.
  constexpr std::size_t kDim = 8;
  std::set<std::string> emitted;
  auto emit = [&](const std::string& word, std::size_t axis, double spread) {
    if (!emitted.insert(word).second) return;
    embeddings << word;
    for (std::size_t d = 0; d < kDim; ++d) {
      double v = (rng.uniform() - 0.5) * spread;
      if (d == axis) v += 1.0;
      embeddings << ' ' << v;
    }
    embeddings << '\n';
  };
  for (std::size_t i = 0; i < profs.size(); ++i) {
    for (const auto& t : tokenize(profs[i].label)) emit(t, i, 0.2);
    for (const auto& w : profs[i].words) emit(w, i, 0.4);
  }
  for (const auto& n : nations) {
    emit(n.noun, kDim, 1.0);
    emit(n.adjective, kDim, 1.0);
  }
  for (const auto& w : filler) emit(w, kDim, 1.0);

  std::vector<std::string> stop(default_stopwords().begin(), default_stopwords().end());
  std::sort(stop.begin(), stop.end());
  for (const auto& s : stop) stopwords << s << '\n';

  WorldFiles files;
  files.sentences = (dir / "sentences.txt").string();
  files.professions = (dir / "professions.tsv").string();
  files.nationalities = (dir / "nationalities.tsv").string();
  files.demonyms = (dir / "demonyms.tsv").string();
  files.abstracts = (dir / "abstracts.tsv").string();
  files.embeddings = (dir / "embeddings.txt").string();
  files.stopwords = (dir / "stopwords.txt").string();
  files.profession_pairs = (dir / "profession_pairs.tsv").string();
  files.nationality_pairs = (dir / "nationality_pairs.tsv").string();
  write_file(files.sentences, sentences.str());
  write_file(files.professions, professions.str());
  write_file(files.nationalities, nationalities.str());
  write_file(files.demonyms, demonyms.str());
  write_file(files.abstracts, abstracts.str());
  write_file(files.embeddings, embeddings.str());
  write_file(files.stopwords, stopwords.str());
  write_file(files.profession_pairs, prof_pairs.str());
  write_file(files.nationality_pairs, nat_pairs.str());
  files.sentence_count = sentence_count;
  files.person_count = spec.persons;
  files.profession_count = profs.size();
  files.nationality_count = nations.size();
  return files;
}

}  // namespace tscore::synthetic
