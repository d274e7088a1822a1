#include "tscore/index.h"

#include <algorithm>
#include <limits>
#include <mutex>
#include <numeric>

#include "binary_io.h"
#include "text_io.h"
#include "tscore/error.h"
#include "tscore/io.h"
#include "tscore/parallel.h"

namespace tscore {
namespace {

constexpr char kSnapshotMagic[8] = {'T', 'S', 'I', 'D', 'X', 0, 0, 0};
constexpr std::uint32_t kSnapshotVersion = 1;

// Splits [0, n) into `parts` contiguous ranges.
std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t n,
                                                              std::size_t parts) {
  parts = std::max<std::size_t>(1, std::min(parts, n));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t p = 0; p < parts; ++p) {
    ranges.emplace_back(n * p / parts, n * (p + 1) / parts);
  }
  return ranges;
}

}  // namespace

struct SentenceIndex::ProfessionCache {
  std::mutex mu;
  std::unordered_map<Label, std::unique_ptr<const std::vector<SentencePos>>>
      sets;
};

SentenceIndex::SentenceIndex() : cache_(std::make_unique<ProfessionCache>()) {}
SentenceIndex::~SentenceIndex() = default;
SentenceIndex::SentenceIndex(SentenceIndex&&) noexcept = default;
SentenceIndex& SentenceIndex::operator=(SentenceIndex&&) noexcept = default;

std::optional<TermId> SentenceIndex::find_term(std::string_view term) const {
  const auto it = term_ids_.find(term);
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

TermStats SentenceIndex::term_stats(std::string_view term) const {
  const auto id = find_term(term);
  return {id ? doc_freq_[*id] : 0, sentences_.size()};
}

std::span<const SentencePos> SentenceIndex::person_postings(
    const EntityId& person) const {
  const auto it = person_postings_.find(person);
  if (it == person_postings_.end()) return {};
  return it->second;
}

std::span<const SentencePos> SentenceIndex::profession_postings(
    const Label& profession) const {
  const auto members = members_.find(profession);
  if (members == members_.end()) return {};

  std::lock_guard lock(cache_->mu);
  auto& slot = cache_->sets[profession];
  if (!slot) {
    std::vector<SentencePos> merged;
    for (const auto& person : members->second) {
      const auto postings = person_postings(person);
      merged.insert(merged.end(), postings.begin(), postings.end());
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    slot = std::make_unique<const std::vector<SentencePos>>(std::move(merged));
  }
  return *slot;
}

std::vector<std::uint64_t> SentenceIndex::to_sids(
    std::span<const SentencePos> postings) const {
  std::vector<std::uint64_t> sids;
  sids.reserve(postings.size());
  for (const auto pos : postings) sids.push_back(sentences_[pos].sid);
  return sids;
}

std::vector<std::uint64_t> SentenceIndex::sentences_of(
    const EntityId& person) const {
  return to_sids(person_postings(person));
}

std::vector<std::uint64_t> SentenceIndex::sentences_of(
    const Label& profession) const {
  return to_sids(profession_postings(profession));
}

const std::vector<EntityId>& SentenceIndex::profession_members(
    const Label& profession) const {
  static const std::vector<EntityId> kNone;
  const auto it = members_.find(profession);
  return it == members_.end() ? kNone : it->second;
}

SentenceIndex SentenceIndex::assemble(std::vector<Term> terms,
                                      std::vector<StoredSentence> sentences,
                                      const KnowledgeBase& kb,
                                      std::size_t jobs) {
  if (sentences.size() >= std::numeric_limits<SentencePos>::max()) {
    throw BuildError("too many sentences for one index");
  }
  SentenceIndex index;
  index.terms_ = std::move(terms);
  index.sentences_ = std::move(sentences);
  index.term_ids_.reserve(index.terms_.size());
  for (TermId id = 0; id < index.terms_.size(); ++id) {
    index.term_ids_.emplace(index.terms_[id], id);
  }

  // Sentence frequencies, counted per shard and summed.
  const std::size_t vocab = index.terms_.size();
  const auto ranges = shard_ranges(index.sentences_.size(), resolve_jobs(jobs));
  std::vector<std::vector<std::uint32_t>> partial(ranges.size());
  parallel_for(ranges.size(), jobs, [&](std::size_t shard) {
    auto& counts = partial[shard];
    counts.assign(vocab, 0);
    std::vector<std::uint32_t> last_seen(vocab,
                                         std::numeric_limits<std::uint32_t>::max());
    for (std::size_t pos = ranges[shard].first; pos < ranges[shard].second;
         ++pos) {
      for (const TermId t : index.sentences_[pos].tokens) {
        if (last_seen[t] != pos) {
          last_seen[t] = static_cast<std::uint32_t>(pos);
          ++counts[t];
        }
      }
    }
  });
  index.doc_freq_.assign(vocab, 0);
  for (const auto& counts : partial) {
    for (std::size_t t = 0; t < vocab; ++t) index.doc_freq_[t] += counts[t];
  }

  for (SentencePos pos = 0; pos < index.sentences_.size(); ++pos) {
    for (const TermId m : index.sentences_[pos].mentions) {
      index.person_postings_[EntityId::from_normalized(index.terms_[m])]
          .push_back(pos);
    }
  }

  for (auto& [label, persons] : kb.profession_members()) {
    index.members_.emplace(label, std::move(persons));
  }
  return index;
}

void SentenceIndex::save(const std::string& path) const {
  detail::ByteWriter out;
  out.put_raw(std::string_view(kSnapshotMagic, sizeof(kSnapshotMagic)));
  out.put(kSnapshotVersion);
  out.put(static_cast<std::uint64_t>(terms_.size()));
  for (const auto& term : terms_) out.put_string(term);
  out.put(static_cast<std::uint64_t>(sentences_.size()));
  for (const auto& s : sentences_) {
    out.put(s.sid);
    out.put(static_cast<std::uint32_t>(s.tokens.size()));
    for (const TermId t : s.tokens) out.put(t);
    out.put(static_cast<std::uint32_t>(s.mentions.size()));
    for (const TermId m : s.mentions) out.put(m);
  }
  write_atomically(path, out.bytes());
}

SentenceIndex SentenceIndex::load(const std::string& path,
                                  const KnowledgeBase& kb, std::size_t jobs) {
  const std::string data = read_file(path);
  detail::ByteReader in(data, path);
  if (in.get_raw(sizeof(kSnapshotMagic)) !=
      std::string_view(kSnapshotMagic, sizeof(kSnapshotMagic))) {
    throw LoadError(path + ": not an index snapshot");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kSnapshotVersion) {
    throw LoadError(path + ": unsupported snapshot version " +
                    std::to_string(version));
  }

  std::vector<Term> terms(in.get_count(4));
  for (auto& term : terms) term = in.get_string();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (!(terms[i - 1] < terms[i])) {
      throw LoadError(path + ": term dictionary is not sorted");
    }
  }

  const auto check_id = [&](TermId id) {
    if (id >= terms.size()) throw LoadError(path + ": term id out of range");
    return id;
  };
  std::vector<StoredSentence> sentences(in.get_count(16));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& s = sentences[i];
    s.sid = in.get<std::uint64_t>();
    if (i > 0 && sentences[i - 1].sid >= s.sid) {
      throw LoadError(path + ": sentence ids are not strictly increasing");
    }
    s.tokens.resize(in.get<std::uint32_t>());
    for (auto& t : s.tokens) t = check_id(in.get<TermId>());
    s.mentions.resize(in.get<std::uint32_t>());
    for (auto& m : s.mentions) {
      m = check_id(in.get<TermId>());
      if (!is_entity_token(terms[m])) {
        throw LoadError(path + ": mention is not an entity token");
      }
    }
  }
  if (!in.done()) throw LoadError(path + ": trailing bytes after snapshot");
  return assemble(std::move(terms), std::move(sentences), kb, jobs);
}

TermId IndexBuilder::intern(const Term& term) {
  const auto [it, inserted] =
      ids_.try_emplace(term, static_cast<TermId>(terms_.size()));
  if (inserted) terms_.push_back(term);
  return it->second;
}

void IndexBuilder::add(const AnnotatedSentence& sentence) {
  StoredSentence stored;
  stored.sid = sentence.sid;
  stored.tokens.reserve(sentence.tokens.size());
  for (const auto& token : sentence.tokens) stored.tokens.push_back(intern(token));
  for (const auto& mention : sentence.mentions) {
    stored.mentions.push_back(intern(mention.str()));
  }
  sentences_.push_back(std::move(stored));
}

SentenceIndex IndexBuilder::finish(const KnowledgeBase& kb,
                                   std::size_t jobs) && {
  std::vector<TermId> order(terms_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](TermId a, TermId b) { return terms_[a] < terms_[b]; });
  std::vector<TermId> remap(terms_.size());
  std::vector<Term> sorted_terms(terms_.size());
  for (TermId rank = 0; rank < order.size(); ++rank) {
    remap[order[rank]] = rank;
    sorted_terms[rank] = std::move(terms_[order[rank]]);
  }
  ids_.clear();

  std::sort(sentences_.begin(), sentences_.end(),
            [](const StoredSentence& a, const StoredSentence& b) {
              return a.sid < b.sid;
            });
  for (std::size_t i = 1; i < sentences_.size(); ++i) {
    if (sentences_[i - 1].sid == sentences_[i].sid) {
      throw BuildError("duplicate sentence id " +
                       std::to_string(sentences_[i].sid));
    }
  }

  const auto ranges = shard_ranges(sentences_.size(), resolve_jobs(jobs));
  parallel_for(ranges.size(), jobs, [&](std::size_t shard) {
    for (std::size_t i = ranges[shard].first; i < ranges[shard].second; ++i) {
      auto& s = sentences_[i];
      for (auto& t : s.tokens) t = remap[t];
      for (auto& m : s.mentions) m = remap[m];
      std::sort(s.mentions.begin(), s.mentions.end());
      s.mentions.erase(std::unique(s.mentions.begin(), s.mentions.end()),
                       s.mentions.end());
    }
  });

  return SentenceIndex::assemble(std::move(sorted_terms), std::move(sentences_),
                                 kb, jobs);
}

SentenceIndex build_index(std::span<const AnnotatedSentence> sentences,
                          const KnowledgeBase& kb, std::size_t jobs) {
  IndexBuilder builder;
  for (const auto& sentence : sentences) builder.add(sentence);
  return std::move(builder).finish(kb, jobs);
}

SentenceIndex build_index_from_file(const std::string& path,
                                    const KnowledgeBase& kb, std::size_t jobs) {
  auto in = detail::open_input(path);
  IndexBuilder builder;
  std::string line;
  std::uint64_t sid = 0;
  for (; std::getline(in, line); ++sid) {
    const std::string_view view = detail::strip_cr(line);
    if (is_blank_sentence_line(view)) continue;
    try {
      builder.add(parse_sentence_line(view, sid, sid + 1));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  }
  return std::move(builder).finish(kb, jobs);
}

}  // namespace tscore
