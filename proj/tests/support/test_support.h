#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "tscore/corpus.h"

namespace tscore::testing {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tscore_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::string file(std::string_view name) const { return (path_ / name).string(); }

  std::string write(std::string_view name, std::string_view content) const {
    const auto p = file(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline EntityId id(std::string_view normalized) {
  return EntityId::from_normalized(std::string(normalized));
}

// Builds an annotated sentence from space-separated tokens; tokens that look
// like entity ids become mentions.
inline AnnotatedSentence sentence(std::uint64_t sid, std::string_view text) {
  AnnotatedSentence s;
  s.sid = sid;
  s.tokens = tokenize(text);
  for (const auto& t : s.tokens) {
    if (is_entity_token(t)) s.mentions.push_back(EntityId::from_normalized(t));
  }
  std::sort(s.mentions.begin(), s.mentions.end());
  s.mentions.erase(std::unique(s.mentions.begin(), s.mentions.end()),
                   s.mentions.end());
  return s;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace tscore::testing
