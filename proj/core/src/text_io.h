#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "tscore/error.h"

namespace tscore::detail {

inline std::ifstream open_input(const std::string& path,
                                std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw LoadError("cannot open " + path);
  return in;
}

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Calls fn(line, line_no) for every line that is not blank; line_no is
// 1-based.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (trim(view).empty()) continue;
    fn(view, line_no);
  }
}

}  // namespace tscore::detail
