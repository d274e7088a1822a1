#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "tscore/error.h"

namespace tscore::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written little-endian");

// Appends fixed-width little-endian values to a byte string.
class ByteWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out_.append(bytes, sizeof(T));
  }

  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }

  void put_raw(std::string_view s) { out_.append(s); }

  const std::string& bytes() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

// Reads values written by ByteWriter; throws LoadError on truncation.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what)
      : data_(data), what_(std::move(what)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    return std::string(get_raw(n));
  }

  std::string_view get_raw(std::size_t n) {
    need(n);
    const auto view = data_.substr(pos_, n);
    pos_ += n;
    return view;
  }

  // Guards element counts read from the file before allocating for them.
  std::size_t get_count(std::size_t min_bytes_each) {
    const auto n = get<std::uint64_t>();
    if (min_bytes_each > 0 && n > remaining() / min_bytes_each) {
      throw LoadError(what_ + ": truncated or corrupt (count " +
                      std::to_string(n) + ")");
    }
    return static_cast<std::size_t>(n);
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw LoadError(what_ + ": truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace tscore::detail
