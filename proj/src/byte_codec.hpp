#pragma once

// Little-endian primitive encode/decode shared by the binary formats.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "lts/error.hpp"

namespace lts::detail {

inline std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return byteswap32(v);
}

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve = 0) { bytes_.reserve(reserve); }

  void magic(const char (&tag)[5]) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::byte>(tag[i]));
  }
  void u32(std::uint32_t v) {
    v = to_le(v);
    append(&v, sizeof v);
  }
  void i32(std::int32_t v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }

  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  void append(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::byte> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  bool magic(const char (&tag)[5]) {
    need(4);
    const bool ok = std::memcmp(bytes_.data() + pos_, tag, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return to_le(v);
  }
  std::int32_t i32() { return std::bit_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorKind::Format, what_ + " truncated at byte " + std::to_string(pos_));
    }
  }
  std::span<const std::byte> bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace lts::detail
