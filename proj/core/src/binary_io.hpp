#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikeosc/errors.hpp"

namespace spikeosc::detail {

// Little-endian writer.
class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void tag(std::string_view s) {
    out_.insert(out_.end(), s.begin(), s.end());
  }
  template <class U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    tag(s);
  }
  void f32s(std::span<const double> v) {
    for (double x : v) f32(x);
  }
  /// Bit-packed booleans, LSB first within each byte.
  template <class T>
  void bits(std::span<const T> v) {
    std::uint8_t cur = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i]) cur |= static_cast<std::uint8_t>(1u << (i % 8));
      if (i % 8 == 7) {
        out_.push_back(cur);
        cur = 0;
      }
    }
    if (v.size() % 8) out_.push_back(cur);
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(Errc::format, "truncated file");
  }
  void expect_tag(std::string_view s, const char* what) {
    need(s.size());
    if (std::memcmp(in_.data() + pos_, s.data(), s.size()) != 0) {
      throw Error(Errc::format, std::string("bad magic bytes for ") + what);
    }
    pos_ += s.size();
  }
  template <class U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void f32s(std::span<double> v) {
    for (double& x : v) x = f32();
  }
  template <class T>
  void bits(std::span<T> v) {
    need((v.size() + 7) / 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = static_cast<T>((in_[pos_ + i / 8] >> (i % 8)) & 1u);
    }
    pos_ += (v.size() + 7) / 8;
  }
  bool done() const noexcept { return pos_ == in_.size(); }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace spikeosc::detail
