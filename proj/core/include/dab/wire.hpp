#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "dab/errors.hpp"

namespace dab {

// Little-endian binary encoding helpers for the model/codebook file
// formats. Doubles are written as their IEEE-754 bit pattern, so a
// write/read round trip is exact.

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string str(std::size_t max_len = 1u << 20) {
    std::uint32_t n = u32();
    if (n > max_len) throw IoError("string length " + std::to_string(n) + " too large");
    need(n);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }

  std::vector<double> f64s(std::size_t max_len = 1u << 28) {
    std::uint64_t n = u64();
    if (n > max_len) throw IoError("array length " + std::to_string(n) + " too large");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }

  std::size_t remaining() const { return n_ - pos_; }
  bool done() const { return pos_ == n_; }

 private:
  void need(std::size_t k) const {
    if (pos_ + k > n_) {
      throw IoError("truncated input: need " + std::to_string(k) + " bytes at offset " +
                    std::to_string(pos_) + ", have " + std::to_string(n_ - pos_));
    }
  }

  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace dab
