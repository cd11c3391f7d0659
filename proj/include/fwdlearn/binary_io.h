#ifndef FWDLEARN_BINARY_IO_H_
#define FWDLEARN_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "fwdlearn/status.h"

namespace fwdlearn {

namespace internal {

template <typename T>
T ToLittleEndian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

}  // namespace internal

// little-endian primitive writer
class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void Raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void U32(std::uint32_t v) { Pod(v); }
  void U64(std::uint64_t v) { Pod(v); }
  void F64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    Pod(bits);
  }
  // u32 length prefix + UTF-8 bytes
  void String(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Raw(s.data(), s.size());
  }

 private:
  template <typename T>
  void Pod(T v) {
    v = internal::ToLittleEndian(v);
    Raw(&v, sizeof(T));
  }
  std::ostream& out_;
};

// little-endian primitive reader; throws DataError on truncation
class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  void Raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("unexpected end of binary stream");
    }
  }
  std::uint32_t U32() { return Pod<std::uint32_t>(); }
  std::uint64_t U64() { return Pod<std::uint64_t>(); }
  double F64() {
    std::uint64_t bits = Pod<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string String(std::uint32_t max_len = 1u << 24) {
    std::uint32_t n = U32();
    if (n > max_len) throw DataError("string length prefix out of range");
    std::string s(n, '\0');
    if (n > 0) Raw(s.data(), n);
    return s;
  }

 private:
  template <typename T>
  T Pod() {
    T v;
    Raw(&v, sizeof(T));
    return internal::ToLittleEndian(v);
  }
  std::istream& in_;
};

}  // namespace fwdlearn

#endif  // FWDLEARN_BINARY_IO_H_
