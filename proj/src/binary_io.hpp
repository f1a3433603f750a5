#pragma once

// Little-endian primitives shared by the checkpoint and dataset formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "alerta/errors.hpp"
#include "alerta/matrix.hpp"

namespace alerta::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.values().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

class Reader {
 public:
  Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  void read_raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(what_ + ": truncated file");
    }
  }
  std::uint8_t u8() {
    std::uint8_t v;
    read_raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    read_raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    read_raw(&v, sizeof v);
    return v;
  }
  std::string string(std::uint64_t limit = 1u << 26) {
    const auto n = u64();
    if (n > limit) throw ParseError(what_ + ": string length " + std::to_string(n) + " too large");
    std::string s(n, '\0');
    read_raw(s.data(), n);
    return s;
  }
  Matrix matrix() {
    const auto r = u64();
    const auto c = u64();
    if (r > (1u << 24) || c > (1u << 24) || r * c > (1u << 28)) {
      throw ParseError(what_ + ": implausible matrix shape " + std::to_string(r) + "x" +
                       std::to_string(c));
    }
    Matrix m(r, c);
    read_raw(m.values().data(), m.size() * sizeof(double));
    return m;
  }
  void expect_magic(const char (&magic)[5]) {
    char buf[4];
    read_raw(buf, 4);
    if (std::memcmp(buf, magic, 4) != 0) {
      throw ParseError(what_ + ": not a " + std::string(magic, 4) + " file (bad magic)");
    }
  }

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace alerta::io
