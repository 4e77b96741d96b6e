// Error categories, binary little-endian IO, and small shared helpers.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace waveprobe {

// Failure categories. Values double as CLI exit codes.
enum class errc : int {
  config = 2,
  numeric = 3,
  format = 4,
  insufficient_data = 5,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// ---- raw little-endian stream IO ----

template <class T>
inline void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
inline T read_raw(std::istream& is, const char* what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), errc::format, std::string("truncated read: ") + what);
  return v;
}

inline void write_u32(std::ostream& os, std::uint32_t v) { write_raw(os, v); }
inline void write_u64(std::ostream& os, std::uint64_t v) { write_raw(os, v); }
inline void write_f32(std::ostream& os, float v) { write_raw(os, v); }
inline void write_f64(std::ostream& os, double v) { write_raw(os, v); }

inline std::uint32_t read_u32(std::istream& is, const char* what = "u32") { return read_raw<std::uint32_t>(is, what); }
inline std::uint64_t read_u64(std::istream& is, const char* what = "u64") { return read_raw<std::uint64_t>(is, what); }
inline float read_f32(std::istream& is, const char* what = "f32") { return read_raw<float>(is, what); }
inline double read_f64(std::istream& is, const char* what = "f64") { return read_raw<double>(is, what); }

inline void write_magic(std::ostream& os, const char magic[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[5], const char* what) {
  char got[4] = {0, 0, 0, 0};
  is.read(got, 4);
  require(static_cast<bool>(is) && std::memcmp(got, magic, 4) == 0, errc::format,
          std::string(what) + ": bad magic, expected '" + magic + "'");
}

// ---- fingerprinting (FNV-1a 64) for run reports ----

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

inline std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), errc::config, "cannot open file for hashing: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
  }
  return hex64(h);
}

}  // namespace waveprobe
