// RIFF/WAVE reader and writer, 16-bit PCM little-endian mono only.
// Unknown chunks ahead of "data" are skipped (with odd-size padding).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"

namespace waveprobe {

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), errc::config, "read_wav: cannot open " + path.string());

  char riff[4];
  is.read(riff, 4);
  require(static_cast<bool>(is) && std::memcmp(riff, "RIFF", 4) == 0, errc::format,
          "read_wav: missing 'RIFF' header in " + path.string());
  (void)read_u32(is, "RIFF size");
  char wave[4];
  is.read(wave, 4);
  require(static_cast<bool>(is) && std::memcmp(wave, "WAVE", 4) == 0, errc::format,
          "read_wav: missing 'WAVE' tag");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t sample_rate = 0;

  while (true) {
    char id[4];
    is.read(id, 4);
    require(static_cast<bool>(is), errc::format, "read_wav: no 'data' chunk before end of file");
    std::uint32_t size = read_u32(is, "chunk size");
    std::string chunk(id, 4);

    if (chunk == "fmt ") {
      require(size >= 16, errc::format, "read_wav: 'fmt ' chunk too short");
      format = read_raw<std::uint16_t>(is, "fmt format");
      channels = read_raw<std::uint16_t>(is, "fmt channels");
      sample_rate = read_u32(is, "fmt sample rate");
      (void)read_u32(is, "fmt byte rate");
      (void)read_raw<std::uint16_t>(is, "fmt block align");
      bits = read_raw<std::uint16_t>(is, "fmt bits");
      is.seekg(size - 16 + (size & 1), std::ios::cur);
      require(format == 1, errc::format, "read_wav: 'fmt ' chunk: only PCM (format 1) supported");
      require(channels == 1, errc::format,
              "read_wav: 'fmt ' chunk: only mono supported, got " + std::to_string(channels) + " channels");
      require(bits == 16, errc::format,
              "read_wav: 'fmt ' chunk: only 16-bit PCM supported, got " + std::to_string(bits) + " bits");
      have_fmt = true;
    } else if (chunk == "data") {
      require(have_fmt, errc::format, "read_wav: 'data' chunk before 'fmt '");
      require(size % 2 == 0, errc::format, "read_wav: 'data' chunk has odd byte count");
      AudioBuffer out;
      out.sample_rate = static_cast<double>(sample_rate);
      std::size_t n = size / 2;
      out.samples.resize(n);
      std::vector<std::int16_t> raw(n);
      is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(size));
      require(static_cast<bool>(is), errc::format, "read_wav: 'data' chunk truncated");
      for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i] / 32768.0;
      return out;
    } else {
      // skip unknown chunk, chunks are word aligned
      is.seekg(size + (size & 1), std::ios::cur);
      require(static_cast<bool>(is), errc::format, "read_wav: chunk '" + chunk + "' overruns file");
    }
  }
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& x) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), errc::config, "write_wav: cannot open " + path.string());

  const std::uint32_t n = static_cast<std::uint32_t>(x.samples.size());
  const std::uint32_t data_bytes = 2 * n;
  const std::uint32_t sr = static_cast<std::uint32_t>(std::lround(x.sample_rate));

  os.write("RIFF", 4);
  write_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32(os, 16);
  write_raw<std::uint16_t>(os, 1);  // PCM
  write_raw<std::uint16_t>(os, 1);  // mono
  write_u32(os, sr);
  write_u32(os, sr * 2);
  write_raw<std::uint16_t>(os, 2);
  write_raw<std::uint16_t>(os, 16);
  os.write("data", 4);
  write_u32(os, data_bytes);
  for (double s : x.samples) {
    require(std::isfinite(s), errc::config, "write_wav: non-finite sample");
    long v = std::lround(s * 32768.0);
    write_raw<std::int16_t>(os, static_cast<std::int16_t>(std::clamp(v, -32768l, 32767l)));
  }
  require(static_cast<bool>(os), errc::config, "write_wav: write failed for " + path.string());
}

}  // namespace waveprobe
