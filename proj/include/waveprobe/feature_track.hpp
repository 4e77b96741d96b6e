// Frame-rate feature sequences (F0, band energies, spectrogram rows) with
// uniform frame times, plus CSV and WNFT binary serialization.
//
// WNFT layout: magic "WNFT", version u32, kind u32, dim u32, n_frames u64,
// flags u32 (bit 0: voiced flags present), t0 f64, hop f64, values f32
// frame-major, then voiced u8 per frame when flagged.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe {

enum class FeatureKind : std::uint32_t {
  log_f0 = 0,
  band_energy_db = 1,
  wideband_mag = 2,
  narrowband_mag = 3,
};

inline const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::log_f0: return "log_f0";
    case FeatureKind::band_energy_db: return "band_energy_db";
    case FeatureKind::wideband_mag: return "wideband_mag";
    case FeatureKind::narrowband_mag: return "narrowband_mag";
  }
  return "unknown";
}

struct FeatureTrack {
  FeatureKind kind = FeatureKind::band_energy_db;
  double t0 = 0.0;   // time of frame 0, seconds
  double hop = 0.0;  // frame spacing, seconds (uniform by construction)
  Eigen::MatrixXd values;            // n_frames x dim
  std::vector<std::uint8_t> voiced;  // per frame; used by log_f0 tracks only

  std::size_t n_frames() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  double frame_time(std::size_t i) const { return t0 + hop * static_cast<double>(i); }
  bool is_voiced(std::size_t i) const { return voiced.empty() ? true : voiced[i] != 0; }
};

inline void write_track_csv(const std::filesystem::path& path, const FeatureTrack& t) {
  std::ofstream os(path, std::ios::trunc);
  require(static_cast<bool>(os), errc::config, "write_track_csv: cannot open " + path.string());
  os.precision(12);
  for (std::size_t i = 0; i < t.n_frames(); ++i) {
    os << t.frame_time(i);
    for (std::size_t d = 0; d < t.dim(); ++d) os << ',' << t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
    if (!t.voiced.empty()) os << ',' << (t.voiced[i] ? 1 : 0);
    os << '\n';
  }
  require(static_cast<bool>(os), errc::config, "write_track_csv: write failed");
}

/// Reads a track CSV written by write_track_csv. For log_f0 tracks the last
/// column is interpreted as the voicing flag when `expect_voiced` is set.
inline FeatureTrack read_track_csv(const std::filesystem::path& path, FeatureKind kind, bool expect_voiced) {
  std::ifstream is(path);
  require(static_cast<bool>(is), errc::config, "read_track_csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(row.size() >= 2, errc::format, "read_track_csv: row with fewer than 2 columns");
    if (!rows.empty())
      require(row.size() == rows.front().size(), errc::format, "read_track_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  FeatureTrack t;
  t.kind = kind;
  if (rows.empty()) return t;
  const std::size_t ncol = rows.front().size();
  const std::size_t dim = ncol - 1 - (expect_voiced ? 1 : 0);
  require(dim >= 1, errc::format, "read_track_csv: no value columns");
  t.t0 = rows.front()[0];
  t.hop = rows.size() > 1 ? rows[1][0] - rows[0][0] : 0.0;
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  if (expect_voiced) t.voiced.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][1 + d];
    if (expect_voiced) t.voiced[i] = rows[i][ncol - 1] != 0.0 ? 1 : 0;
  }
  return t;
}

inline void write_track_wnft(const std::filesystem::path& path, const FeatureTrack& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), errc::config, "write_track_wnft: cannot open " + path.string());
  write_magic(os, "WNFT");
  write_u32(os, 1);
  write_u32(os, static_cast<std::uint32_t>(t.kind));
  write_u32(os, static_cast<std::uint32_t>(t.dim()));
  write_u64(os, t.n_frames());
  write_u32(os, t.voiced.empty() ? 0u : 1u);
  write_f64(os, t.t0);
  write_f64(os, t.hop);
  for (std::size_t i = 0; i < t.n_frames(); ++i)
    for (std::size_t d = 0; d < t.dim(); ++d)
      write_f32(os, static_cast<float>(t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d))));
  for (std::uint8_t v : t.voiced) write_raw(os, v);
  require(static_cast<bool>(os), errc::config, "write_track_wnft: write failed");
}

inline FeatureTrack read_track_wnft(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), errc::config, "read_track_wnft: cannot open " + path.string());
  expect_magic(is, "WNFT", "read_track_wnft");
  const std::uint32_t version = read_u32(is, "version");
  require(version == 1, errc::format, "read_track_wnft: unsupported version " + std::to_string(version));
  FeatureTrack t;
  t.kind = static_cast<FeatureKind>(read_u32(is, "kind"));
  const std::uint32_t dim = read_u32(is, "dim");
  const std::uint64_t n = read_u64(is, "n_frames");
  const std::uint32_t flags = read_u32(is, "flags");
  t.t0 = read_f64(is, "t0");
  t.hop = read_f64(is, "hop");
  t.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t d = 0; d < dim; ++d)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = read_f32(is, "values");
  if (flags & 1u) {
    t.voiced.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) t.voiced[i] = read_raw<std::uint8_t>(is, "voiced");
  }
  return t;
}

}  // namespace waveprobe
