// Probe metrics: rank correlation and prediction SNR.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe {

/// Ranks 1..n with ties replaced by the average rank of the tied run.
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation with average ranks for ties. Returns nullopt
/// when either sequence is constant (the correlation is undefined).
inline std::optional<double> spearman_rho(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), errc::config, "spearman_rho: length mismatch");
  require(a.size() >= 3, errc::config, "spearman_rho: need at least 3 points");

  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = 0.5 * (n + 1.0);

  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

inline constexpr double kSnrCapDb = 120.0;

/// 10 log10(sum ref^2 / sum (ref - est)^2), capped at 120 dB.
inline double snr_db(std::span<const double> ref, std::span<const double> est) {
  require(ref.size() == est.size(), errc::config, "snr_db: length mismatch");
  require(!ref.empty(), errc::config, "snr_db: empty input");
  double se = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = ref[i] - est[i];
    se += e * e;
    sr += ref[i] * ref[i];
  }
  require(sr > 0.0, errc::numeric, "snr_db: zero reference energy");
  if (se == 0.0) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(sr / se));
}

}  // namespace waveprobe
