// Mono audio carrier and 8-bit mu-law companding/quantization.
//
// Code convention: the companded value y in [-1, 1] is quantized onto the
// 256-point grid y = (code - 128) / 127.5, so y = 0 (and therefore x = 0)
// lands exactly on the reconstruction level of code 128. The grid is clamped
// to [-1, 1] at the ends, hence code 0 decodes to exactly -1.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe {

inline constexpr double kMuLawMu = 255.0;
inline constexpr int kQuantizationLevels = 256;

struct AudioBuffer {
  std::vector<double> samples;  // values in [-1, 1]
  double sample_rate = 16000.0;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct QuantizedSignal {
  std::vector<std::uint8_t> codes;  // values in [0, 255]
  double sample_rate = 16000.0;

  std::size_t size() const { return codes.size(); }
};

/// Companding curve F(x) = sign(x) ln(1 + mu|x|) / ln(1 + mu), maps [-1,1] -> [-1,1].
inline double mu_law_compand(double x) {
  return std::copysign(std::log1p(kMuLawMu * std::abs(x)) / std::log1p(kMuLawMu), x);
}

inline double mu_law_expand(double y) {
  return std::copysign((std::pow(1.0 + kMuLawMu, std::abs(y)) - 1.0) / kMuLawMu, y);
}

/// Linear-domain reconstruction level of a code.
inline double mu_law_level(int code) {
  double y = (static_cast<double>(code) - 128.0) / 127.5;
  return mu_law_expand(std::clamp(y, -1.0, 1.0));
}

inline std::uint8_t mu_law_encode_sample(double x) {
  require(std::isfinite(x), errc::config, "mu_law_encode: non-finite sample");
  double y = mu_law_compand(std::clamp(x, -1.0, 1.0));
  long c = std::lround(y * 127.5);  // rounds halves away from zero
  c = std::clamp(c, -128l, 127l) + 128;
  return static_cast<std::uint8_t>(c);
}

inline QuantizedSignal mu_law_encode(const AudioBuffer& x) {
  QuantizedSignal q;
  q.sample_rate = x.sample_rate;
  q.codes.reserve(x.samples.size());
  for (double s : x.samples) q.codes.push_back(mu_law_encode_sample(s));
  return q;
}

inline AudioBuffer mu_law_decode(const QuantizedSignal& q) {
  AudioBuffer x;
  x.sample_rate = q.sample_rate;
  x.samples.reserve(q.codes.size());
  for (std::uint8_t c : q.codes) x.samples.push_back(mu_law_level(c));
  return x;
}

}  // namespace waveprobe
