// 20-channel Butterworth band-energy extractor, contiguous 400 Hz bands over
// 0..8 kHz. Channel 0's low edge is clamped to 30 Hz (a DC edge is not
// realizable for a bandpass). The top edge is clamped to 0.4995 fs: prewarping
// diverges at Nyquist and an edge closer than this leaves a pole ringing past
// the 1 s stability budget.
#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "waveprobe/audio.hpp"
#include "waveprobe/dsp/biquad.hpp"
#include "waveprobe/feature_track.hpp"

namespace waveprobe::dsp {

inline constexpr int kBandCount = 20;
inline constexpr double kBandWidthHz = 400.0;
inline constexpr double kBandLowClampHz = 30.0;
inline constexpr double kEnergyFloorDb = -100.0;
inline constexpr double kPowerFloor = 1e-10;  // 10^(kEnergyFloorDb / 10)

inline std::pair<double, double> band_edges(int channel, double fs) {
  double lo = channel * kBandWidthHz;
  double hi = (channel + 1) * kBandWidthHz;
  lo = std::max(lo, kBandLowClampHz);
  hi = std::min(hi, 0.4995 * fs);
  return {lo, hi};
}

inline std::vector<FilterSpec> band_filter_specs(double fs = 16000.0) {
  std::vector<FilterSpec> specs;
  for (int c = 0; c < kBandCount; ++c) {
    auto [lo, hi] = band_edges(c, fs);
    specs.push_back({FilterSpec::Kind::butterworth_bandpass_2nd, lo, hi, 0.0});
  }
  return specs;
}

/// Per-frame log energy (dB) in each band, 32 ms frames every 5 ms,
/// zero-phase filtering, floored at -100 dB.
inline FeatureTrack band_energy_db(const AudioBuffer& x, double window_ms = 32.0, double hop_ms = 5.0) {
  require(std::abs(x.sample_rate - 16000.0) < 1e-9, errc::config,
          "band_energy_db: expects 16 kHz input (bands are defined over 0..8 kHz)");
  const double fs = x.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(window_ms * 1e-3 * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(hop_ms * 1e-3 * fs));

  FeatureTrack track;
  track.kind = FeatureKind::band_energy_db;
  track.t0 = (static_cast<double>(win) / 2.0) / fs;
  track.hop = static_cast<double>(hop) / fs;
  if (x.samples.size() < win) {
    track.values.resize(0, kBandCount);
    return track;
  }
  const std::size_t n_frames = (x.samples.size() - win) / hop + 1;
  track.values.resize(static_cast<Eigen::Index>(n_frames), kBandCount);

  for (int c = 0; c < kBandCount; ++c) {
    auto [lo, hi] = band_edges(c, fs);
    const Biquad q = butterworth_bandpass(lo, hi, fs);
    const std::vector<double> y = filter_zero_phase(q, x.samples);
    for (std::size_t f = 0; f < n_frames; ++f) {
      const std::size_t start = f * hop;
      double acc = 0.0;
      for (std::size_t i = 0; i < win; ++i) acc += y[start + i] * y[start + i];
      const double power = acc / static_cast<double>(win);
      track.values(static_cast<Eigen::Index>(f), c) = 10.0 * std::log10(std::max(power, kPowerFloor));
    }
  }
  return track;
}

}  // namespace waveprobe::dsp
