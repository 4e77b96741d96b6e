// STFT magnitude spectrogram with a Blackman window.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "waveprobe/audio.hpp"
#include "waveprobe/dsp/fft.hpp"
#include "waveprobe/feature_track.hpp"

namespace waveprobe::dsp {

inline std::vector<double> blackman_window(std::size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  const double den = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = static_cast<double>(i) / den;
    w[i] = 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * p) + 0.08 * std::cos(4.0 * std::numbers::pi * p);
  }
  return w;
}

/// One-sided magnitude spectrogram; fft size is the next power of two >= the
/// window length. Frame time is the window center. A signal shorter than one
/// window yields an empty track.
inline FeatureTrack stft_magnitude(const AudioBuffer& x, double window_ms, double hop_ms) {
  const double fs = x.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(window_ms * 1e-3 * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(hop_ms * 1e-3 * fs));
  require(win >= 8, errc::config, "stft_magnitude: window shorter than 8 samples");
  require(hop >= 1, errc::config, "stft_magnitude: hop shorter than 1 sample");

  const std::size_t nfft = next_pow2(win);
  const std::size_t nbins = nfft / 2 + 1;
  const std::vector<double> w = blackman_window(win);

  FeatureTrack track;
  track.kind = window_ms <= 8.0 ? FeatureKind::wideband_mag : FeatureKind::narrowband_mag;
  track.t0 = (static_cast<double>(win) / 2.0) / fs;
  track.hop = static_cast<double>(hop) / fs;

  if (x.samples.size() < win) {
    track.values.resize(0, static_cast<Eigen::Index>(nbins));
    return track;
  }
  const std::size_t n_frames = (x.samples.size() - win) / hop + 1;
  track.values.resize(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(nbins));

  std::vector<double> frame(win);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < win; ++i) frame[i] = x.samples[start + i] * w[i];
    auto spec = fft_real(frame, nfft);
    for (std::size_t b = 0; b < nbins; ++b)
      track.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = std::abs(spec[b]);
  }
  return track;
}

}  // namespace waveprobe::dsp
