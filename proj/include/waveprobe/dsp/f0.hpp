// F0 estimation by normalized autocorrelation with parabolic peak refinement.
//
// Per 32 ms frame the normalized cross-correlation
//   r(tau) = sum x[n] x[n+tau] / sqrt(sum x[n]^2 * sum x[n+tau]^2)
// is scanned over the lag range of the 60..500 Hz search band. Among local
// maxima within 90% of the best peak the shortest lag wins, which suppresses
// the period-multiple (octave-down) errors a plain argmax makes on strongly
// periodic input. Frames are voiced when the peak clears the threshold and
// the frame RMS clears the silence gate.
#pragma once

#include <cmath>
#include <vector>

#include "waveprobe/audio.hpp"
#include "waveprobe/feature_track.hpp"

namespace waveprobe::dsp {

struct F0Params {
  double f_min_hz = 60.0;
  double f_max_hz = 500.0;
  double window_ms = 32.0;
  double hop_ms = 5.0;
  double voicing_threshold = 0.5;  // on the normalized peak
  double silence_rms = 1e-3;       // -60 dBFS gate
  double candidate_ratio = 0.90;   // local maxima within this ratio of the best compete
};

namespace detail {

// quadratic fit through (-1,ym) (0,y0) (+1,yp); returns the abscissa of the
// extremum clamped to [-1, 1]
inline double parabolic_offset(double ym, double y0, double yp) {
  const double denom = ym - 2.0 * y0 + yp;
  if (std::abs(denom) < 1e-30) return 0.0;
  double d = 0.5 * (ym - yp) / denom;
  return std::clamp(d, -1.0, 1.0);
}

}  // namespace detail

inline FeatureTrack f0_estimate(const AudioBuffer& x, const F0Params& p = {}) {
  const double fs = x.sample_rate;
  require(p.f_min_hz > 0 && p.f_max_hz > p.f_min_hz && p.f_max_hz < fs / 2.0, errc::config,
          "f0_estimate: invalid search range");
  const std::size_t win = static_cast<std::size_t>(std::lround(p.window_ms * 1e-3 * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(p.hop_ms * 1e-3 * fs));
  const std::size_t lag_min = static_cast<std::size_t>(std::floor(fs / p.f_max_hz));
  const std::size_t lag_max = static_cast<std::size_t>(std::ceil(fs / p.f_min_hz));
  require(lag_max + 2 < win, errc::config, "f0_estimate: window too short for the search range");

  FeatureTrack track;
  track.kind = FeatureKind::log_f0;
  track.t0 = (static_cast<double>(win) / 2.0) / fs;
  track.hop = static_cast<double>(hop) / fs;
  if (x.samples.size() < win) {
    track.values.resize(0, 1);
    return track;
  }
  const std::size_t n_frames = (x.samples.size() - win) / hop + 1;
  track.values.resize(static_cast<Eigen::Index>(n_frames), 1);
  track.voiced.assign(n_frames, 0);

  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double* frame = x.samples.data() + f * hop;

    double energy = 0.0;
    for (std::size_t i = 0; i < win; ++i) energy += frame[i] * frame[i];
    const double rms = std::sqrt(energy / static_cast<double>(win));

    track.values(static_cast<Eigen::Index>(f), 0) = 0.0;
    if (rms < p.silence_rms) continue;

    // normalized cross-correlation over the overlap region
    for (std::size_t tau = lag_min - 1; tau <= lag_max + 1; ++tau) {
      const std::size_t m = win - tau;
      double c = 0.0, e0 = 0.0, e1 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        c += frame[i] * frame[i + tau];
        e0 += frame[i] * frame[i];
        e1 += frame[i + tau] * frame[i + tau];
      }
      const double den = std::sqrt(e0 * e1);
      r[tau] = den > 0.0 ? c / den : 0.0;
    }

    // local maxima in the admissible range
    double best = -1.0;
    for (std::size_t tau = lag_min; tau <= lag_max; ++tau)
      if (r[tau] >= r[tau - 1] && r[tau] >= r[tau + 1]) best = std::max(best, r[tau]);
    if (best < p.voicing_threshold) continue;

    std::size_t pick = 0;
    for (std::size_t tau = lag_min; tau <= lag_max; ++tau) {
      if (r[tau] >= r[tau - 1] && r[tau] >= r[tau + 1] && r[tau] >= p.candidate_ratio * best) {
        pick = tau;
        break;  // shortest qualifying lag
      }
    }
    if (pick == 0) continue;

    const double lag = static_cast<double>(pick) + detail::parabolic_offset(r[pick - 1], r[pick], r[pick + 1]);
    const double f0 = fs / lag;
    if (f0 < p.f_min_hz || f0 > p.f_max_hz) continue;
    track.values(static_cast<Eigen::Index>(f), 0) = std::log(f0);
    track.voiced[f] = 1;
  }
  return track;
}

}  // namespace waveprobe::dsp
