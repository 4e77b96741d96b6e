// IIR section primitives: first-order Butterworth splits, second-order
// Butterworth bandpass (bilinear transform with edge prewarping), causal and
// zero-phase runs, and analytic frequency responses.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe::dsp {

struct FilterSpec {
  enum class Kind { butterworth_bandpass_2nd, linkwitz_riley_2nd };
  Kind kind = Kind::butterworth_bandpass_2nd;
  double lo_hz = 0.0;      // bandpass low edge
  double hi_hz = 0.0;      // bandpass high edge
  double cutoff_hz = 0.0;  // crossover cutoff
};

// y[t] = b0 x[t] + b1 x[t-1] + b2 x[t-2] - a1 y[t-1] - a2 y[t-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
};

struct FirstOrder {
  double b0 = 1.0, b1 = 0.0, a1 = 0.0;
};

inline double prewarp(double f_hz, double fs) {
  require(f_hz > 0.0 && f_hz < fs / 2.0, errc::config, "filter edge must lie in (0, Nyquist)");
  return std::tan(std::numbers::pi * f_hz / fs);
}

/// Second-order Butterworth bandpass from the analog prototype
/// H(s) = Bs / (s^2 + Bs + w0^2) with both edges prewarped.
inline Biquad butterworth_bandpass(double lo_hz, double hi_hz, double fs) {
  require(lo_hz < hi_hz, errc::config, "butterworth_bandpass: lo >= hi");
  const double wl = prewarp(lo_hz, fs);
  const double wh = prewarp(hi_hz, fs);
  const double bw = wh - wl;
  const double w02 = wl * wh;
  const double a0 = 1.0 + bw + w02;
  Biquad q;
  q.b0 = bw / a0;
  q.b1 = 0.0;
  q.b2 = -bw / a0;
  q.a1 = (2.0 * w02 - 2.0) / a0;
  q.a2 = (1.0 - bw + w02) / a0;
  return q;
}

/// First-order Butterworth low-pass section; two cascaded copies form the
/// low branch of a 2nd-order Linkwitz-Riley crossover.
inline FirstOrder first_order_lowpass(double cutoff_hz, double fs) {
  const double wc = prewarp(cutoff_hz, fs);
  FirstOrder s;
  s.b0 = wc / (1.0 + wc);
  s.b1 = s.b0;
  s.a1 = (wc - 1.0) / (1.0 + wc);
  return s;
}

inline FirstOrder first_order_highpass(double cutoff_hz, double fs) {
  const double wc = prewarp(cutoff_hz, fs);
  FirstOrder s;
  s.b0 = 1.0 / (1.0 + wc);
  s.b1 = -s.b0;
  s.a1 = (wc - 1.0) / (1.0 + wc);
  return s;
}

inline std::vector<double> filter_causal(const Biquad& q, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double yt = q.b0 * x[t] + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
    x2 = x1;
    x1 = x[t];
    y2 = y1;
    y1 = yt;
    y[t] = yt;
  }
  return y;
}

inline std::vector<double> filter_causal(const FirstOrder& s, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  double x1 = 0, y1 = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double yt = s.b0 * x[t] + s.b1 * x1 - s.a1 * y1;
    x1 = x[t];
    y1 = yt;
    y[t] = yt;
  }
  return y;
}

/// Forward-backward (zero-phase) run; squares the magnitude response.
template <class Section>
inline std::vector<double> filter_zero_phase(const Section& s, const std::vector<double>& x) {
  std::vector<double> y = filter_causal(s, x);
  std::reverse(y.begin(), y.end());
  y = filter_causal(s, y);
  std::reverse(y.begin(), y.end());
  return y;
}

inline std::complex<double> response_at(const Biquad& q, double f_hz, double fs) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs);
  return (q.b0 + q.b1 * z + q.b2 * z * z) / (1.0 + q.a1 * z + q.a2 * z * z);
}

inline std::complex<double> response_at(const FirstOrder& s, double f_hz, double fs) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs);
  return (s.b0 + s.b1 * z) / (1.0 + s.a1 * z);
}

/// Impulse-response energy beyond `tail_start` relative to total energy,
/// evaluated over `total` samples. Stability probe for filter contracts.
template <class Section>
inline double impulse_tail_energy_ratio(const Section& s, std::size_t tail_start, std::size_t total) {
  std::vector<double> impulse(total, 0.0);
  impulse[0] = 1.0;
  std::vector<double> h = filter_causal(s, impulse);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) (i < tail_start ? head : tail) += h[i] * h[i];
  const double tot = head + tail;
  return tot > 0.0 ? tail / tot : 0.0;
}

}  // namespace waveprobe::dsp
