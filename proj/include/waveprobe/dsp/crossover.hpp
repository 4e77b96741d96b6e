// 2nd-order Linkwitz-Riley crossover built from cascaded first-order
// Butterworth sections.
//
// Causal mode: baseband = LP o LP, wideband = -(HP o HP); the branch sum is
// then the bilinear image of (wc - s)/(wc + s), an allpass, so the summed
// magnitude is exactly flat. Zero-phase mode runs one section forward and
// backward per branch, giving |H|^2 responses that sum to one exactly; no
// polarity flip is needed there.
#pragma once

#include <vector>

#include "waveprobe/dsp/biquad.hpp"

namespace waveprobe::dsp {

enum class FilterMode { causal, zero_phase };

struct CrossoverSplit {
  std::vector<double> baseband;
  std::vector<double> wideband;
};

inline CrossoverSplit linkwitz_riley_split(const std::vector<double>& x, double cutoff_hz, double fs,
                                           FilterMode mode = FilterMode::causal) {
  require(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0, errc::config,
          "linkwitz_riley_split: cutoff must lie in (0, Nyquist)");
  const FirstOrder lp = first_order_lowpass(cutoff_hz, fs);
  const FirstOrder hp = first_order_highpass(cutoff_hz, fs);

  CrossoverSplit out;
  if (mode == FilterMode::causal) {
    out.baseband = filter_causal(lp, filter_causal(lp, x));
    out.wideband = filter_causal(hp, filter_causal(hp, x));
    for (double& v : out.wideband) v = -v;
  } else {
    out.baseband = filter_zero_phase(lp, x);
    out.wideband = filter_zero_phase(hp, x);
  }
  return out;
}

}  // namespace waveprobe::dsp
