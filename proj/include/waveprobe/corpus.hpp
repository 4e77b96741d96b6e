// Synthetic harmonic corpus: random-walk F0 contours with phase-locked
// harmonics, plus exact ground-truth sidecar tracks.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"
#include "waveprobe/dsp/band_energy.hpp"
#include "waveprobe/feature_track.hpp"

namespace waveprobe {

struct CorpusSpec {
  int n_utterances = 20;
  double duration_s = 0.5;
  double sample_rate = 16000.0;
  double f0_min_hz = 100.0;
  double f0_max_hz = 300.0;
  int n_harmonics = 8;
  double noise_db = -30.0;  // white noise level relative to full scale
  std::uint64_t seed = 1;

  void validate() const {
    require(n_utterances >= 1, errc::config, "corpus: n_utterances must be positive");
    require(duration_s > 0.0, errc::config, "corpus: duration_s must be positive");
    require(sample_rate > 0.0, errc::config, "corpus: sample_rate must be positive");
    require(f0_min_hz > 0.0 && f0_max_hz >= f0_min_hz, errc::config, "corpus: need 0 < f0_min <= f0_max");
    require(n_harmonics >= 1, errc::config, "corpus: n_harmonics must be positive");
    require(f0_max_hz * n_harmonics < 0.5 * sample_rate, errc::config,
            "corpus: highest harmonic must stay below Nyquist");
  }
};

inline void to_json(nlohmann::json& j, const CorpusSpec& s) {
  j = nlohmann::json{{"n_utterances", s.n_utterances}, {"duration_s", s.duration_s},
                     {"sample_rate", s.sample_rate},   {"f0_min_hz", s.f0_min_hz},
                     {"f0_max_hz", s.f0_max_hz},       {"n_harmonics", s.n_harmonics},
                     {"noise_db", s.noise_db},         {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, CorpusSpec& s) {
  s = CorpusSpec{};
  j.at("n_utterances").get_to(s.n_utterances);
  j.at("duration_s").get_to(s.duration_s);
  if (j.contains("sample_rate")) j.at("sample_rate").get_to(s.sample_rate);
  j.at("f0_min_hz").get_to(s.f0_min_hz);
  j.at("f0_max_hz").get_to(s.f0_max_hz);
  j.at("n_harmonics").get_to(s.n_harmonics);
  j.at("noise_db").get_to(s.noise_db);
  j.at("seed").get_to(s.seed);
}

/// Stable per-stream seed derivation.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SynthUtterance {
  AudioBuffer audio;
  std::vector<double> f0_hz;  // exact per-sample fundamental
};

namespace detail {

/// Piecewise-linear random walk sampled per-sample, reflected into [lo, hi].
inline std::vector<double> reflected_walk(std::size_t n, double lo, double hi, double knot_step,
                                          std::size_t knot_samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> step(-knot_step, knot_step);
  const std::size_t n_knots = n / knot_samples + 2;
  std::vector<double> knots(n_knots);
  knots[0] = lo + (hi - lo) * u01(rng);
  for (std::size_t k = 1; k < n_knots; ++k) {
    double v = knots[k - 1] + step(rng);
    while (v < lo || v > hi) v = v < lo ? 2.0 * lo - v : 2.0 * hi - v;
    knots[k] = v;
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t k = t / knot_samples;
    const double frac = static_cast<double>(t - k * knot_samples) / static_cast<double>(knot_samples);
    out[t] = knots[k] * (1.0 - frac) + knots[k + 1] * frac;
  }
  return out;
}

}  // namespace detail

/// Deterministic per index: utterance i depends only on (spec.seed, i).
inline SynthUtterance synth_utterance(const CorpusSpec& spec, int index) {
  spec.validate();
  require(index >= 0 && index < spec.n_utterances, errc::config, "synth_utterance: index out of range");
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(index)));

  const double fs = spec.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  require(n >= 1, errc::config, "synth_utterance: empty utterance");

  const std::size_t f0_knot = static_cast<std::size_t>(std::llround(0.005 * fs));  // 5 ms
  const std::size_t amp_knot = static_cast<std::size_t>(std::llround(0.025 * fs));
  std::vector<double> f0 =
      detail::reflected_walk(n, spec.f0_min_hz, spec.f0_max_hz,
                             0.04 * (spec.f0_max_hz - spec.f0_min_hz), f0_knot, rng);
  std::vector<double> amp = detail::reflected_walk(n, 0.25, 0.9, 0.05, amp_knot, rng);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double phase0 = 2.0 * std::numbers::pi * u01(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_amp = std::pow(10.0, spec.noise_db / 20.0);

  double weight_sum = 0.0;
  for (int h = 1; h <= spec.n_harmonics; ++h) weight_sum += 1.0 / h;

  SynthUtterance out;
  out.audio.sample_rate = fs;
  out.audio.samples.resize(n);
  double phase = phase0;
  for (std::size_t t = 0; t < n; ++t) {
    phase += 2.0 * std::numbers::pi * f0[t] / fs;
    double s = 0.0;
    for (int h = 1; h <= spec.n_harmonics; ++h) s += std::sin(h * phase) / h;
    out.audio.samples[t] = std::clamp(amp[t] * s / weight_sum + noise_amp * gauss(rng), -1.0, 1.0);
  }
  out.f0_hz = std::move(f0);
  return out;
}

/// Exact log-F0 track framed like the autocorrelation estimator, so rows of
/// the two tracks land on the same times.
inline FeatureTrack exact_f0_track(const SynthUtterance& u, double window_ms = 32.0, double hop_ms = 5.0) {
  const double fs = u.audio.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::llround(window_ms * fs / 1000.0));
  const std::size_t hop = static_cast<std::size_t>(std::llround(hop_ms * fs / 1000.0));
  const std::size_t n = u.f0_hz.size();

  FeatureTrack track;
  track.kind = FeatureKind::log_f0;
  track.t0 = static_cast<double>(win / 2) / fs;
  track.hop = static_cast<double>(hop) / fs;
  const std::size_t n_frames = n >= win ? (n - win) / hop + 1 : 0;
  track.values.resize(static_cast<Eigen::Index>(n_frames), 1);
  track.voiced.assign(n_frames, 1);
  for (std::size_t f = 0; f < n_frames; ++f) {
    track.values(static_cast<Eigen::Index>(f), 0) = std::log(u.f0_hz[f * hop + win / 2]);
  }
  return track;
}

inline FeatureTrack band_energy_track(const SynthUtterance& u) {
  return dsp::band_energy_db(u.audio);
}

inline std::string utterance_basename(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "utt_%03d", index);
  return buf;
}

}  // namespace waveprobe
