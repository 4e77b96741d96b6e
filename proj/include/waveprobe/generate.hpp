// Autoregressive sampling by windowed re-forwarding: each step re-runs the
// network over the last receptive field of codes. Slow but simple, and it
// shares every code path with teacher forcing.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "waveprobe/common.hpp"
#include "waveprobe/model.hpp"
#include "waveprobe/wavenet.hpp"

namespace waveprobe {

struct GenerateOptions {
  std::int64_t n_samples = 0;
  double temperature = 1.0;
  bool argmax = false;
  std::uint64_t seed = 0;
};

/// Returns the n_samples generated codes (the seed is not included).
inline std::vector<std::uint8_t> generate(const Model& m, std::span<const std::uint8_t> seed_codes,
                                          const GenerateOptions& opt) {
  require(opt.n_samples >= 1, errc::config, "generate: sample count must be positive");
  require(!seed_codes.empty(), errc::config, "generate: need at least one seed code");
  require(opt.argmax || opt.temperature > 0.0, errc::config, "generate: temperature must be positive");

  const std::size_t window = static_cast<std::size_t>(receptive_field(m.config));
  std::vector<std::uint8_t> history(seed_codes.begin(), seed_codes.end());
  history.reserve(history.size() + static_cast<std::size_t>(opt.n_samples));

  std::mt19937_64 rng(opt.seed);
  ForwardTrace tr;
  for (std::int64_t i = 0; i < opt.n_samples; ++i) {
    const std::size_t len = std::min(window, history.size());
    std::span<const std::uint8_t> ctx(history.data() + history.size() - len, len);
    forward_trace(m, ctx, tr);
    const Eigen::Index last = tr.logits.rows() - 1;

    std::uint8_t next = 0;
    if (opt.argmax) {
      Eigen::Index best = 0;
      tr.logits.row(last).maxCoeff(&best);
      next = static_cast<std::uint8_t>(best);
    } else {
      Eigen::ArrayXd a = tr.logits.row(last).transpose().array() / opt.temperature;
      a -= a.maxCoeff();
      Eigen::ArrayXd p = a.exp();
      const double total = p.sum();
      // 53-bit uniform draw; inverse CDF over unnormalized weights.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
      double cum = 0.0;
      Eigen::Index pick = p.size() - 1;
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        cum += p[k];
        if (cum >= u) {
          pick = k;
          break;
        }
      }
      next = static_cast<std::uint8_t>(pick);
    }
    history.push_back(next);
  }
  return {history.end() - static_cast<std::ptrdiff_t>(opt.n_samples), history.end()};
}

}  // namespace waveprobe
