// Adam training loop over random clips of a quantized corpus.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "waveprobe/common.hpp"
#include "waveprobe/model.hpp"
#include "waveprobe/wavenet.hpp"

namespace waveprobe {

struct TrainOptions {
  int steps = 2000;
  int clip_samples = 16000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::function<void(int step, double loss)> on_step;  // optional progress hook
};

struct TrainStats {
  std::vector<double> losses;  // per-step clip loss
};

namespace detail {

/// rng() % n; the modulo bias is immaterial for corpus-sized n.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

inline void check_finite_or_fail(Model& params, Model& grads, int step) {
  for (const TensorView& t : tensor_views(grads))
    for (std::size_t i = 0; i < t.size; ++i)
      require(std::isfinite(t.data[i]), errc::numeric,
              "training diverged at step " + std::to_string(step) +
                  ": non-finite gradient in '" + t.name + "'");
  for (const TensorView& t : tensor_views(params))
    for (std::size_t i = 0; i < t.size; ++i)
      require(std::isfinite(t.data[i]), errc::numeric,
              "training diverged at step " + std::to_string(step) +
                  ": non-finite values in '" + t.name + "'");
}

}  // namespace detail

inline TrainStats train(Model& m, const std::vector<QuantizedSignal>& corpus, const TrainOptions& opt) {
  require(!corpus.empty(), errc::config, "train: empty corpus");
  require(opt.steps >= 1, errc::config, "train: steps must be positive");
  require(opt.clip_samples >= 2, errc::config, "train: clip_samples must be at least 2");
  require(opt.learning_rate > 0.0, errc::config, "train: learning_rate must be positive");
  for (const QuantizedSignal& q : corpus)
    require(q.codes.size() >= 2, errc::config, "train: every utterance needs at least 2 samples");

  Model adam_m = make_zero_model(m.config);
  Model adam_v = make_zero_model(m.config);
  std::vector<TensorView> pv = tensor_views(m);
  std::vector<TensorView> mv = tensor_views(adam_m);
  std::vector<TensorView> vv = tensor_views(adam_v);

  std::mt19937_64 rng(opt.seed);
  TrainStats stats;
  stats.losses.reserve(static_cast<std::size_t>(opt.steps));

  ForwardTrace tr;
  ForwardOptions fwd;
  fwd.keep_backward_caches = true;

  for (int step = 1; step <= opt.steps; ++step) {
    const std::size_t u = static_cast<std::size_t>(detail::bounded(rng, corpus.size()));
    const std::vector<std::uint8_t>& codes = corpus[u].codes;
    const std::size_t clip = std::min(codes.size(), static_cast<std::size_t>(opt.clip_samples));
    const std::size_t start =
        codes.size() > clip ? static_cast<std::size_t>(detail::bounded(rng, codes.size() - clip + 1)) : 0;
    std::span<const std::uint8_t> window(codes.data() + start, clip);

    forward_trace(m, window, tr, fwd);
    Eigen::MatrixXd dlogits;
    const double loss = softmax_xent_next(tr.logits, window, &dlogits);
    Model grads = backward(m, window, tr, dlogits);

    if (!std::isfinite(loss)) detail::check_finite_or_fail(m, grads, step);
    require(std::isfinite(loss), errc::numeric,
            "training diverged at step " + std::to_string(step) + ": non-finite loss");

    const std::vector<TensorView> gv = tensor_views(grads);
    const double bc1 = 1.0 - std::pow(opt.beta1, step);
    const double bc2 = 1.0 - std::pow(opt.beta2, step);
    for (std::size_t t = 0; t < pv.size(); ++t) {
      double* p = pv[t].data;
      double* gm = mv[t].data;
      double* gvv = vv[t].data;
      const double* g = gv[t].data;
      for (std::size_t i = 0; i < pv[t].size; ++i) {
        require(std::isfinite(g[i]), errc::numeric,
                "training diverged at step " + std::to_string(step) +
                    ": non-finite gradient in '" + gv[t].name + "'");
        gm[i] = opt.beta1 * gm[i] + (1.0 - opt.beta1) * g[i];
        gvv[i] = opt.beta2 * gvv[i] + (1.0 - opt.beta2) * g[i] * g[i];
        p[i] -= opt.learning_rate * (gm[i] / bc1) / (std::sqrt(gvv[i] / bc2) + opt.epsilon);
      }
    }

    stats.losses.push_back(loss);
    if (opt.on_step) opt.on_step(step, loss);
  }
  return stats;
}

/// Mean next-sample cross-entropy over whole utterances, no updates.
inline double evaluate_loss(const Model& m, const std::vector<QuantizedSignal>& corpus) {
  require(!corpus.empty(), errc::config, "evaluate_loss: empty corpus");
  double total = 0.0;
  std::size_t positions = 0;
  for (const QuantizedSignal& q : corpus) {
    ForwardResult r = forward_teacher_forced(m, q);
    const std::size_t n_pos = q.codes.size() - 1;
    total += softmax_xent_next(r.logits, q.codes) * static_cast<double>(n_pos);
    positions += n_pos;
  }
  return total / static_cast<double>(positions);
}

}  // namespace waveprobe
