// Probe batteries: align activation rows with targets, fit linear probes on
// a train split, and score them on held-out data.
//
// Utterances are supplied through a loader callback so dumps can be streamed
// from disk; the loader may be called several times per utterance.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveprobe/activations.hpp"
#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"
#include "waveprobe/dsp/band_energy.hpp"
#include "waveprobe/dsp/lpc.hpp"
#include "waveprobe/feature_track.hpp"
#include "waveprobe/model.hpp"
#include "waveprobe/probes/metrics.hpp"
#include "waveprobe/probes/regression.hpp"
#include "waveprobe/wavenet.hpp"

namespace waveprobe {

struct ProbeUtterance {
  ActivationTensor acts;
  AudioBuffer audio;                   // waveform probes and references
  std::optional<FeatureTrack> target;  // feature probes
};

using UtteranceLoader = std::function<const ProbeUtterance&(std::size_t)>;

struct ProbeOptions {
  double test_fraction = 0.25;
  std::uint64_t split_seed = 17;
  double ridge_scale = kDefaultRidgeScale;
  int is_iterations = 2;
  std::size_t min_train_frames = 50;
  bool compute_references = true;  // waveform probes only
};

struct ProbeResult {
  std::string target;
  std::vector<int> layers;
  RegressionModel model;
  std::string metric;  // "snr_db", "spearman_rho" or "is_distance"
  std::optional<double> train_metric, test_metric;
  std::vector<std::optional<double>> train_per_dim, test_per_dim;
  std::int64_t n_train = 0, n_test = 0;
  std::size_t dropped_frames = 0;
  std::map<std::string, double> references;
};

/// Train/test assignment over utterances. Utterance-level when n >= 2; a
/// single utterance falls back to a leading/trailing frame split.
struct UtteranceSplit {
  std::vector<std::uint8_t> is_test;  // empty when frame_split
  bool frame_split = false;
};

inline UtteranceSplit split_utterances(std::size_t n, double test_fraction, std::uint64_t seed) {
  require(n >= 1, errc::config, "split_utterances: empty utterance set");
  require(test_fraction > 0.0 && test_fraction < 1.0, errc::config,
          "split_utterances: test_fraction must lie in (0, 1)");
  UtteranceSplit split;
  if (n == 1) {
    split.frame_split = true;
    return split;
  }
  std::size_t n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::min(std::max<std::size_t>(n_test, 1), n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

  split.is_test.assign(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) split.is_test[order[i]] = 1;
  return split;
}

struct AlignedFrames {
  Eigen::MatrixXd x;               // n_kept x total feature width
  std::vector<Eigen::Index> rows;  // kept track rows
  std::size_t dropped = 0;         // frames outside the activation range
};

/// Maps track frame times onto activation rows (nearest sample, honoring
/// decimation) and stacks the requested layers left to right.
inline AlignedFrames frame_align(const ActivationTensor& acts, const std::vector<int>& layers,
                                 const FeatureTrack& track, double sample_rate, bool voiced_only) {
  require(!layers.empty(), errc::config, "frame_align: no layers requested");
  require(sample_rate > 0.0, errc::config, "frame_align: bad sample rate");
  std::vector<const Eigen::MatrixXd*> mats;
  for (int id : layers) mats.push_back(&acts.output(id));

  AlignedFrames out;
  std::vector<Eigen::Index> kept_rows;
  std::vector<Eigen::Index> act_rows;
  for (Eigen::Index i = 0; i < track.n_frames(); ++i) {
    if (voiced_only && !track.is_voiced(i)) continue;
    const double t = track.frame_time(i);
    const std::int64_t sample = std::llround(t * sample_rate);
    const std::int64_t row = std::llround(static_cast<double>(sample) / acts.decimation);
    if (sample < 0 || row < 0 || row >= acts.n_samples) {
      ++out.dropped;
      continue;
    }
    kept_rows.push_back(i);
    act_rows.push_back(static_cast<Eigen::Index>(row));
  }

  const Eigen::Index width = static_cast<Eigen::Index>(layers.size()) * acts.width;
  out.x.resize(static_cast<Eigen::Index>(act_rows.size()), width);
  for (std::size_t r = 0; r < act_rows.size(); ++r)
    for (std::size_t l = 0; l < mats.size(); ++l)
      out.x.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l) * acts.width, 1, acts.width) =
          mats[l]->row(act_rows[r]);
  out.rows = std::move(kept_rows);
  return out;
}

namespace detail {

inline const char* feature_target_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::log_f0: return "log_f0";
    case FeatureKind::band_energy_db: return "band_energy_db";
    case FeatureKind::wideband_mag: return "wideband_spectrogram";
    case FeatureKind::narrowband_mag: return "narrowband_spectrogram";
  }
  fail(errc::config, "unknown feature kind");
}

inline void append_rows(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
  if (src.rows() == 0) return;
  if (dst.size() == 0) {
    dst = src;
    return;
  }
  require(dst.cols() == src.cols(), errc::format, "append_rows: width mismatch");
  const Eigen::Index old = dst.rows();
  dst.conservativeResize(old + src.rows(), Eigen::NoChange);
  dst.bottomRows(src.rows()) = src;
}

inline std::vector<std::optional<double>> per_dim_rho(const Eigen::MatrixXd& truth,
                                                      const Eigen::MatrixXd& pred) {
  std::vector<std::optional<double>> rho(static_cast<std::size_t>(truth.cols()));
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const Eigen::VectorXd a = truth.col(c);
    const Eigen::VectorXd b = pred.col(c);
    rho[static_cast<std::size_t>(c)] =
        spearman_rho({a.data(), static_cast<std::size_t>(a.size())},
                     {b.data(), static_cast<std::size_t>(b.size())});
  }
  return rho;
}

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : v)
    if (r) {
      sum += *r;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Linear probe from layer activations to a frame-level target track. The
/// metric depends on the track kind: Spearman rho for log-F0 and band
/// energies, Itakura-Saito distance (with per-bin rho detail) for
/// spectrogram targets.
inline ProbeResult probe_feature(const UtteranceLoader& load, std::size_t n_utterances,
                                 const std::vector<int>& layers, double sample_rate,
                                 const ProbeOptions& opt = {}) {
  require(n_utterances >= 1, errc::config, "probe_feature: no utterances");
  const UtteranceSplit split = split_utterances(n_utterances, opt.test_fraction, opt.split_seed);

  Eigen::MatrixXd x_train, y_train, x_test, y_test;
  std::size_t dropped = 0;
  std::optional<FeatureKind> kind;

  for (std::size_t i = 0; i < n_utterances; ++i) {
    const ProbeUtterance& utt = load(i);
    require(utt.target.has_value(), errc::config, "probe_feature: utterance has no target track");
    const FeatureTrack& track = *utt.target;
    if (!kind) kind = track.kind;
    require(*kind == track.kind, errc::config, "probe_feature: mixed target kinds");

    const bool voiced_only = track.kind == FeatureKind::log_f0;
    const AlignedFrames aligned =
        frame_align(utt.acts, layers, track, sample_rate, voiced_only);
    dropped += aligned.dropped;

    Eigen::MatrixXd targets(aligned.x.rows(), track.dim());
    for (Eigen::Index r = 0; r < targets.rows(); ++r) targets.row(r) = track.values.row(aligned.rows[static_cast<std::size_t>(r)]);

    if (split.frame_split) {
      const Eigen::Index n_test =
          std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(
                                        static_cast<double>(aligned.x.rows()) * opt.test_fraction)));
      const Eigen::Index n_train = aligned.x.rows() - n_test;
      require(n_train >= 1, errc::insufficient_data, "probe_feature: too few frames to split");
      detail::append_rows(x_train, aligned.x.topRows(n_train));
      detail::append_rows(y_train, targets.topRows(n_train));
      detail::append_rows(x_test, aligned.x.bottomRows(n_test));
      detail::append_rows(y_test, targets.bottomRows(n_test));
    } else if (split.is_test[i]) {
      detail::append_rows(x_test, aligned.x);
      detail::append_rows(y_test, targets);
    } else {
      detail::append_rows(x_train, aligned.x);
      detail::append_rows(y_train, targets);
    }
  }

  const Eigen::Index d = x_train.cols();
  const std::size_t need = std::max<std::size_t>(opt.min_train_frames, static_cast<std::size_t>(d) + 1);
  require(static_cast<std::size_t>(x_train.rows()) >= need, errc::insufficient_data,
          "probe_feature: need at least " + std::to_string(need) + " usable training frames, got " +
              std::to_string(x_train.rows()));
  require(x_test.rows() >= 3, errc::insufficient_data,
          "probe_feature: need at least 3 usable test frames, got " + std::to_string(x_test.rows()));

  ProbeResult res;
  res.target = detail::feature_target_name(*kind);
  res.layers = layers;
  res.n_train = x_train.rows();
  res.n_test = x_test.rows();
  res.dropped_frames = dropped;

  const bool spectral = *kind == FeatureKind::wideband_mag || *kind == FeatureKind::narrowband_mag;
  if (spectral) {
    // Magnitude tracks regress as floored powers under the IS objective.
    auto to_power = [](const Eigen::MatrixXd& mag) {
      return mag.array().square().max(dsp::kPowerFloor).matrix().eval();
    };
    const Eigen::MatrixXd p_train = to_power(y_train);
    const Eigen::MatrixXd p_test = to_power(y_test);
    res.model = is_regression_fit(x_train, p_train, opt.is_iterations, opt.ridge_scale);
    res.metric = "is_distance";
    const Eigen::MatrixXd yhat_train = res.model.predict(x_train);
    const Eigen::MatrixXd yhat_test = res.model.predict(x_test);
    res.train_metric = mean_is_distance(p_train, yhat_train);
    res.test_metric = mean_is_distance(p_test, yhat_test);
    res.train_per_dim = detail::per_dim_rho(p_train.array().log().matrix(), yhat_train);
    res.test_per_dim = detail::per_dim_rho(p_test.array().log().matrix(), yhat_test);
  } else {
    res.model = ols_fit(x_train, y_train, opt.ridge_scale);
    res.metric = "spearman_rho";
    res.train_per_dim = detail::per_dim_rho(y_train, res.model.predict(x_train));
    res.test_per_dim = detail::per_dim_rho(y_test, res.model.predict(x_test));
    res.train_metric = detail::mean_defined(res.train_per_dim);
    res.test_metric = detail::mean_defined(res.test_per_dim);
  }
  return res;
}

enum class WaveformTarget { current_sample, next_sample };

namespace detail {

struct SnrAccumulator {
  double ref = 0.0, err = 0.0;
  std::int64_t n = 0;
  void add(double r, double e) {
    ref += r * r;
    const double d = r - e;
    err += d * d;
    ++n;
  }
  double snr() const {
    require(ref > 0.0, errc::numeric, "snr: zero reference energy");
    if (err == 0.0) return kSnrCapDb;
    return std::min(kSnrCapDb, 10.0 * std::log10(ref / err));
  }
};

}  // namespace detail

/// Linear probe from activations to the waveform sample at (or one after)
/// each activation row, with the first receptive field excluded. Reference
/// SNRs: mu-law quantization reconstruction, the model's own next-sample
/// expectation, and a high-order LPC one-step predictor fit on the train
/// split.
inline ProbeResult probe_waveform(const UtteranceLoader& load, std::size_t n_utterances,
                                  const std::vector<int>& layers, const Model& model,
                                  WaveformTarget target, const ProbeOptions& opt = {}) {
  require(n_utterances >= 1, errc::config, "probe_waveform: no utterances");
  const UtteranceSplit split = split_utterances(n_utterances, opt.test_fraction, opt.split_seed);
  const std::int64_t warmup = receptive_field(model.config);
  const std::int64_t ahead = target == WaveformTarget::next_sample ? 1 : 0;
  const int lpc_order = 512;

  // Row r of a dump holds sample r * decimation; the probe target for that
  // row is audio[r * decimation + ahead].
  auto row_range = [&](const ProbeUtterance& utt) {
    const std::int64_t dec = utt.acts.decimation;
    const std::int64_t n_audio = static_cast<std::int64_t>(utt.audio.samples.size());
    const std::int64_t first = (warmup + dec - 1) / dec;
    const std::int64_t last = std::min(utt.acts.n_samples, (n_audio - ahead + dec - 1) / dec);
    return std::pair<std::int64_t, std::int64_t>(first, std::max(first, last));
  };
  auto stack_row = [&](const ProbeUtterance& utt, std::int64_t r, Eigen::MatrixXd& dst,
                       Eigen::Index out_row) {
    for (std::size_t l = 0; l < layers.size(); ++l)
      dst.block(out_row, static_cast<Eigen::Index>(l) * utt.acts.width, 1, utt.acts.width) =
          utt.acts.output(layers[l]).row(static_cast<Eigen::Index>(r));
  };

  auto is_test = [&](std::size_t i) { return !split.frame_split && split.is_test[i] != 0; };

  // Pass 1: accumulate the train normal equations (and the LPC
  // autocorrelation) streaming, one utterance at a time.
  OlsAccumulator acc;
  Eigen::VectorXd lpc_corr = Eigen::VectorXd::Zero(lpc_order + 1);
  std::int64_t lpc_samples = 0;
  for (std::size_t i = 0; i < n_utterances; ++i) {
    const ProbeUtterance& utt = load(i);
    require(static_cast<std::int64_t>(utt.audio.samples.size()) > warmup + 1, errc::insufficient_data,
            "probe_waveform: utterance shorter than the receptive field");
    if (is_test(i)) continue;
    auto [first, last] = row_range(utt);
    std::int64_t train_last = last;
    if (split.frame_split)
      train_last = first + static_cast<std::int64_t>(std::llround(
                               static_cast<double>(last - first) * (1.0 - opt.test_fraction)));
    if (train_last <= first) continue;

    const Eigen::Index rows = static_cast<Eigen::Index>(train_last - first);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(layers.size()) * utt.acts.width);
    Eigen::MatrixXd y(rows, 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
      stack_row(utt, first + r, x, r);
      y(r, 0) = utt.audio.samples[static_cast<std::size_t>((first + r) * utt.acts.decimation + ahead)];
    }
    acc.add(x, y);

    if (opt.compute_references) {
      std::span<const double> sig(utt.audio.samples);
      const int max_lag = std::min<int>(lpc_order, static_cast<int>(sig.size()) - 1);
      const Eigen::VectorXd r = dsp::autocorr_biased(sig, max_lag) * static_cast<double>(sig.size());
      lpc_corr.head(max_lag + 1) += r;
      lpc_samples += static_cast<std::int64_t>(sig.size());
    }
  }

  const std::size_t need =
      std::max<std::size_t>(opt.min_train_frames, static_cast<std::size_t>(acc.dim()) + 1);
  require(acc.count() >= static_cast<std::int64_t>(need), errc::insufficient_data,
          "probe_waveform: need at least " + std::to_string(need) + " usable training samples, got " +
              std::to_string(acc.count()));

  ProbeResult res;
  res.target = target == WaveformTarget::next_sample ? "waveform_next" : "waveform_current";
  res.layers = layers;
  res.model = acc.solve(opt.ridge_scale);
  res.metric = "snr_db";
  res.n_train = acc.count();

  std::optional<dsp::LevinsonResult> lpc;
  if (opt.compute_references) {
    require(lpc_samples > 4 * lpc_order, errc::insufficient_data,
            "probe_waveform: train split too short for the LPC reference");
    lpc = dsp::levinson(lpc_corr / static_cast<double>(lpc_samples), lpc_order);
  }

  // Pass 2: score both splits and the references.
  detail::SnrAccumulator train_snr, test_snr, quant_snr, model_snr, lpc_snr;
  const Eigen::VectorXd levels = [&] {
    Eigen::VectorXd v(model.config.quantization_levels);
    for (int q = 0; q < model.config.quantization_levels; ++q)
      v[q] = mu_law_level(static_cast<std::uint8_t>(q));
    return v;
  }();

  for (std::size_t i = 0; i < n_utterances; ++i) {
    const ProbeUtterance& utt = load(i);
    auto [first, last] = row_range(utt);
    if (last <= first) continue;
    std::int64_t boundary = split.frame_split
                                ? first + static_cast<std::int64_t>(std::llround(
                                              static_cast<double>(last - first) * (1.0 - opt.test_fraction)))
                                : (is_test(i) ? first : last);

    const Eigen::Index rows = static_cast<Eigen::Index>(last - first);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(layers.size()) * utt.acts.width);
    for (Eigen::Index r = 0; r < rows; ++r) stack_row(utt, first + r, x, r);
    const Eigen::MatrixXd yhat = res.model.predict(x);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::int64_t row = first + r;
      const double truth =
          utt.audio.samples[static_cast<std::size_t>(row * utt.acts.decimation + ahead)];
      (row < boundary ? train_snr : test_snr).add(truth, yhat(r, 0));
    }

    const bool scores_as_test = split.frame_split || is_test(i);
    if (!opt.compute_references || !scores_as_test) continue;

    const QuantizedSignal q = mu_law_encode(utt.audio);
    const std::int64_t n_audio = static_cast<std::int64_t>(utt.audio.samples.size());
    for (std::int64_t t = warmup; t + ahead < n_audio; ++t)
      quant_snr.add(utt.audio.samples[static_cast<std::size_t>(t + ahead)],
                    mu_law_level(q.codes[static_cast<std::size_t>(t + ahead)]));

    ForwardResult fwd = forward_teacher_forced(model, q);
    Eigen::VectorXd rowmax = fwd.logits.rowwise().maxCoeff();
    Eigen::MatrixXd p = (fwd.logits.colwise() - rowmax).array().exp().matrix();
    p.array().colwise() /= p.rowwise().sum().array();
    const Eigen::VectorXd expect = p * levels;
    for (std::int64_t t = warmup; t + 1 < n_audio; ++t)
      model_snr.add(utt.audio.samples[static_cast<std::size_t>(t + 1)],
                    expect[static_cast<Eigen::Index>(t)]);

    const std::int64_t lpc_first = std::max<std::int64_t>(warmup, lpc_order);
    for (std::int64_t t = lpc_first; t + 1 < n_audio; ++t) {
      double pred = 0.0;
      for (int k = 1; k <= lpc_order; ++k)
        pred += lpc->coeffs[k - 1] * utt.audio.samples[static_cast<std::size_t>(t + 1 - k)];
      lpc_snr.add(utt.audio.samples[static_cast<std::size_t>(t + 1)], pred);
    }
  }

  require(test_snr.n >= 3, errc::insufficient_data,
          "probe_waveform: need at least 3 usable test samples, got " + std::to_string(test_snr.n));
  res.n_test = test_snr.n;
  res.train_metric = train_snr.snr();
  res.test_metric = test_snr.snr();
  if (opt.compute_references) {
    res.references["quantization_snr_db"] = quant_snr.snr();
    res.references["model_next_sample_snr_db"] = model_snr.snr();
    res.references["lpc512_next_sample_snr_db"] = lpc_snr.snr();
  }
  return res;
}

struct PreactF0Layer {
  int layer = 0;
  std::optional<double> max_abs_rho;  // nullopt when every unit is constant
  int best_unit = -1;                 // filter units first, then gate units
  std::size_t constant_units = 0;
  std::int64_t n_frames = 0;
};

/// Per-layer, per-unit rank correlation between pre-activation frame
/// envelopes and log-F0 on pooled voiced frames. Each frame owns one tile of
/// rows ([t - hop/2, t + hop/2), the track's own partition) reduced by RMS;
/// a unit sampled mid-oscillation carries phase, its envelope carries rate.
/// No fitting: this reads raw unit behaviour.
inline std::vector<PreactF0Layer> preactivation_f0_correlation(const UtteranceLoader& load,
                                                               std::size_t n_utterances,
                                                               double sample_rate) {
  require(n_utterances >= 1, errc::config, "preact_f0: no utterances");

  std::vector<int> gated_layers;
  std::vector<Eigen::MatrixXd> pooled;  // per gated layer
  std::vector<double> f0;

  for (std::size_t i = 0; i < n_utterances; ++i) {
    const ProbeUtterance& utt = load(i);
    require(utt.acts.has_preacts(), errc::config, "preact_f0: dump lacks pre-activations");
    require(utt.target && utt.target->kind == FeatureKind::log_f0, errc::config,
            "preact_f0: utterance needs a log-F0 target track");
    if (gated_layers.empty()) {
      for (int id : utt.acts.layer_ids)
        if (id >= 1) gated_layers.push_back(id);
      require(!gated_layers.empty(), errc::config, "preact_f0: no gated layers in dump");
      pooled.resize(gated_layers.size());
    }

    const FeatureTrack& track = *utt.target;
    // Frame keeping mirrors frame_align; tiles are computed in row units so
    // decimated dumps reduce over whatever rows the tile still contains.
    const AlignedFrames aligned =
        frame_align(utt.acts, {gated_layers[0]}, track, sample_rate, /*voiced_only=*/true);
    const double rows_per_second = sample_rate / static_cast<double>(utt.acts.decimation);
    const double half_tile = 0.5 * track.hop * rows_per_second;
    const Eigen::Index n_rows = static_cast<Eigen::Index>(utt.acts.n_samples);
    std::vector<Eigen::Index> tile_lo(aligned.rows.size()), tile_len(aligned.rows.size());
    for (std::size_t k = 0; k < aligned.rows.size(); ++k) {
      const Eigen::Index fr = aligned.rows[k];
      const double center = track.frame_time(static_cast<std::size_t>(fr)) * rows_per_second;
      Eigen::Index lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::llround(center - half_tile)));
      Eigen::Index hi = std::min(n_rows, static_cast<Eigen::Index>(std::llround(center + half_tile)));
      if (hi <= lo) {  // hop below the decimation grid: keep the center row
        lo = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(center)), 0, n_rows - 1);
        hi = lo + 1;
      }
      tile_lo[k] = lo;
      tile_len[k] = hi - lo;
      f0.push_back(track.values(fr, 0));
    }

    for (std::size_t l = 0; l < gated_layers.size(); ++l) {
      const Eigen::MatrixXd& pre = utt.acts.preact(gated_layers[l]);
      Eigen::MatrixXd block(static_cast<Eigen::Index>(tile_lo.size()), pre.cols());
      for (std::size_t r = 0; r < tile_lo.size(); ++r)
        block.row(static_cast<Eigen::Index>(r)) =
            pre.middleRows(tile_lo[r], tile_len[r]).array().square().colwise().mean().sqrt();
      detail::append_rows(pooled[l], block);
    }
  }

  require(f0.size() >= 3, errc::insufficient_data,
          "preact_f0: need at least 3 voiced frames, got " + std::to_string(f0.size()));

  std::vector<PreactF0Layer> out;
  for (std::size_t l = 0; l < gated_layers.size(); ++l) {
    PreactF0Layer stat;
    stat.layer = gated_layers[l];
    stat.n_frames = pooled[l].rows();
    for (Eigen::Index u = 0; u < pooled[l].cols(); ++u) {
      const Eigen::VectorXd col = pooled[l].col(u);
      const std::optional<double> rho =
          spearman_rho({col.data(), static_cast<std::size_t>(col.size())}, f0);
      if (!rho) {
        ++stat.constant_units;
        continue;
      }
      if (!stat.max_abs_rho || std::abs(*rho) > *stat.max_abs_rho) {
        stat.max_abs_rho = std::abs(*rho);
        stat.best_unit = static_cast<int>(u);
      }
    }
    out.push_back(std::move(stat));
  }
  return out;
}

/// Smallest layer whose receptive field covers `n_samples`; layer 0 counts
/// with a field of one sample. nullopt when even the full stack is shorter.
inline std::optional<int> theoretical_layer_limit(std::int64_t n_samples, const ModelConfig& c) {
  require(n_samples >= 1, errc::config, "theoretical_layer_limit: need a positive sample count");
  std::int64_t field = 1;
  if (field >= n_samples) return 0;
  for (int l = 1; l <= c.n_layers(); ++l) {
    field += static_cast<std::int64_t>(c.conv_extra_taps) * c.dilation(l);
    if (field >= n_samples) return l;
  }
  return std::nullopt;
}

inline nlohmann::json probe_result_json(const ProbeResult& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json per_train = nlohmann::json::array();
  for (const auto& v : r.train_per_dim) per_train.push_back(opt(v));
  nlohmann::json per_test = nlohmann::json::array();
  for (const auto& v : r.test_per_dim) per_test.push_back(opt(v));
  nlohmann::json j{{"target", r.target},
                   {"layers", r.layers},
                   {"metric", r.metric},
                   {"train_metric", opt(r.train_metric)},
                   {"test_metric", opt(r.test_metric)},
                   {"n_train", r.n_train},
                   {"n_test", r.n_test},
                   {"dropped_frames", r.dropped_frames}};
  if (!r.train_per_dim.empty()) {
    j["train_per_dim"] = per_train;
    j["test_per_dim"] = per_test;
  }
  if (!r.references.empty()) j["references"] = r.references;
  return j;
}

}  // namespace waveprobe
