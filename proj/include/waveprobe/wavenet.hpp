// Teacher-forced forward pass, next-sample cross-entropy, and the matching
// analytic backward pass.
//
// Layer l computes y = x + W_r (tanh(conv_f x) * sigmoid(conv_g x)) with a
// skip projection of the gated product; convolutions are causal and dilated,
// with no bias terms. The post stack is relu, 1x1, relu, 1x1 over the summed
// skips. All activations are time-major (n_samples x channels).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "waveprobe/activations.hpp"
#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"
#include "waveprobe/model.hpp"

namespace waveprobe {

enum class CaptureMode { none, outputs, outputs_and_preacts };

/// y[t] = sum_n x[t - n*dilation] W_n, missing history treated as zero.
inline Eigen::MatrixXd dilated_causal_conv(const Eigen::MatrixXd& x,
                                           const std::vector<Eigen::MatrixXd>& taps, int dilation) {
  require(dilation >= 1, errc::config, "dilated_causal_conv: dilation must be positive");
  require(!taps.empty(), errc::config, "dilated_causal_conv: no taps");
  const Eigen::Index t_len = x.rows();
  Eigen::MatrixXd y = x * taps[0];
  for (std::size_t n = 1; n < taps.size(); ++n) {
    const Eigen::Index off = static_cast<Eigen::Index>(n) * dilation;
    if (off >= t_len) break;
    y.bottomRows(t_len - off).noalias() += x.topRows(t_len - off) * taps[n];
  }
  return y;
}

struct ForwardTrace {
  // xs[0] is the embedding output; xs[l] the output of gated layer l.
  std::vector<Eigen::MatrixXd> xs;
  std::vector<Eigen::MatrixXd> pf, pg;    // pre-activations per gated layer
  std::vector<Eigen::MatrixXd> ta, sg, z; // tanh, sigmoid, gated product (backward caches)
  Eigen::MatrixXd skip_sum, relu1, hidden, relu2, logits;
};

struct ForwardOptions {
  bool keep_backward_caches = false;
  bool keep_preacts = false;
};

inline void forward_trace(const Model& m, std::span<const std::uint8_t> codes, ForwardTrace& tr,
                          const ForwardOptions& opt = {}) {
  const ModelConfig& c = m.config;
  const Eigen::Index t_len = static_cast<Eigen::Index>(codes.size());
  require(t_len >= 1, errc::config, "forward: empty code sequence");
  for (std::uint8_t q : codes)
    require(q < c.quantization_levels, errc::config, "forward: code exceeds quantization range");

  const int n_layers = c.n_layers();
  const bool keep_pre = opt.keep_backward_caches || opt.keep_preacts;
  tr.xs.assign(static_cast<std::size_t>(n_layers) + 1, Eigen::MatrixXd());
  tr.pf.assign(keep_pre ? n_layers : 0, Eigen::MatrixXd());
  tr.pg.assign(keep_pre ? n_layers : 0, Eigen::MatrixXd());
  tr.ta.assign(opt.keep_backward_caches ? n_layers : 0, Eigen::MatrixXd());
  tr.sg.assign(opt.keep_backward_caches ? n_layers : 0, Eigen::MatrixXd());
  tr.z.assign(opt.keep_backward_caches ? n_layers : 0, Eigen::MatrixXd());

  tr.xs[0].resize(t_len, c.layer_width);
  for (Eigen::Index t = 0; t < t_len; ++t) tr.xs[0].row(t) = m.embedding.row(codes[static_cast<std::size_t>(t)]);

  tr.skip_sum = Eigen::MatrixXd::Zero(t_len, c.skip_width);
  for (int l = 1; l <= n_layers; ++l) {
    const GatedLayerWeights& w = m.layers[static_cast<std::size_t>(l - 1)];
    const int k = c.dilation(l);
    Eigen::MatrixXd pf = dilated_causal_conv(tr.xs[static_cast<std::size_t>(l - 1)], w.w_filter, k);
    Eigen::MatrixXd pg = dilated_causal_conv(tr.xs[static_cast<std::size_t>(l - 1)], w.w_gate, k);
    Eigen::MatrixXd ta = pf.array().tanh().matrix();
    Eigen::MatrixXd sg = (1.0 / (1.0 + (-pg.array()).exp())).matrix();
    Eigen::MatrixXd z = ta.cwiseProduct(sg);

    tr.skip_sum.noalias() += z * w.w_skip;
    tr.xs[static_cast<std::size_t>(l)] = tr.xs[static_cast<std::size_t>(l - 1)];
    tr.xs[static_cast<std::size_t>(l)].noalias() += z * w.w_res;

    const std::size_t li = static_cast<std::size_t>(l - 1);
    if (keep_pre) {
      tr.pf[li] = std::move(pf);
      tr.pg[li] = std::move(pg);
    }
    if (opt.keep_backward_caches) {
      tr.ta[li] = std::move(ta);
      tr.sg[li] = std::move(sg);
      tr.z[li] = std::move(z);
    }
  }

  tr.relu1 = tr.skip_sum.cwiseMax(0.0);
  tr.hidden = (tr.relu1 * m.post1).rowwise() + m.post1_bias.transpose();
  tr.relu2 = tr.hidden.cwiseMax(0.0);
  tr.logits = (tr.relu2 * m.post2).rowwise() + m.post2_bias.transpose();
}

/// Mean cross-entropy of logits row t against codes[t+1], t in [0, T-2].
/// When dlogits is given it receives the gradient (last row zero).
inline double softmax_xent_next(const Eigen::MatrixXd& logits, std::span<const std::uint8_t> codes,
                                Eigen::MatrixXd* dlogits = nullptr) {
  const Eigen::Index t_len = logits.rows();
  require(t_len >= 2 && static_cast<std::size_t>(t_len) == codes.size(), errc::config,
          "softmax_xent_next: need at least 2 samples");
  const Eigen::Index n_pos = t_len - 1;

  Eigen::VectorXd rowmax = logits.topRows(n_pos).rowwise().maxCoeff();
  Eigen::MatrixXd p = (logits.topRows(n_pos).colwise() - rowmax).array().exp().matrix();
  Eigen::VectorXd rowsum = p.rowwise().sum();

  double loss = 0.0;
  for (Eigen::Index t = 0; t < n_pos; ++t)
    loss += std::log(rowsum[t]) - (logits(t, codes[static_cast<std::size_t>(t) + 1]) - rowmax[t]);
  loss /= static_cast<double>(n_pos);

  if (dlogits != nullptr) {
    p.array().colwise() /= rowsum.array();
    for (Eigen::Index t = 0; t < n_pos; ++t) p(t, codes[static_cast<std::size_t>(t) + 1]) -= 1.0;
    dlogits->setZero(t_len, logits.cols());
    dlogits->topRows(n_pos) = p / static_cast<double>(n_pos);
  }
  return loss;
}

/// Full backward pass; requires a trace built with keep_backward_caches.
inline Model backward(const Model& m, std::span<const std::uint8_t> codes, const ForwardTrace& tr,
                      const Eigen::MatrixXd& dlogits) {
  const ModelConfig& c = m.config;
  require(!tr.z.empty() || c.n_layers() == 0, errc::config, "backward: trace lacks caches");
  const Eigen::Index t_len = tr.xs[0].rows();
  Model g = make_zero_model(c);

  Eigen::MatrixXd d_relu2 = dlogits * m.post2.transpose();
  g.post2.noalias() = tr.relu2.transpose() * dlogits;
  g.post2_bias = dlogits.colwise().sum().transpose();

  Eigen::MatrixXd d_hidden = d_relu2.cwiseProduct((tr.hidden.array() > 0.0).cast<double>().matrix());
  g.post1.noalias() = tr.relu1.transpose() * d_hidden;
  g.post1_bias = d_hidden.colwise().sum().transpose();

  Eigen::MatrixXd d_relu1 = d_hidden * m.post1.transpose();
  Eigen::MatrixXd d_skip = d_relu1.cwiseProduct((tr.skip_sum.array() > 0.0).cast<double>().matrix());

  Eigen::MatrixXd d_y = Eigen::MatrixXd::Zero(t_len, c.layer_width);
  for (int l = c.n_layers(); l >= 1; --l) {
    const std::size_t li = static_cast<std::size_t>(l - 1);
    const GatedLayerWeights& w = m.layers[li];
    GatedLayerWeights& gw = g.layers[li];
    const int k = c.dilation(l);
    const Eigen::MatrixXd& x_in = tr.xs[li];

    gw.w_skip.noalias() = tr.z[li].transpose() * d_skip;
    gw.w_res.noalias() = tr.z[li].transpose() * d_y;

    Eigen::MatrixXd d_z = d_skip * w.w_skip.transpose();
    d_z.noalias() += d_y * w.w_res.transpose();

    Eigen::MatrixXd d_pf =
        (d_z.array() * tr.sg[li].array() * (1.0 - tr.ta[li].array().square())).matrix();
    Eigen::MatrixXd d_pg =
        (d_z.array() * tr.ta[li].array() * tr.sg[li].array() * (1.0 - tr.sg[li].array())).matrix();

    // Residual path, then the transposed convolutions.
    Eigen::MatrixXd d_x = d_y;
    for (std::size_t n = 0; n < w.w_filter.size(); ++n) {
      const Eigen::Index off = static_cast<Eigen::Index>(n) * k;
      if (off >= t_len) break;
      const Eigen::Index span = t_len - off;
      gw.w_filter[n].noalias() = x_in.topRows(span).transpose() * d_pf.bottomRows(span);
      gw.w_gate[n].noalias() = x_in.topRows(span).transpose() * d_pg.bottomRows(span);
      d_x.topRows(span).noalias() += d_pf.bottomRows(span) * w.w_filter[n].transpose();
      d_x.topRows(span).noalias() += d_pg.bottomRows(span) * w.w_gate[n].transpose();
    }
    d_y = std::move(d_x);
  }

  for (Eigen::Index t = 0; t < t_len; ++t)
    g.embedding.row(codes[static_cast<std::size_t>(t)]) += d_y.row(t);
  return g;
}

struct ForwardResult {
  Eigen::MatrixXd logits;
  ActivationTensor activations;
};

/// Forward pass over a whole sequence, optionally capturing every layer.
inline ForwardResult forward_teacher_forced(const Model& m, const QuantizedSignal& q,
                                            CaptureMode capture = CaptureMode::none) {
  require(q.codes.size() >= 2, errc::config, "forward_teacher_forced: need at least 2 samples");
  ForwardOptions opt;
  opt.keep_preacts = capture == CaptureMode::outputs_and_preacts;
  ForwardTrace tr;
  forward_trace(m, q.codes, tr, opt);

  ForwardResult out;
  out.logits = std::move(tr.logits);
  if (capture != CaptureMode::none) {
    ActivationTensor& acts = out.activations;
    acts.width = m.config.layer_width;
    acts.n_samples = static_cast<std::int64_t>(q.codes.size());
    acts.layer_ids.resize(tr.xs.size());
    for (std::size_t i = 0; i < tr.xs.size(); ++i) acts.layer_ids[i] = static_cast<int>(i);
    acts.outputs = std::move(tr.xs);
    if (capture == CaptureMode::outputs_and_preacts) {
      acts.preacts.reserve(tr.pf.size());
      for (std::size_t i = 0; i < tr.pf.size(); ++i) {
        Eigen::MatrixXd pre(acts.n_samples, 2 * acts.width);
        pre.leftCols(acts.width) = tr.pf[i];
        pre.rightCols(acts.width) = tr.pg[i];
        acts.preacts.push_back(std::move(pre));
      }
    }
  }
  return out;
}

}  // namespace waveprobe
