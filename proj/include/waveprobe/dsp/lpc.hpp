// Linear prediction: biased autocorrelation, Levinson-Durbin recursion, and
// a held-out one-step prediction SNR.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"

namespace waveprobe::dsp {

/// r[k] = (1/N) sum_n x[n] x[n+k], k = 0..max_lag.
inline Eigen::VectorXd autocorr_biased(std::span<const double> x, int max_lag) {
  const std::size_t n = x.size();
  require(n > static_cast<std::size_t>(max_lag), errc::config, "autocorr_biased: signal shorter than max lag");
  Eigen::VectorXd r(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += x[t] * x[t + k];
    r[k] = acc / static_cast<double>(n);
  }
  return r;
}

struct LevinsonResult {
  Eigen::VectorXd coeffs;      // a_1..a_p; prediction x_hat[t] = sum_i a_i x[t-i]
  Eigen::VectorXd reflection;  // k_1..k_p
  double error_power = 0.0;    // final prediction error power
};

/// Solves the Toeplitz normal equations R a = r by the Levinson-Durbin
/// recursion. Truncates early if the prediction error collapses to zero.
inline LevinsonResult levinson(const Eigen::VectorXd& r, int order) {
  require(order >= 1 && r.size() >= order + 1, errc::config, "levinson: need order+1 autocorrelation lags");
  require(r[0] > 0.0, errc::numeric, "levinson: zero-energy autocorrelation");

  LevinsonResult out;
  out.coeffs = Eigen::VectorXd::Zero(order);
  out.reflection = Eigen::VectorXd::Zero(order);
  double err = r[0];

  for (int m = 1; m <= order; ++m) {
    if (err <= 1e-14 * r[0]) break;  // signal fully predicted
    double acc = r[m];
    for (int i = 1; i < m; ++i) acc -= out.coeffs[i - 1] * r[m - i];
    const double k = acc / err;
    out.reflection[m - 1] = k;

    Eigen::VectorXd prev = out.coeffs.head(m - 1);
    out.coeffs[m - 1] = k;
    for (int i = 1; i < m; ++i) out.coeffs[i - 1] = prev[i - 1] - k * prev[m - 1 - i];

    err *= (1.0 - k * k);
  }
  out.error_power = err;
  return out;
}

/// One-step prediction error signal e[t] = x[t] - sum_i a_i x[t-i] for
/// t in [start, end).
inline std::vector<double> lpc_residual(std::span<const double> x, const Eigen::VectorXd& a,
                                        std::size_t start, std::size_t end) {
  const int p = static_cast<int>(a.size());
  std::vector<double> e;
  e.reserve(end > start ? end - start : 0);
  for (std::size_t t = start; t < end; ++t) {
    double pred = 0.0;
    for (int i = 1; i <= p; ++i) pred += a[i - 1] * x[t - i];
    e.push_back(x[t] - pred);
  }
  return e;
}

struct LpcFit {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd reflection;
  int order = 0;
  double snr_db = 0.0;  // one-step prediction SNR on the held-out tail
};

/// Fits order-p coefficients on the leading (1 - holdout) fraction and
/// reports the one-step prediction SNR on the rest.
inline LpcFit lpc_fit(const AudioBuffer& x, int order = 512, double holdout = 0.2) {
  const std::size_t n = x.samples.size();
  require(n > 4 * static_cast<std::size_t>(order), errc::insufficient_data,
          "lpc_fit: signal length must exceed 4x order");
  const std::size_t split = static_cast<std::size_t>(static_cast<double>(n) * (1.0 - holdout));
  require(split > static_cast<std::size_t>(order), errc::insufficient_data, "lpc_fit: training part too short");

  std::span<const double> sig(x.samples);
  const Eigen::VectorXd r = autocorr_biased(sig.subspan(0, split), order);
  require(r[0] > 0.0, errc::numeric, "lpc_fit: zero-energy input");

  LpcFit fit;
  const LevinsonResult lev = levinson(r, order);
  fit.coeffs = lev.coeffs;
  fit.reflection = lev.reflection;
  fit.order = order;

  const std::size_t start = std::max(split, static_cast<std::size_t>(order));
  const std::vector<double> e = lpc_residual(sig, fit.coeffs, start, n);
  double se = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    se += e[i] * e[i];
    sx += x.samples[start + i] * x.samples[start + i];
  }
  require(sx > 0.0, errc::numeric, "lpc_fit: zero-energy held-out segment");
  fit.snr_db = se > 0.0 ? std::min(120.0, 10.0 * std::log10(sx / se)) : 120.0;
  return fit;
}

}  // namespace waveprobe::dsp
