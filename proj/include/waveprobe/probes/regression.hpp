// Linear probes: ridge-stabilized least squares over streamed normal
// equations, and an Itakura-Saito log-power regression solved by a fixed
// number of Newton iterations.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "waveprobe/common.hpp"

namespace waveprobe {

enum class RegressionObjective { least_squares, itakura_saito };

struct RegressionModel {
  Eigen::MatrixXd weights;  // d x m
  Eigen::VectorXd bias;     // m
  RegressionObjective objective = RegressionObjective::least_squares;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
    require(x.cols() == weights.rows(), errc::format,
            "predict: feature width " + std::to_string(x.cols()) + " does not match probe width " +
                std::to_string(weights.rows()));
    return (x * weights).rowwise() + bias.transpose();
  }
};

inline constexpr double kDefaultRidgeScale = 1e-6;  // lambda = scale * trace(Gram)/d

/// Streaming accumulator for centered least squares: only X'X, X'Y and the
/// column sums are kept, so the frame count never has to fit in memory.
class OlsAccumulator {
 public:
  void add(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    require(x.rows() == y.rows(), errc::config, "ols: X and Y row counts differ");
    if (n_ == 0) {
      sxx_ = Eigen::MatrixXd::Zero(x.cols(), x.cols());
      sxy_ = Eigen::MatrixXd::Zero(x.cols(), y.cols());
      sx_ = Eigen::VectorXd::Zero(x.cols());
      sy_ = Eigen::VectorXd::Zero(y.cols());
    }
    require(x.cols() == sxx_.rows() && y.cols() == sxy_.cols(), errc::config, "ols: inconsistent widths");
    sxx_.noalias() += x.transpose() * x;
    sxy_.noalias() += x.transpose() * y;
    sx_ += x.colwise().sum().transpose();
    sy_ += y.colwise().sum().transpose();
    n_ += static_cast<std::int64_t>(x.rows());
  }

  std::int64_t count() const { return n_; }
  Eigen::Index dim() const { return sxx_.rows(); }

  /// Centered solve. ridge_scale == 0 requests an exact solve and fails on a
  /// rank-deficient design instead of silently regularizing.
  RegressionModel solve(double ridge_scale = kDefaultRidgeScale) const {
    require(n_ > 0, errc::insufficient_data, "ols: no data accumulated");
    const Eigen::Index d = sxx_.rows();
    require(n_ > d, errc::insufficient_data,
            "ols: need more than " + std::to_string(d) + " rows, got " + std::to_string(n_));

    const double n = static_cast<double>(n_);
    const Eigen::VectorXd mx = sx_ / n;
    const Eigen::VectorXd my = sy_ / n;
    Eigen::MatrixXd gram = sxx_ - n * mx * mx.transpose();
    const Eigen::MatrixXd cross = sxy_ - n * mx * my.transpose();

    if (ridge_scale > 0.0) {
      const double lambda = ridge_scale * gram.trace() / static_cast<double>(d);
      gram.diagonal().array() += lambda;
    }
    const auto ldlt = gram.ldlt();
    const Eigen::MatrixXd w = ldlt.solve(cross);
    if (ridge_scale == 0.0) {
      // Normal equations stay consistent even for singular designs, so the
      // residual alone cannot expose deficiency; inspect the pivots too.
      const Eigen::VectorXd piv = ldlt.vectorD().cwiseAbs();
      const double resid = (gram * w - cross).norm();
      require(w.allFinite() && piv.minCoeff() > 1e-10 * piv.maxCoeff() &&
                  resid <= 1e-8 * (cross.norm() + 1.0),
              errc::numeric, "ols: rank-deficient design matrix; refusing an exact solve");
    }
    require(w.allFinite(), errc::numeric, "ols: solve produced non-finite weights");

    RegressionModel model;
    model.weights = w;
    model.bias = my - w.transpose() * mx;
    model.objective = RegressionObjective::least_squares;
    return model;
  }

 private:
  Eigen::MatrixXd sxx_, sxy_;
  Eigen::VectorXd sx_, sy_;
  std::int64_t n_ = 0;
};

inline RegressionModel ols_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               double ridge_scale = kDefaultRidgeScale) {
  OlsAccumulator acc;
  acc.add(x, y);
  return acc.solve(ridge_scale);
}

/// d_IS(p, p_hat) = p/p_hat - ln(p/p_hat) - 1; zero iff p == p_hat.
inline double itakura_saito_distance(double p, double p_hat) {
  require(p > 0.0 && p_hat > 0.0, errc::config, "itakura_saito_distance: arguments must be positive");
  const double r = p / p_hat;
  return r - std::log(r) - 1.0;
}

/// Mean d_IS between positive powers P and predicted log powers Yhat.
inline double mean_is_distance(const Eigen::MatrixXd& p, const Eigen::MatrixXd& yhat_log) {
  require(p.rows() == yhat_log.rows() && p.cols() == yhat_log.cols(), errc::config,
          "mean_is_distance: shape mismatch");
  require(p.size() > 0, errc::config, "mean_is_distance: empty input");
  require((p.array() > 0.0).all(), errc::config, "mean_is_distance: powers must be positive");
  const Eigen::ArrayXXd r = p.array() * (-yhat_log.array()).exp();
  return (r - r.log() - 1.0).mean();
}

/// Sum_t,b (p e^{-yhat} + yhat): the IS objective up to a target-only
/// constant, averaged over rows. Non-finite predictions count as +inf.
inline double is_objective(const Eigen::MatrixXd& p, const Eigen::MatrixXd& yhat_log) {
  const Eigen::ArrayXXd terms = p.array() * (-yhat_log.array()).exp() + yhat_log.array();
  const double v = terms.sum() / static_cast<double>(p.rows());
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// Per-bin generalized linear fit of log power under the Itakura-Saito
/// objective: ordinary least squares on ln(p) gives the starting point, then
/// `iterations` damped Newton steps per bin. Step halving keeps the objective
/// non-increasing.
inline RegressionModel is_regression_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& p,
                                         int iterations = 2, double ridge_scale = kDefaultRidgeScale) {
  require(iterations >= 0, errc::config, "is_regression_fit: iterations must be non-negative");
  require(x.rows() == p.rows(), errc::config, "is_regression_fit: X and P row counts differ");
  require((p.array() > 0.0).all(), errc::config, "is_regression_fit: powers must be positive");

  const Eigen::Index n = x.rows(), d = x.cols(), m = p.cols();
  RegressionModel model = ols_fit(x, p.array().log().matrix(), ridge_scale);
  model.objective = RegressionObjective::itakura_saito;

  Eigen::MatrixXd u(n, d + 1);  // augmented design [X 1]
  u.leftCols(d) = x;
  u.col(d).setOnes();

  auto objective = [&u](const Eigen::VectorXd& pb, const Eigen::VectorXd& theta) {
    const Eigen::ArrayXd yhat = (u * theta).array();
    const double v = (pb.array() * (-yhat).exp() + yhat).sum();
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  for (Eigen::Index b = 0; b < m; ++b) {
    Eigen::VectorXd theta(d + 1);
    theta.head(d) = model.weights.col(b);
    theta[d] = model.bias[b];
    const Eigen::VectorXd pb = p.col(b);
    double current = objective(pb, theta);

    for (int it = 0; it < iterations; ++it) {
      const Eigen::ArrayXd yhat = (u * theta).array();
      const Eigen::ArrayXd c = pb.array() * (-yhat).exp();
      const Eigen::VectorXd grad = u.transpose() * (1.0 - c).matrix();
      Eigen::MatrixXd hess = u.transpose() * (u.array().colwise() * c).matrix();
      const double lambda = ridge_scale * hess.trace() / static_cast<double>(d + 1);
      hess.diagonal().array() += lambda;
      const Eigen::VectorXd delta = hess.ldlt().solve(grad);
      require(delta.allFinite(), errc::numeric, "is_regression_fit: Newton step is non-finite");

      double scale = 1.0;
      Eigen::VectorXd candidate = theta - delta;
      double cand_obj = objective(pb, candidate);
      for (int h = 0; h < 60 && cand_obj > current; ++h) {
        scale *= 0.5;
        candidate = theta - scale * delta;
        cand_obj = objective(pb, candidate);
      }
      if (cand_obj <= current) {
        theta = candidate;
        current = cand_obj;
      }
    }
    model.weights.col(b) = theta.head(d);
    model.bias[b] = theta[d];
  }
  return model;
}

}  // namespace waveprobe
