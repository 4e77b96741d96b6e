// Band-split subspace scan: per layer, mean-center the activations, split
// every channel at 80 Hz with the Linkwitz-Riley crossover, and take the
// singular value spectrum of each band.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveprobe/activations.hpp"
#include "waveprobe/common.hpp"
#include "waveprobe/dsp/crossover.hpp"

namespace waveprobe {

inline constexpr double kSvdSplitHz = 80.0;
inline constexpr double kSvdTailRatio = 1e-2;  // 40 dB below the top singular value

struct BandSplitActivations {
  Eigen::MatrixXd baseband, wideband;  // n_samples x width each
};

/// Channel-wise crossover of one layer's mean-centered activations.
inline BandSplitActivations split_activations(const ActivationTensor& acts, int layer_id,
                                              double sample_rate,
                                              dsp::FilterMode mode = dsp::FilterMode::causal) {
  const Eigen::MatrixXd& src = acts.output(layer_id);
  const double fs = sample_rate / acts.decimation;
  BandSplitActivations out;
  out.baseband.resize(src.rows(), src.cols());
  out.wideband.resize(src.rows(), src.cols());

  std::vector<double> channel(static_cast<std::size_t>(src.rows()));
  for (Eigen::Index c = 0; c < src.cols(); ++c) {
    const double mean = src.col(c).mean();
    for (Eigen::Index t = 0; t < src.rows(); ++t) channel[static_cast<std::size_t>(t)] = src(t, c) - mean;
    dsp::CrossoverSplit bands = dsp::linkwitz_riley_split(channel, kSvdSplitHz, fs, mode);
    for (Eigen::Index t = 0; t < src.rows(); ++t) {
      out.baseband(t, c) = bands.baseband[static_cast<std::size_t>(t)];
      out.wideband(t, c) = bands.wideband[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

struct SvdBandResult {
  int layer = 0;
  std::string band;  // "baseband" or "wideband"
  Eigen::VectorXd singular_values;  // descending
  double frobenius = 0.0;
  double effective_rank = 0.0;  // exp of the entropy of the sigma^2 distribution
  int tail_length = 0;          // count of sigma_i >= sigma_1 * kSvdTailRatio
};

inline SvdBandResult svd_band_result(int layer, const std::string& band, const Eigen::MatrixXd& m) {
  SvdBandResult r;
  r.layer = layer;
  r.band = band;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  r.singular_values = svd.singularValues();
  r.frobenius = m.norm();

  const double total = r.singular_values.array().square().sum();
  if (total > 0.0) {
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
      const double p = r.singular_values[i] * r.singular_values[i] / total;
      if (p > 0.0) entropy -= p * std::log(p);
    }
    r.effective_rank = std::exp(entropy);
    const double floor = r.singular_values[0] * kSvdTailRatio;
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
      if (r.singular_values[i] >= floor) ++r.tail_length;
  }
  return r;
}

struct SvdScan {
  std::vector<SvdBandResult> bands;  // two entries per scanned layer
};

inline SvdScan svd_scan(const ActivationTensor& acts, double sample_rate,
                        dsp::FilterMode mode = dsp::FilterMode::causal) {
  require(acts.n_samples >= acts.width, errc::insufficient_data,
          "svd_scan: need at least as many samples as channels (" + std::to_string(acts.width) +
              "); provide longer evaluation audio");
  SvdScan scan;
  for (int id : acts.layer_ids) {
    const BandSplitActivations split = split_activations(acts, id, sample_rate, mode);
    scan.bands.push_back(svd_band_result(id, "baseband", split.baseband));
    scan.bands.push_back(svd_band_result(id, "wideband", split.wideband));
  }
  return scan;
}

inline nlohmann::json svd_scan_json(const SvdScan& scan) {
  nlohmann::json out = nlohmann::json::array();
  for (const SvdBandResult& r : scan.bands) {
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) sv.push_back(r.singular_values[i]);
    out.push_back(nlohmann::json{{"layer", r.layer},
                                 {"band", r.band},
                                 {"singular_values", sv},
                                 {"frobenius", r.frobenius},
                                 {"effective_rank", r.effective_rank},
                                 {"tail_length", r.tail_length}});
  }
  return out;
}

inline void write_svd_scan_csv(const std::string& path, const SvdScan& scan) {
  std::ofstream f(path);
  require(f.good(), errc::config, "svd csv: cannot open '" + path + "'");
  f << "layer,band,frobenius,effective_rank,tail_length,singular_values\n";
  f.precision(12);
  for (const SvdBandResult& r : scan.bands) {
    f << r.layer << ',' << r.band << ',' << r.frobenius << ',' << r.effective_rank << ','
      << r.tail_length << ',';
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
      if (i) f << ' ';
      f << r.singular_values[i];
    }
    f << '\n';
  }
  require(f.good(), errc::config, "svd csv: write failed");
}

}  // namespace waveprobe
