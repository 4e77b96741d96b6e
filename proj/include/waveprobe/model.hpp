// Model definition: configuration, weight storage, initialization, and the
// WNCK checkpoint format.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"

namespace waveprobe {

inline constexpr int kPostHiddenWidth = 128;

struct ModelConfig {
  int layer_width = 64;
  int skip_width = 64;
  int n_blocks = 5;
  std::vector<int> block_dilations = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  int conv_extra_taps = 1;  // taps beyond the current sample; kernel touches t, t-k, .., t-conv_extra_taps*k
  int quantization_levels = kQuantizationLevels;

  int n_layers() const { return n_blocks * static_cast<int>(block_dilations.size()); }

  /// Dilation of gated layer l, 1-based; the schedule repeats per block.
  int dilation(int layer) const {
    return block_dilations[static_cast<std::size_t>(layer - 1) % block_dilations.size()];
  }

  void validate() const {
    require(layer_width >= 1, errc::config, "model: layer_width must be positive");
    require(skip_width >= 1, errc::config, "model: skip_width must be positive");
    require(n_blocks >= 1, errc::config, "model: n_blocks must be positive");
    require(!block_dilations.empty(), errc::config, "model: block_dilations must not be empty");
    for (int d : block_dilations) require(d >= 1, errc::config, "model: dilations must be positive");
    require(conv_extra_taps >= 1, errc::config, "model: conv_extra_taps must be positive");
    require(quantization_levels >= 2, errc::config, "model: quantization_levels must be at least 2");
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"layer_width", c.layer_width},
                     {"skip_width", c.skip_width},
                     {"n_blocks", c.n_blocks},
                     {"block_dilations", c.block_dilations},
                     {"conv_extra_taps", c.conv_extra_taps},
                     {"quantization_levels", c.quantization_levels}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  j.at("layer_width").get_to(c.layer_width);
  j.at("skip_width").get_to(c.skip_width);
  j.at("n_blocks").get_to(c.n_blocks);
  j.at("block_dilations").get_to(c.block_dilations);
  j.at("conv_extra_taps").get_to(c.conv_extra_taps);
  j.at("quantization_levels").get_to(c.quantization_levels);
}

/// Number of past samples (including the current one) that influence one
/// output step: 1 + n_blocks * sum_k(conv_extra_taps * k).
inline std::int64_t receptive_field(const ModelConfig& c) {
  std::int64_t span = 0;
  for (int d : c.block_dilations) span += static_cast<std::int64_t>(c.conv_extra_taps) * d;
  return 1 + static_cast<std::int64_t>(c.n_blocks) * span;
}

struct GatedLayerWeights {
  std::vector<Eigen::MatrixXd> w_filter;  // one width x width matrix per tap; tap 0 sits on the current sample
  std::vector<Eigen::MatrixXd> w_gate;
  Eigen::MatrixXd w_res;   // width x width
  Eigen::MatrixXd w_skip;  // width x skip_width
};

struct Model {
  ModelConfig config;
  Eigen::MatrixXd embedding;  // quantization_levels x width
  std::vector<GatedLayerWeights> layers;
  Eigen::MatrixXd post1;  // skip_width x kPostHiddenWidth
  Eigen::VectorXd post1_bias;
  Eigen::MatrixXd post2;  // kPostHiddenWidth x quantization_levels
  Eigen::VectorXd post2_bias;
};

struct TensorView {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
  Eigen::Index rows = 0, cols = 0;
};

/// All tensors in declaration order. The order defines the checkpoint layout
/// and pairs parameters with optimizer state, so it must stay stable.
inline std::vector<TensorView> tensor_views(Model& m) {
  std::vector<TensorView> v;
  auto add = [&v](const std::string& name, Eigen::MatrixXd& t) {
    v.push_back({name, t.data(), static_cast<std::size_t>(t.size()), t.rows(), t.cols()});
  };
  auto add_vec = [&v](const std::string& name, Eigen::VectorXd& t) {
    v.push_back({name, t.data(), static_cast<std::size_t>(t.size()), t.rows(), 1});
  };
  add("embedding", m.embedding);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const std::string p = "layer" + std::to_string(l + 1) + ".";
    for (std::size_t n = 0; n < m.layers[l].w_filter.size(); ++n)
      add(p + "w_filter.tap" + std::to_string(n), m.layers[l].w_filter[n]);
    for (std::size_t n = 0; n < m.layers[l].w_gate.size(); ++n)
      add(p + "w_gate.tap" + std::to_string(n), m.layers[l].w_gate[n]);
    add(p + "w_res", m.layers[l].w_res);
    add(p + "w_skip", m.layers[l].w_skip);
  }
  add("post1.weight", m.post1);
  add_vec("post1.bias", m.post1_bias);
  add("post2.weight", m.post2);
  add_vec("post2.bias", m.post2_bias);
  return v;
}

inline Model make_zero_model(const ModelConfig& c) {
  c.validate();
  Model m;
  m.config = c;
  m.embedding = Eigen::MatrixXd::Zero(c.quantization_levels, c.layer_width);
  m.layers.resize(static_cast<std::size_t>(c.n_layers()));
  for (auto& l : m.layers) {
    l.w_filter.assign(static_cast<std::size_t>(c.conv_extra_taps) + 1,
                      Eigen::MatrixXd::Zero(c.layer_width, c.layer_width));
    l.w_gate = l.w_filter;
    l.w_res = Eigen::MatrixXd::Zero(c.layer_width, c.layer_width);
    l.w_skip = Eigen::MatrixXd::Zero(c.layer_width, c.skip_width);
  }
  m.post1 = Eigen::MatrixXd::Zero(c.skip_width, kPostHiddenWidth);
  m.post1_bias = Eigen::VectorXd::Zero(kPostHiddenWidth);
  m.post2 = Eigen::MatrixXd::Zero(kPostHiddenWidth, c.quantization_levels);
  m.post2_bias = Eigen::VectorXd::Zero(c.quantization_levels);
  return m;
}

namespace detail {

inline void fill_uniform(Eigen::MatrixXd& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = u(rng);
}

}  // namespace detail

/// Uniform fan-in init for the convolutions and projections. The embedding
/// gets its first column set to the decoded quantization levels so the input
/// waveform starts out linearly recoverable from layer 0; the remaining
/// columns are small random values.
inline Model make_initialized_model(const ModelConfig& c, std::uint64_t seed) {
  Model m = make_zero_model(c);
  std::mt19937_64 rng(seed);

  detail::fill_uniform(m.embedding, 0.1, rng);
  if (c.quantization_levels == kQuantizationLevels) {
    for (int q = 0; q < c.quantization_levels; ++q)
      m.embedding(q, 0) = mu_law_level(static_cast<std::uint8_t>(q));
  }

  const double conv_bound = std::sqrt(3.0 / (static_cast<double>(c.conv_extra_taps + 1) * c.layer_width));
  const double mix_bound = std::sqrt(3.0 / c.layer_width);
  for (auto& l : m.layers) {
    for (auto& t : l.w_filter) detail::fill_uniform(t, conv_bound, rng);
    for (auto& t : l.w_gate) detail::fill_uniform(t, conv_bound, rng);
    detail::fill_uniform(l.w_res, mix_bound, rng);
    detail::fill_uniform(l.w_skip, mix_bound, rng);
  }
  detail::fill_uniform(m.post1, std::sqrt(3.0 / c.skip_width), rng);
  detail::fill_uniform(m.post2, std::sqrt(3.0 / kPostHiddenWidth), rng);
  return m;
}

// WNCK checkpoint: magic, version u32, config JSON (u32 byte length + text),
// then every tensor as f32 in declaration order, row-major within a tensor.
inline constexpr char kCheckpointMagic[] = "WNCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, Model& m) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), errc::config, "save_checkpoint: cannot open '" + path + "'");
  write_magic(f, kCheckpointMagic);
  write_u32(f, kCheckpointVersion);
  const std::string cfg = nlohmann::json(m.config).dump();
  write_u32(f, static_cast<std::uint32_t>(cfg.size()));
  f.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  for (const TensorView& t : tensor_views(m)) {
    for (Eigen::Index r = 0; r < t.rows; ++r)
      for (Eigen::Index c = 0; c < t.cols; ++c)
        write_f32(f, static_cast<float>(t.data[static_cast<std::size_t>(c * t.rows + r)]));
  }
  require(f.good(), errc::config, "save_checkpoint: write failed for '" + path + "'");
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), errc::config, "load_checkpoint: cannot open '" + path + "'");
  expect_magic(f, kCheckpointMagic, "checkpoint");
  const std::uint32_t version = read_u32(f);
  require(version == kCheckpointVersion, errc::format,
          "checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t cfg_len = read_u32(f);
  std::string cfg(cfg_len, '\0');
  f.read(cfg.data(), cfg_len);
  require(f.good(), errc::format, "checkpoint: truncated config");

  ModelConfig config;
  try {
    config = nlohmann::json::parse(cfg).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::format, std::string("checkpoint: bad config json: ") + e.what());
  }

  Model m = make_zero_model(config);
  for (const TensorView& t : tensor_views(m)) {
    for (Eigen::Index r = 0; r < t.rows; ++r)
      for (Eigen::Index c = 0; c < t.cols; ++c)
        t.data[static_cast<std::size_t>(c * t.rows + r)] = read_f32(f);
  }
  f.peek();
  require(f.eof(), errc::format, "checkpoint: trailing bytes after weights");
  return m;
}

}  // namespace waveprobe
