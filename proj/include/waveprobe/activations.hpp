// Activation capture: in-memory tensor plus the WNAC dump format.
//
// In memory each layer is a time-major matrix (n_samples x width). On disk
// blocks are channel-major with time fastest, one block per layer in
// ascending layer order; pre-activation blocks follow the outputs when
// present. Layer 0 is the embedding output, layers 1..L the gated outputs.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe {

struct ActivationTensor {
  int width = 0;
  std::int64_t n_samples = 0;
  int decimation = 1;          // row r holds sample r * decimation
  std::vector<int> layer_ids;  // ascending
  std::vector<Eigen::MatrixXd> outputs;  // parallel to layer_ids, each n_samples x width
  // Pre-activations for the gated layers among layer_ids, in order, each
  // n_samples x 2*width with filter channels first, then gate channels.
  std::vector<Eigen::MatrixXd> preacts;

  std::size_t n_layers() const { return layer_ids.size(); }
  bool has_preacts() const { return !preacts.empty(); }

  int index_of(int layer_id) const {
    const auto it = std::find(layer_ids.begin(), layer_ids.end(), layer_id);
    require(it != layer_ids.end(), errc::config,
            "activations: layer " + std::to_string(layer_id) + " not captured");
    return static_cast<int>(it - layer_ids.begin());
  }

  const Eigen::MatrixXd& output(int layer_id) const {
    return outputs[static_cast<std::size_t>(index_of(layer_id))];
  }

  const Eigen::MatrixXd& preact(int layer_id) const {
    require(layer_id >= 1, errc::config, "activations: layer 0 has no pre-activations");
    require(has_preacts(), errc::config, "activations: pre-activations were not captured");
    std::size_t k = 0;
    for (int id : layer_ids) {
      if (id == layer_id) return preacts[k];
      if (id >= 1) ++k;
    }
    fail(errc::config, "activations: layer " + std::to_string(layer_id) + " not captured");
  }
};

namespace detail {

constexpr std::uint32_t kActFlagPreacts = 1u << 0;
constexpr std::uint32_t kActFlagLayerTable = 1u << 1;
constexpr std::uint32_t kActFlagDecimated = 1u << 2;

inline void write_block(std::ofstream& f, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index t = 0; t < m.rows(); ++t) write_f32(f, static_cast<float>(m(t, c)));
}

inline void read_block(std::ifstream& f, Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index t = 0; t < m.rows(); ++t) m(t, c) = read_f32(f);
}

}  // namespace detail

inline constexpr char kActivationMagic[] = "WNAC";
inline constexpr std::uint32_t kActivationVersion = 1;

inline void write_wnac(const std::string& path, const ActivationTensor& acts) {
  require(acts.layer_ids.size() == acts.outputs.size(), errc::config, "wnac: layer/output count mismatch");
  std::ofstream f(path, std::ios::binary);
  require(f.good(), errc::config, "wnac: cannot open '" + path + "'");

  bool contiguous_from_zero = true;
  for (std::size_t i = 0; i < acts.layer_ids.size(); ++i)
    contiguous_from_zero = contiguous_from_zero && acts.layer_ids[i] == static_cast<int>(i);

  std::uint32_t flags = 0;
  if (acts.has_preacts()) flags |= detail::kActFlagPreacts;
  if (!contiguous_from_zero) flags |= detail::kActFlagLayerTable;
  if (acts.decimation != 1) flags |= detail::kActFlagDecimated;

  write_magic(f, kActivationMagic);
  write_u32(f, kActivationVersion);
  write_u32(f, static_cast<std::uint32_t>(acts.layer_ids.size()));
  write_u32(f, static_cast<std::uint32_t>(acts.width));
  write_u64(f, static_cast<std::uint64_t>(acts.n_samples));
  write_u32(f, flags);
  if (flags & detail::kActFlagLayerTable)
    for (int id : acts.layer_ids) write_u32(f, static_cast<std::uint32_t>(id));
  if (flags & detail::kActFlagDecimated) write_u32(f, static_cast<std::uint32_t>(acts.decimation));

  for (const auto& m : acts.outputs) detail::write_block(f, m);
  for (const auto& m : acts.preacts) detail::write_block(f, m);
  require(f.good(), errc::config, "wnac: write failed for '" + path + "'");
}

inline ActivationTensor read_wnac(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), errc::config, "wnac: cannot open '" + path + "'");
  expect_magic(f, kActivationMagic, "activation dump");
  const std::uint32_t version = read_u32(f);
  require(version == kActivationVersion, errc::format,
          "activation dump: unsupported version " + std::to_string(version));

  ActivationTensor acts;
  const std::uint32_t n_layers = read_u32(f);
  acts.width = static_cast<int>(read_u32(f));
  acts.n_samples = static_cast<std::int64_t>(read_u64(f));
  const std::uint32_t flags = read_u32(f);

  acts.layer_ids.resize(n_layers);
  if (flags & detail::kActFlagLayerTable) {
    for (auto& id : acts.layer_ids) id = static_cast<int>(read_u32(f));
  } else {
    for (std::uint32_t i = 0; i < n_layers; ++i) acts.layer_ids[i] = static_cast<int>(i);
  }
  acts.decimation = (flags & detail::kActFlagDecimated) ? static_cast<int>(read_u32(f)) : 1;

  acts.outputs.assign(n_layers, Eigen::MatrixXd(acts.n_samples, acts.width));
  for (auto& m : acts.outputs) detail::read_block(f, m);
  if (flags & detail::kActFlagPreacts) {
    for (int id : acts.layer_ids)
      if (id >= 1) acts.preacts.emplace_back(acts.n_samples, 2 * acts.width);
    for (auto& m : acts.preacts) detail::read_block(f, m);
  }
  f.peek();
  require(f.eof(), errc::format, "activation dump: trailing bytes");
  return acts;
}

/// Restriction to a layer subset and/or a time decimation factor. Layer ids
/// must exist; decimation keeps rows 0, d, 2d, ...
inline ActivationTensor restrict_activations(const ActivationTensor& acts, std::vector<int> layers,
                                             int decimate = 1) {
  require(decimate >= 1, errc::config, "restrict_activations: decimation must be positive");
  if (layers.empty()) layers = acts.layer_ids;
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());

  ActivationTensor out;
  out.width = acts.width;
  out.decimation = acts.decimation * decimate;
  out.n_samples = (acts.n_samples + decimate - 1) / decimate;
  out.layer_ids = layers;
  for (int id : layers) {
    const Eigen::MatrixXd& src = acts.output(id);
    Eigen::MatrixXd dst(out.n_samples, acts.width);
    for (std::int64_t r = 0; r < out.n_samples; ++r) dst.row(r) = src.row(r * decimate);
    out.outputs.push_back(std::move(dst));
  }
  if (acts.has_preacts()) {
    for (int id : layers) {
      if (id < 1) continue;
      const Eigen::MatrixXd& src = acts.preact(id);
      Eigen::MatrixXd dst(out.n_samples, 2 * acts.width);
      for (std::int64_t r = 0; r < out.n_samples; ++r) dst.row(r) = src.row(r * decimate);
      out.preacts.push_back(std::move(dst));
    }
  }
  return out;
}

}  // namespace waveprobe
