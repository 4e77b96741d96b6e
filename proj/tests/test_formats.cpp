// Binary and CSV container round-trips, plus failure modes on damaged files.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "waveprobe/activations.hpp"
#include "waveprobe/feature_track.hpp"
#include "waveprobe/model.hpp"

using namespace waveprobe;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

void truncate_file(const std::filesystem::path& path, std::uintmax_t keep) {
  std::filesystem::resize_file(path, keep);
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.layer_width = 6;
  c.skip_width = 5;
  c.n_blocks = 2;
  c.block_dilations = {1, 2, 4};
  return c;
}

}  // namespace

TEST_CASE("checkpoints round-trip weights to f32 precision") {
  Model m = make_initialized_model(tiny_config(), 42);
  const auto path = temp_file("waveprobe_ck.wnck");
  save_checkpoint(path.string(), m);
  Model back = load_checkpoint(path.string());

  CHECK(back.config.layer_width == m.config.layer_width);
  CHECK(back.config.skip_width == m.config.skip_width);
  CHECK(back.config.n_blocks == m.config.n_blocks);
  CHECK(back.config.block_dilations == m.config.block_dilations);

  auto src = tensor_views(m);
  auto dst = tensor_views(back);
  REQUIRE(src.size() == dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    CHECK(src[i].name == dst[i].name);
    REQUIRE(src[i].size == dst[i].size);
    for (std::size_t k = 0; k < src[i].size; ++k)
      CHECK(dst[i].data[k] == static_cast<double>(static_cast<float>(src[i].data[k])));
  }
  std::filesystem::remove(path);
}

TEST_CASE("saving the same model twice yields identical bytes") {
  Model m = make_initialized_model(tiny_config(), 7);
  const auto a = temp_file("waveprobe_ck_a.wnck");
  const auto b = temp_file("waveprobe_ck_b.wnck");
  save_checkpoint(a.string(), m);
  save_checkpoint(b.string(), m);
  CHECK(file_fingerprint(a) == file_fingerprint(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("damaged checkpoints fail with format errors") {
  Model m = make_initialized_model(tiny_config(), 1);
  const auto path = temp_file("waveprobe_ck_bad.wnck");
  save_checkpoint(path.string(), m);

  SECTION("truncated tensor payload") {
    truncate_file(path, std::filesystem::file_size(path) - 13);
    try {
      load_checkpoint(path.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::format);
    }
  }
  SECTION("trailing garbage") {
    std::ofstream os(path, std::ios::binary | std::ios::app);
    os.write("xx", 2);
    os.close();
    try {
      load_checkpoint(path.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::format);
    }
  }
  SECTION("wrong magic") {
    std::fstream fs(path, std::ios::binary | std::ios::in | std::ios::out);
    fs.write("WXYZ", 4);
    fs.close();
    try {
      load_checkpoint(path.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::format);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("activation dumps round-trip including preacts, tables, and decimation") {
  ActivationTensor acts;
  acts.width = 3;
  acts.n_samples = 7;
  acts.layer_ids = {0, 1, 2};
  for (int l = 0; l < 3; ++l) {
    Eigen::MatrixXd m(7, 3);
    for (Eigen::Index r = 0; r < 7; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) m(r, c) = l * 100 + r * 10 + c;
    acts.outputs.push_back(m);
  }
  for (int l = 1; l < 3; ++l) {
    Eigen::MatrixXd m(7, 6);
    for (Eigen::Index r = 0; r < 7; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) m(r, c) = -(l * 100 + r * 10 + c);
    acts.preacts.push_back(m);
  }

  const auto path = temp_file("waveprobe_acts.wnac");

  SECTION("default contiguous layout") {
    write_wnac(path.string(), acts);
    const ActivationTensor back = read_wnac(path.string());
    CHECK(back.width == 3);
    CHECK(back.n_samples == 7);
    CHECK(back.decimation == 1);
    CHECK(back.layer_ids == acts.layer_ids);
    for (std::size_t i = 0; i < 3; ++i) CHECK((back.outputs[i] - acts.outputs[i]).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.preacts.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK((back.preacts[i] - acts.preacts[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.preact(2) - acts.preacts[1]).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("restricted dumps carry a layer table and decimation factor") {
    const ActivationTensor cut = restrict_activations(acts, {0, 2}, 2);
    CHECK(cut.n_samples == 4);  // rows 0, 2, 4, 6
    CHECK(cut.decimation == 2);
    CHECK(cut.output(2)(1, 0) == acts.output(2)(2, 0));

    write_wnac(path.string(), cut);
    const ActivationTensor back = read_wnac(path.string());
    CHECK(back.layer_ids == std::vector<int>{0, 2});
    CHECK(back.decimation == 2);
    CHECK(back.n_samples == 4);
    REQUIRE(back.preacts.size() == 1);
    CHECK((back.preact(2) - cut.preact(2)).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("truncation is detected") {
    write_wnac(path.string(), acts);
    truncate_file(path, std::filesystem::file_size(path) - 5);
    try {
      read_wnac(path.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::format);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("feature tracks round-trip through wnft and csv") {
  FeatureTrack t;
  t.kind = FeatureKind::log_f0;
  t.t0 = 0.016;
  t.hop = 0.005;
  t.values.resize(5, 1);
  t.voiced = {1, 1, 0, 1, 0};
  for (int i = 0; i < 5; ++i) t.values(i, 0) = 5.0 + 0.01 * i;

  const auto bin = temp_file("waveprobe_track.wnft");
  write_track_wnft(bin, t);
  const FeatureTrack tb = read_track_wnft(bin);
  CHECK(tb.kind == t.kind);
  CHECK(tb.t0 == t.t0);
  CHECK(tb.hop == t.hop);
  REQUIRE(tb.n_frames() == 5);
  CHECK(tb.voiced == t.voiced);
  for (int i = 0; i < 5; ++i)
    CHECK(tb.values(i, 0) == static_cast<double>(static_cast<float>(t.values(i, 0))));

  const auto csv = temp_file("waveprobe_track.csv");
  write_track_csv(csv, t);
  const FeatureTrack tc = read_track_csv(csv, FeatureKind::log_f0, true);
  REQUIRE(tc.n_frames() == 5);
  CHECK(tc.t0 == Catch::Approx(t.t0));
  CHECK(tc.hop == Catch::Approx(t.hop));
  CHECK(tc.voiced == t.voiced);
  for (int i = 0; i < 5; ++i) CHECK(tc.values(i, 0) == Catch::Approx(t.values(i, 0)).epsilon(1e-10));

  // comment lines are skipped
  {
    std::ofstream os(csv, std::ios::app);
    os << "# trailing comment\n";
  }
  CHECK(read_track_csv(csv, FeatureKind::log_f0, true).n_frames() == 5);

  std::filesystem::remove(bin);
  std::filesystem::remove(csv);
}

TEST_CASE("multi-column tracks keep their layout in csv form") {
  FeatureTrack t;
  t.kind = FeatureKind::band_energy_db;
  t.t0 = 0.016;
  t.hop = 0.005;
  t.values.resize(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 4; ++d) t.values(i, d) = -10.0 * i - d;

  const auto csv = temp_file("waveprobe_band.csv");
  write_track_csv(csv, t);
  const FeatureTrack back = read_track_csv(csv, FeatureKind::band_energy_db, false);
  REQUIRE(back.n_frames() == 3);
  REQUIRE(back.dim() == 4);
  CHECK((back.values - t.values).cwiseAbs().maxCoeff() < 1e-9);
  std::filesystem::remove(csv);
}
