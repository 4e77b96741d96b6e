// Metrics, regressions, frame alignment, and the probe batteries on
// synthetic activations where the right answer is known.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "waveprobe/corpus.hpp"
#include "waveprobe/probes/metrics.hpp"
#include "waveprobe/probes/probe.hpp"
#include "waveprobe/probes/regression.hpp"
#include "waveprobe/wavenet.hpp"

using namespace waveprobe;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("average ranks split ties evenly") {
  const auto r = average_ranks(vec({10, 20, 20, 30}));
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("spearman handles monotone, reversed, tied, and constant input") {
  CHECK(*spearman_rho(vec({1, 2, 3}), vec({2, 4, 6})) == Catch::Approx(1.0));
  CHECK(*spearman_rho(vec({1, 2, 3}), vec({6, 4, 2})) == Catch::Approx(-1.0));

  const auto tied = spearman_rho(vec({1, 2, 2, 3}), vec({1, 2, 3, 4}));
  const auto oracle = oracles::spearman_by_counting(vec({1, 2, 2, 3}), vec({1, 2, 3, 4}));
  REQUIRE(tied.has_value());
  REQUIRE(oracle.has_value());
  CHECK(*tied == Catch::Approx(*oracle).epsilon(1e-14));

  CHECK_FALSE(spearman_rho(vec({5, 5, 5}), vec({1, 2, 3})).has_value());
  CHECK_THROWS_AS(spearman_rho(vec({1, 2}), vec({1, 2})), Error);
  CHECK_THROWS_AS(spearman_rho(vec({1, 2, 3}), vec({1, 2})), Error);
}

TEST_CASE("spearman matches the counting oracle on enumerated small sequences") {
  for (std::size_t n = 3; n <= 5; ++n) {
    std::vector<double> a(n), b(n);
    const std::size_t total = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(n)));
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = static_cast<double>(c % 3 + 1);
        b[i] = static_cast<double>(i);  // strictly increasing partner
        c /= 3;
      }
      const auto got = spearman_rho(a, b);
      const auto want = oracles::spearman_by_counting(a, b);
      REQUIRE(got.has_value() == want.has_value());
      if (got) CHECK(*got == Catch::Approx(*want).margin(1e-12));

      std::vector<double> rev(a.rbegin(), a.rend());
      const auto got2 = spearman_rho(a, rev);
      const auto want2 = oracles::spearman_by_counting(a, rev);
      REQUIRE(got2.has_value() == want2.has_value());
      if (got2) CHECK(*got2 == Catch::Approx(*want2).margin(1e-12));
    }
  }
}

TEST_CASE("spearman is invariant under increasing transforms and paired shuffles") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = g(rng);
    b[i] = 0.5 * a[i] + g(rng);
  }
  const double base = *spearman_rho(a, b);

  std::vector<double> ea(a), cb(b), af(a);
  for (auto& v : ea) v = std::exp(v);
  for (auto& v : cb) v = v * v * v;
  for (auto& v : af) v = 3.0 * v + 7.0;
  CHECK(*spearman_rho(ea, b) == Catch::Approx(base).margin(1e-12));
  CHECK(*spearman_rho(a, cb) == Catch::Approx(base).margin(1e-12));
  CHECK(*spearman_rho(af, b) == Catch::Approx(base).margin(1e-12));

  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> pa(a.size()), pb(b.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pa[i] = a[order[i]];
    pb[i] = b[order[i]];
  }
  CHECK(*spearman_rho(pa, pb) == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("snr has the documented fixed points and scaling law") {
  const std::vector<double> ref{0.5, -0.25, 0.75, -1.0};
  const std::vector<double> zeros(4, 0.0);
  CHECK(snr_db(ref, ref) == 120.0);
  CHECK(snr_db(ref, zeros) == Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(snr_db(zeros, ref), Error);

  for (double eps : {1e-1, 1e-2, 1e-3}) {
    std::vector<double> est(ref);
    for (auto& v : est) v *= 1.0 + eps;
    CHECK(snr_db(ref, est) == Catch::Approx(-20.0 * std::log10(eps)).margin(0.01));
  }
}

TEST_CASE("ols recovers exact linear maps and intercept-only targets") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(200, 4);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = g(rng);
  Eigen::MatrixXd w_true(4, 2);
  w_true << 1.0, -2.0, 0.5, 3.0, -1.5, 0.25, 2.0, -0.75;
  Eigen::RowVector2d b_true(0.3, -0.8);
  const Eigen::MatrixXd y = (x * w_true).rowwise() + b_true;

  const RegressionModel m = ols_fit(x, y, 0.0);
  CHECK((m.weights - w_true).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((m.bias.transpose() - b_true).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd pred = m.predict(x);
  std::vector<double> ref(y.col(0).data(), y.col(0).data() + y.rows());
  std::vector<double> est(pred.col(0).data(), pred.col(0).data() + pred.rows());
  CHECK(snr_db(ref, est) >= 100.0);

  const Eigen::MatrixXd yc = Eigen::MatrixXd::Constant(200, 1, 4.25);
  const RegressionModel mc = ols_fit(x, yc);
  CHECK(mc.weights.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(mc.bias[0] == Catch::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("ols agrees with the normal-equations oracle on random systems") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(50, 5);
    Eigen::MatrixXd y(50, 2);
    for (Eigen::Index r = 0; r < 50; ++r) {
      for (Eigen::Index c = 0; c < 5; ++c) x(r, c) = g(rng);
      for (Eigen::Index c = 0; c < 2; ++c) y(r, c) = g(rng);
    }
    const RegressionModel m = ols_fit(x, y, 0.0);  // exact solve against the exact oracle
    const auto [w_ref, b_ref] = oracles::ols_by_normal_equations(x, y);
    CHECK((m.weights - w_ref).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((m.bias - b_ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ols flags rank deficiency and starved fits") {
  Eigen::MatrixXd x(50, 3);
  x.setRandom();
  x.col(2) = x.col(0);  // exact collinearity
  Eigen::MatrixXd y = x.col(0);
  try {
    ols_fit(x, y, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::numeric);
  }
  CHECK_NOTHROW(ols_fit(x, y));  // ridge shoulders the deficiency

  Eigen::MatrixXd tall(3, 5);
  tall.setRandom();
  try {
    ols_fit(tall, Eigen::MatrixXd::Ones(3, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::insufficient_data);
  }
}

TEST_CASE("stacking inputs never hurts the exact train fit") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(300, 6);
  Eigen::MatrixXd y(300, 1);
  for (Eigen::Index r = 0; r < 300; ++r) {
    for (Eigen::Index c = 0; c < 6; ++c) x(r, c) = g(rng);
    y(r, 0) = g(rng);
  }
  auto train_snr = [&](const Eigen::MatrixXd& xin) {
    const RegressionModel m = ols_fit(xin, y, 0.0);
    const Eigen::MatrixXd pred = m.predict(xin);
    std::vector<double> ref(y.data(), y.data() + y.rows());
    std::vector<double> est(pred.data(), pred.data() + pred.rows());
    return snr_db(ref, est);
  };
  double prev = -1e9;
  for (Eigen::Index d = 2; d <= 6; d += 2) {
    const double s = train_snr(x.leftCols(d));
    CHECK(s >= prev - 1e-9);
    prev = s;
  }
}

TEST_CASE("itakura-saito distance has the textbook value and zero point") {
  CHECK(itakura_saito_distance(2.0, 1.0) == Catch::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-14));
  CHECK(itakura_saito_distance(2.0, 1.0) == Catch::Approx(0.3069).margin(5e-5));
  CHECK(itakura_saito_distance(3.7, 3.7) == 0.0);
  CHECK_THROWS_AS(itakura_saito_distance(0.0, 1.0), Error);
}

TEST_CASE("is regression nails realizable exp-linear targets in two iterations") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(120, 3);
  for (Eigen::Index r = 0; r < 120; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = 0.5 * g(rng);
  Eigen::Vector3d w_true(0.8, -0.4, 0.2);
  const Eigen::MatrixXd p = ((x * w_true).array() + 0.5).exp().matrix();

  const RegressionModel m = is_regression_fit(x, p, 2);
  CHECK(mean_is_distance(p, m.predict(x)) < 1e-6);
}

TEST_CASE("two newton steps land within 1% of a fully converged fit") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(200, 4);
    for (Eigen::Index r = 0; r < 200; ++r)
      for (Eigen::Index c = 0; c < 4; ++c) x(r, c) = 0.5 * g(rng);
    Eigen::VectorXd w(4);
    for (int i = 0; i < 4; ++i) w[i] = 0.4 * g(rng);
    Eigen::MatrixXd p(200, 1);
    for (Eigen::Index r = 0; r < 200; ++r)
      p(r, 0) = std::exp(x.row(r).dot(w) + 0.6 + 0.3 * g(rng));

    const RegressionModel two = is_regression_fit(x, p, 2);
    const RegressionModel range = is_regression_fit(x, p, 20);
    const double l2 = is_objective(p, two.predict(x));
    const double l20 = is_objective(p, range.predict(x));
    CHECK(l2 <= l20 * 1.01 + 1e-12);
    CHECK(l20 <= l2 + 1e-9);  // more iterations never end higher
  }
}

namespace {

ActivationTensor flat_acts(int width, std::int64_t n_samples, unsigned seed, int n_layers = 1) {
  ActivationTensor acts;
  acts.width = width;
  acts.n_samples = n_samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int l = 0; l < n_layers; ++l) {
    acts.layer_ids.push_back(l);
    Eigen::MatrixXd m(n_samples, width);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = g(rng);
    acts.outputs.push_back(std::move(m));
  }
  return acts;
}

FeatureTrack walk_track(std::size_t n_frames, double t0, double hop, unsigned seed) {
  FeatureTrack t;
  t.kind = FeatureKind::log_f0;
  t.t0 = t0;
  t.hop = hop;
  t.values.resize(static_cast<Eigen::Index>(n_frames), 1);
  t.voiced.assign(n_frames, 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double v = 5.0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    v += 0.05 * g(rng);
    t.values(static_cast<Eigen::Index>(f), 0) = v;
  }
  return t;
}

}  // namespace

TEST_CASE("frame alignment hits exact samples and drops out-of-range frames") {
  ActivationTensor acts = flat_acts(2, 200, 19);
  FeatureTrack t;
  t.kind = FeatureKind::log_f0;
  t.t0 = 100.0 / 16000.0;  // frame 0 sits exactly on sample 100
  t.hop = 50.0 / 16000.0;
  t.values.resize(4, 1);
  t.values << 1.0, 2.0, 3.0, 4.0;  // frames at samples 100, 150, 200(out), 250(out)
  t.voiced = {1, 1, 1, 1};

  const AlignedFrames a = frame_align(acts, {0}, t, 16000.0, true);
  REQUIRE(a.x.rows() == 2);
  CHECK(a.dropped == 2);
  CHECK((a.x.row(0).array() == acts.outputs[0].row(100).array()).all());
  CHECK((a.x.row(1).array() == acts.outputs[0].row(150).array()).all());
  CHECK(a.rows == std::vector<Eigen::Index>{0, 1});

  FeatureTrack empty;
  empty.kind = FeatureKind::log_f0;
  empty.values.resize(0, 1);
  CHECK(frame_align(acts, {0}, empty, 16000.0, true).x.rows() == 0);

  t.voiced = {1, 0, 1, 1};  // unvoiced frames are skipped, not dropped
  const AlignedFrames v = frame_align(acts, {0}, t, 16000.0, true);
  CHECK(v.x.rows() == 1);
  CHECK(v.dropped == 2);
}

TEST_CASE("frame alignment honors decimated dumps") {
  ActivationTensor acts = flat_acts(2, 50, 23);
  acts.decimation = 4;  // row r holds sample 4r
  FeatureTrack t;
  t.kind = FeatureKind::log_f0;
  t.t0 = 100.0 / 16000.0;
  t.hop = 10.0 / 16000.0;
  t.values.resize(2, 1);
  t.values << 1.0, 2.0;
  t.voiced = {1, 1};
  const AlignedFrames a = frame_align(acts, {0}, t, 16000.0, true);
  REQUIRE(a.x.rows() == 2);
  CHECK((a.x.row(0).array() == acts.outputs[0].row(25).array()).all());  // sample 100 -> row 25
  CHECK((a.x.row(1).array() == acts.outputs[0].row(28).array()).all());  // sample 110 -> round(27.5) = 28
}

TEST_CASE("a chirp-tagged channel is recovered at frame rate") {
  ActivationTensor acts = flat_acts(3, 4000, 29);
  std::vector<double> chirp(4000);
  for (std::size_t i = 0; i < chirp.size(); ++i) {
    const double tt = static_cast<double>(i) / 16000.0;
    chirp[i] = std::sin(2.0 * std::numbers::pi * (50.0 + 400.0 * tt) * tt);
  }
  for (Eigen::Index r = 0; r < 4000; ++r) acts.outputs[0](r, 1) = chirp[static_cast<std::size_t>(r)];

  FeatureTrack t;
  t.kind = FeatureKind::band_energy_db;
  t.t0 = 0.016;
  t.hop = 0.005;
  t.values.resize(40, 1);
  t.values.setZero();
  const AlignedFrames a = frame_align(acts, {0}, t, 16000.0, false);
  REQUIRE(a.x.rows() == 40);
  for (Eigen::Index f = 0; f < 40; ++f) {
    const auto sample = static_cast<std::size_t>(std::llround((0.016 + 0.005 * static_cast<double>(f)) * 16000.0));
    CHECK(a.x(f, 1) == chirp[sample]);
  }
}

TEST_CASE("feature probe recovers an injected target channel exactly") {
  constexpr std::size_t kUtts = 6, kFrames = 30;
  std::vector<ProbeUtterance> utts(kUtts);
  for (std::size_t i = 0; i < kUtts; ++i) {
    utts[i].acts = flat_acts(5, (kFrames - 1) * 80 + 1, 100 + static_cast<unsigned>(i));
    FeatureTrack t = walk_track(kFrames, 0.0, 80.0 / 16000.0, 200 + static_cast<unsigned>(i));
    for (std::size_t f = 0; f < kFrames; ++f)
      utts[i].acts.outputs[0](static_cast<Eigen::Index>(f * 80), 2) = t.values(static_cast<Eigen::Index>(f), 0);
    utts[i].target = std::move(t);
  }
  UtteranceLoader load = [&](std::size_t i) -> const ProbeUtterance& { return utts[i]; };

  ProbeOptions opt;
  opt.ridge_scale = 0.0;  // exact solve so recovery is exact
  const ProbeResult res = probe_feature(load, kUtts, {0}, 16000.0, opt);
  CHECK(res.target == "log_f0");
  CHECK(res.metric == "spearman_rho");
  REQUIRE(res.test_metric.has_value());
  CHECK(*res.test_metric == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(res.train_metric.has_value());
  CHECK(*res.train_metric == Catch::Approx(1.0).margin(1e-9));
  CHECK(res.n_train + res.n_test == static_cast<std::int64_t>(kUtts * kFrames));

  const nlohmann::json j = probe_result_json(res);
  CHECK(j.at("target") == "log_f0");
  CHECK(j.at("test_metric").get<double>() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("feature probe refuses starved training sets with a diagnostic") {
  std::vector<ProbeUtterance> utts(2);
  for (std::size_t i = 0; i < 2; ++i) {
    utts[i].acts = flat_acts(4, 400, 300 + static_cast<unsigned>(i));
    utts[i].target = walk_track(5, 0.0, 80.0 / 16000.0, 400 + static_cast<unsigned>(i));
  }
  UtteranceLoader load = [&](std::size_t i) -> const ProbeUtterance& { return utts[i]; };
  try {
    probe_feature(load, 2, {0}, 16000.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::insufficient_data);
    CHECK(std::string(e.what()).find("at least") != std::string::npos);
  }
}

TEST_CASE("waveform probes reconstruct the input from the embedding layer") {
  ModelConfig c;
  c.layer_width = 8;
  c.skip_width = 8;
  c.n_blocks = 1;
  c.block_dilations = {1, 2};
  Model model = make_initialized_model(c, 31);

  CorpusSpec spec;
  spec.n_utterances = 6;
  spec.duration_s = 0.35;
  spec.seed = 9;
  std::vector<ProbeUtterance> utts(spec.n_utterances);
  for (int i = 0; i < spec.n_utterances; ++i) {
    SynthUtterance u = synth_utterance(spec, i);
    const QuantizedSignal q = mu_law_encode(u.audio);
    ForwardResult fwd = forward_teacher_forced(model, q, CaptureMode::outputs);
    utts[static_cast<std::size_t>(i)].acts = std::move(fwd.activations);
    utts[static_cast<std::size_t>(i)].audio = std::move(u.audio);
  }
  UtteranceLoader load = [&](std::size_t i) -> const ProbeUtterance& { return utts[i]; };

  const ProbeResult res =
      probe_waveform(load, utts.size(), {0}, model, WaveformTarget::current_sample);
  CHECK(res.target == "waveform_current");
  CHECK(res.metric == "snr_db");
  REQUIRE(res.test_metric.has_value());
  REQUIRE(res.references.count("quantization_snr_db") == 1);
  REQUIRE(res.references.count("model_next_sample_snr_db") == 1);
  REQUIRE(res.references.count("lpc512_next_sample_snr_db") == 1);
  CHECK(*res.test_metric >= res.references.at("quantization_snr_db") - 1.0);

  // stacking layers can only help the train fit
  ProbeOptions noref;
  noref.compute_references = false;
  const ProbeResult single =
      probe_waveform(load, utts.size(), {1}, model, WaveformTarget::next_sample, noref);
  const ProbeResult stacked =
      probe_waveform(load, utts.size(), {0, 1, 2}, model, WaveformTarget::next_sample, noref);
  REQUIRE(single.train_metric.has_value());
  REQUIRE(stacked.train_metric.has_value());
  CHECK(*stacked.train_metric >= *single.train_metric - 0.01);
}

TEST_CASE("waveform probes reject utterances shorter than the warmup") {
  ModelConfig c;
  c.layer_width = 4;
  c.skip_width = 4;
  c.n_blocks = 4;
  c.block_dilations = {512};  // receptive field 2049
  Model model = make_initialized_model(c, 37);

  std::vector<ProbeUtterance> utts(1);
  utts[0].audio.sample_rate = 16000.0;
  utts[0].audio.samples.assign(1000, 0.1);
  utts[0].acts = flat_acts(4, 1000, 41);
  UtteranceLoader load = [&](std::size_t i) -> const ProbeUtterance& { return utts[i]; };
  try {
    probe_waveform(load, 1, {0}, model, WaveformTarget::next_sample);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::insufficient_data);
  }
}

TEST_CASE("preactivation scan pinpoints a log-f0 unit and reports degenerate layers") {
  constexpr std::size_t kUtts = 2, kFrames = 30;
  std::vector<ProbeUtterance> utts(kUtts);
  for (std::size_t i = 0; i < kUtts; ++i) {
    ActivationTensor acts = flat_acts(4, (kFrames - 1) * 80 + 1, 500 + static_cast<unsigned>(i), 3);
    FeatureTrack t = walk_track(kFrames, 0.0, 80.0 / 16000.0, 600 + static_cast<unsigned>(i));

    // Unit 5 is piecewise constant over each frame's tile, so its tile RMS
    // equals log f0 exactly and the scan must report rho == 1.
    Eigen::MatrixXd pre1 = Eigen::MatrixXd::Constant(acts.n_samples, 8, 3.3);
    for (std::size_t f = 0; f < kFrames; ++f) {
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(f * 80) - 40);
      const auto hi = std::min<Eigen::Index>(acts.n_samples, static_cast<Eigen::Index>(f * 80) + 40);
      pre1.col(5).segment(lo, hi - lo).setConstant(t.values(static_cast<Eigen::Index>(f), 0));
    }
    Eigen::MatrixXd pre2 = Eigen::MatrixXd::Constant(acts.n_samples, 8, -1.0);
    acts.preacts = {std::move(pre1), std::move(pre2)};

    utts[i].acts = std::move(acts);
    utts[i].target = std::move(t);
  }
  UtteranceLoader load = [&](std::size_t i) -> const ProbeUtterance& { return utts[i]; };

  const auto stats = preactivation_f0_correlation(load, kUtts, 16000.0);
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].layer == 1);
  REQUIRE(stats[0].max_abs_rho.has_value());
  CHECK(*stats[0].max_abs_rho == Catch::Approx(1.0).margin(1e-12));
  CHECK(stats[0].best_unit == 5);
  CHECK(stats[0].constant_units == 7);

  CHECK(stats[1].layer == 2);
  CHECK_FALSE(stats[1].max_abs_rho.has_value());  // undefined: every unit constant
  CHECK(stats[1].constant_units == 8);
}

TEST_CASE("theoretical layer limit matches the brute-force dependency depth") {
  const ModelConfig table1;
  CHECK(theoretical_layer_limit(1, table1) == 0);
  CHECK(theoretical_layer_limit(160, table1) == 8);
  CHECK_FALSE(theoretical_layer_limit(6000, table1).has_value());  // beyond the 5116 field
  CHECK(theoretical_layer_limit(5116, table1) == 50);

  auto prefix_unrolled = [&](int l) {
    ModelConfig c = table1;
    c.n_blocks = 1;
    c.block_dilations.clear();
    for (int i = 1; i <= l; ++i) c.block_dilations.push_back(table1.dilation(i));
    return oracles::receptive_field_by_unrolling(c);
  };
  for (std::int64_t n : {2ll, 100ll, 160ll, 1000ll, 5116ll}) {
    const auto limit = theoretical_layer_limit(n, table1);
    REQUIRE(limit.has_value());
    CHECK(prefix_unrolled(*limit) >= n);
    if (*limit > 1) CHECK(prefix_unrolled(*limit - 1) < n);
  }
}

TEST_CASE("utterance splits are seeded, bounded, and degrade to frame splits") {
  const UtteranceSplit a = split_utterances(10, 0.25, 17);
  const UtteranceSplit b = split_utterances(10, 0.25, 17);
  REQUIRE_FALSE(a.frame_split);
  CHECK(a.is_test == b.is_test);
  std::size_t n_test = 0;
  for (auto v : a.is_test) n_test += v;
  CHECK(n_test >= 1);
  CHECK(n_test <= 9);

  const UtteranceSplit c = split_utterances(10, 0.25, 18);
  CHECK(a.is_test != c.is_test);  // different seed, different shuffle (w.h.p.)

  CHECK(split_utterances(1, 0.25, 17).frame_split);
  CHECK_THROWS_AS(split_utterances(0, 0.25, 17), Error);
  CHECK_THROWS_AS(split_utterances(5, 0.0, 17), Error);
}
