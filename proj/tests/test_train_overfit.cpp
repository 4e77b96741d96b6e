// End-to-end sanity: a small model memorizes a pure tone and free-running
// generation replays it at the right period.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "waveprobe/audio.hpp"
#include "waveprobe/generate.hpp"
#include "waveprobe/model.hpp"
#include "waveprobe/train.hpp"

using namespace waveprobe;

TEST_CASE("an overfit tone model replays an 80-sample period") {
  AudioBuffer tone;
  tone.sample_rate = 16000.0;
  tone.samples.resize(8000);
  for (std::size_t t = 0; t < tone.samples.size(); ++t)
    tone.samples[t] =
        0.7 * std::sin(2.0 * std::numbers::pi * 200.0 * static_cast<double>(t) / 16000.0);
  const std::vector<QuantizedSignal> corpus = {mu_law_encode(tone)};

  ModelConfig c;
  c.layer_width = 16;
  c.skip_width = 16;
  c.n_blocks = 1;
  c.block_dilations = {1, 2, 4, 8, 16, 32, 64};  // receptive field 128
  Model model = make_initialized_model(c, 11);

  TrainOptions opt;
  opt.steps = 2000;
  opt.clip_samples = 2000;
  opt.seed = 11;
  const TrainStats stats = train(model, corpus, opt);
  REQUIRE(std::isfinite(stats.losses.back()));
  CHECK(evaluate_loss(model, corpus) < 1.0);

  GenerateOptions gen;
  gen.n_samples = 1700;
  gen.argmax = true;
  const std::vector<std::uint8_t> codes =
      generate(model, std::span(corpus[0].codes).first(128), gen);
  REQUIRE(codes.size() == 1700);

  std::vector<double> x(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) x[i] = mu_law_level(codes[i]);

  // Normalized autocorrelation over ten periods: the peak must sit at lag 800.
  const std::size_t span = x.size() - 840;
  auto ncc = [&](std::size_t lag) {
    double dot = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t t = 0; t < span; ++t) {
      dot += x[t] * x[t + lag];
      e0 += x[t] * x[t];
      e1 += x[t + lag] * x[t + lag];
    }
    REQUIRE(e0 > 0.0);
    REQUIRE(e1 > 0.0);
    return dot / std::sqrt(e0 * e1);
  };
  std::size_t best = 760;
  double best_val = -2.0;
  for (std::size_t lag = 760; lag <= 840; ++lag) {
    const double v = ncc(lag);
    if (v > best_val) {
      best_val = v;
      best = lag;
    }
  }
  CHECK(best >= 799);
  CHECK(best <= 801);
  CHECK(best_val >= 0.9);
}
