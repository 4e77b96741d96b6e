// waveprobe: train small autoregressive audio models, capture activations,
// and run the probe/SVD analysis batteries from the command line.
//
// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 format mismatch,
// 5 insufficient data. All randomness flows from --seed/--split-seed; every
// command writes a run.json embedding the seeds and input/output hashes, and
// refuses to overwrite existing outputs unless --overwrite is given.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveprobe/waveprobe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace waveprobe;

namespace {

// ---- output plumbing ----

void check_clobber(const fs::path& p, bool overwrite) {
  if (fs::exists(p) && !overwrite)
    fail(errc::config, "output '" + p.string() + "' exists; pass --overwrite to replace it");
}

/// Writes through a temp file and renames, so outputs are all-or-nothing.
template <class Fn>
void atomic_write(const fs::path& p, Fn&& write_to) {
  const fs::path tmp = p.string() + ".tmp";
  write_to(tmp);
  fs::rename(tmp, p);
}

void write_text(const fs::path& p, const std::string& text) {
  atomic_write(p, [&](const fs::path& tmp) {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), errc::config, "cannot open '" + tmp.string() + "'");
    os << text;
    require(static_cast<bool>(os), errc::config, "write failed for '" + tmp.string() + "'");
  });
}

void write_run_report(const fs::path& dir_or_file, json report, bool overwrite) {
  report["tool"] = "waveprobe";
  report["format_version"] = 1;
  const fs::path path = fs::is_directory(dir_or_file) ? dir_or_file / "run.json" : dir_or_file;
  check_clobber(path, overwrite);
  write_text(path, report.dump(2) + "\n");
}

json load_json_file(const fs::path& p, errc on_error) {
  std::ifstream is(p);
  require(static_cast<bool>(is), errc::config, "cannot open '" + p.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(on_error, "bad json in '" + p.string() + "': " + e.what());
  }
}

template <typename T>
T load_spec_file(const fs::path& p, errc on_error) {
  const json j = load_json_file(p, on_error);
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(on_error, "bad spec in '" + p.string() + "': " + e.what());
  }
}

// ---- input gathering ----

std::vector<fs::path> gather(const fs::path& p, const std::string& ext) {
  require(fs::exists(p), errc::config, "input '" + p.string() + "' does not exist");
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  require(!out.empty(), errc::config, "no *" + ext + " files in '" + p.string() + "'");
  return out;
}

/// Companion file for a dump: same basename under `root` (or `root` itself
/// when it is a single file and there is a single dump).
fs::path companion(const fs::path& dump, const fs::path& root, const std::string& suffix,
                   std::size_t n_dumps) {
  if (!fs::is_directory(root)) {
    require(n_dumps == 1, errc::config,
            "'" + root.string() + "' is a single file but multiple dumps were given");
    return root;
  }
  fs::path p = root / (dump.stem().string() + suffix);
  require(fs::exists(p), errc::config, "missing companion file '" + p.string() + "'");
  return p;
}

std::string layers_label(const std::vector<int>& layers, bool stacked) {
  if (stacked) return "stacked";
  std::string s;
  for (int l : layers) s += (s.empty() ? "" : "_") + std::to_string(l);
  return "layer" + s;
}

std::vector<int> parse_layers(const std::string& text, int n_layers) {
  std::vector<int> out;
  if (text == "all") {
    for (int l = 0; l <= n_layers; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int lo = std::stoi(item.substr(0, dash));
        const int hi = std::stoi(item.substr(dash + 1));
        require(lo <= hi, errc::config, "bad layer range '" + item + "'");
        for (int l = lo; l <= hi; ++l) out.push_back(l);
      }
    } catch (const std::invalid_argument&) {
      fail(errc::config, "cannot parse layer list item '" + item + "'");
    } catch (const std::out_of_range&) {
      fail(errc::config, "layer list item out of range: '" + item + "'");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  require(!out.empty(), errc::config, "empty layer list");
  for (int l : out)
    require(l >= 0 && l <= n_layers, errc::config,
            "layer " + std::to_string(l) + " outside 0.." + std::to_string(n_layers));
  return out;
}

// ---- shared corpus/track loading ----

std::vector<QuantizedSignal> load_training_corpus(const fs::path& src, json& report) {
  std::vector<QuantizedSignal> corpus;
  json items = json::array();
  if (!fs::is_directory(src)) {
    require(src.extension() == ".json", errc::config,
            "--corpus must be a wav directory or a corpus spec json");
    const CorpusSpec spec = load_spec_file<CorpusSpec>(src, errc::config);
    spec.validate();
    for (int i = 0; i < spec.n_utterances; ++i) {
      corpus.push_back(mu_law_encode(synth_utterance(spec, i).audio));
      items.push_back(utterance_basename(i));
    }
    report["corpus_spec"] = json(spec);
  } else {
    for (const fs::path& p : gather(src, ".wav")) {
      corpus.push_back(mu_law_encode(read_wav(p.string())));
      items.push_back(json{{"file", p.filename().string()}, {"hash", file_fingerprint(p)}});
    }
  }
  report["corpus"] = src.string();
  report["corpus_items"] = items;
  return corpus;
}

FeatureTrack load_track(const fs::path& p, FeatureKind kind) {
  if (p.extension() == ".wnft") {
    FeatureTrack t = read_track_wnft(p);
    require(t.kind == kind, errc::format,
            std::string("track '") + p.string() + "' holds " + feature_kind_name(t.kind) +
                ", expected " + feature_kind_name(kind));
    return t;
  }
  return read_track_csv(p, kind, /*expect_voiced=*/kind == FeatureKind::log_f0);
}

// ---- subcommands ----

struct SynthArgs {
  std::string spec_path, out_dir;
  bool overwrite = false;
};

int cmd_synth(const SynthArgs& a) {
  const CorpusSpec spec = load_spec_file<CorpusSpec>(a.spec_path, errc::config);
  spec.validate();
  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);

  json files = json::array();
  for (int i = 0; i < spec.n_utterances; ++i) {
    const SynthUtterance utt = synth_utterance(spec, i);
    const std::string base = utterance_basename(i);
    const fs::path wav = out / (base + ".wav");
    const fs::path f0 = out / (base + ".f0.csv");
    const fs::path band = out / (base + ".band.csv");
    for (const fs::path& p : {wav, f0, band}) check_clobber(p, a.overwrite);

    atomic_write(wav, [&](const fs::path& tmp) { write_wav(tmp.string(), utt.audio); });
    atomic_write(f0, [&](const fs::path& tmp) { write_track_csv(tmp, exact_f0_track(utt)); });
    atomic_write(band, [&](const fs::path& tmp) { write_track_csv(tmp, band_energy_track(utt)); });
    files.push_back(json{{"wav", wav.filename().string()},
                         {"hash", file_fingerprint(wav)}});
    std::fprintf(stderr, "synth-corpus: wrote %s (%.3f s)\n", wav.string().c_str(),
                 utt.audio.duration_s());
  }

  const fs::path spec_copy = out / "corpus_spec.json";
  check_clobber(spec_copy, a.overwrite);
  write_text(spec_copy, json(spec).dump(2) + "\n");
  write_run_report(out, json{{"command", "synth-corpus"},
                             {"seed", spec.seed},
                             {"spec", json(spec)},
                             {"files", files}},
                   a.overwrite);
  return 0;
}

struct TrainArgs {
  std::string config_path, corpus, out;
  int steps = 2000;
  int clip = 16000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int width = 0, blocks = 0, skip_width = 0;  // 0 = keep config value
  std::string dilations;
  bool overwrite = false;
};

int cmd_train(const TrainArgs& a) {
  ModelConfig config;
  if (!a.config_path.empty()) config = load_spec_file<ModelConfig>(a.config_path, errc::config);
  if (a.width > 0) config.layer_width = a.width;
  if (a.skip_width > 0) config.skip_width = a.skip_width;
  if (a.blocks > 0) config.n_blocks = a.blocks;
  if (!a.dilations.empty()) {
    config.block_dilations.clear();
    std::stringstream ss(a.dilations);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        config.block_dilations.push_back(std::stoi(item));
      } catch (const std::exception&) {
        fail(errc::config, "train: cannot parse dilation '" + item + "'");
      }
    }
  }
  config.validate();
  require(config.quantization_levels == kQuantizationLevels, errc::config,
          "train: the mu-law pipeline requires 256 quantization levels");

  const fs::path out(a.out);
  fs::path losses_path = out;
  losses_path.replace_extension(".losses.csv");
  fs::path run_path = out;
  run_path.replace_extension(".run.json");
  for (const fs::path& p : {out, losses_path, run_path}) check_clobber(p, a.overwrite);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());

  json report{{"command", "train"},
              {"seed", a.seed},
              {"steps", a.steps},
              {"clip_samples", a.clip},
              {"learning_rate", a.lr},
              {"config", json(config)},
              {"config_hash", hex64(fnv1a64(json(config).dump().data(), json(config).dump().size()))}};
  const std::vector<QuantizedSignal> corpus = load_training_corpus(a.corpus, report);

  Model model = make_initialized_model(config, a.seed);
  TrainOptions opt;
  opt.steps = a.steps;
  opt.clip_samples = a.clip;
  opt.learning_rate = a.lr;
  opt.seed = a.seed;
  opt.on_step = [&](int step, double loss) {
    if (step == 1 || step % 100 == 0 || step == a.steps)
      std::fprintf(stderr, "train: step %d loss %.4f\n", step, loss);
  };
  const TrainStats stats = train(model, corpus, opt);

  atomic_write(out, [&](const fs::path& tmp) { save_checkpoint(tmp.string(), model); });
  atomic_write(losses_path, [&](const fs::path& tmp) {
    std::ofstream os(tmp, std::ios::trunc);
    require(static_cast<bool>(os), errc::config, "cannot open '" + tmp.string() + "'");
    os.precision(12);
    os << "step,loss\n";
    for (std::size_t i = 0; i < stats.losses.size(); ++i) os << i + 1 << ',' << stats.losses[i] << '\n';
  });

  report["outputs"] = json{{"checkpoint", out.string()},
                           {"checkpoint_hash", file_fingerprint(out)},
                           {"losses", losses_path.string()}};
  write_run_report(run_path, report, a.overwrite);
  std::fprintf(stderr, "train: wrote %s\n", out.string().c_str());
  return 0;
}

struct DumpArgs {
  std::string ckpt, wav, out, layers = "all";
  int decimate = 1;
  bool preacts = false;
  bool overwrite = false;
};

int cmd_dump(const DumpArgs& a) {
  Model model = load_checkpoint(a.ckpt);
  const AudioBuffer audio = read_wav(a.wav);
  const QuantizedSignal q = mu_law_encode(audio);

  const fs::path out(a.out);
  fs::path run_path = out;
  run_path.replace_extension(".run.json");
  check_clobber(out, a.overwrite);
  check_clobber(run_path, a.overwrite);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());

  const ForwardResult fwd = forward_teacher_forced(
      model, q, a.preacts ? CaptureMode::outputs_and_preacts : CaptureMode::outputs);
  const std::vector<int> keep = parse_layers(a.layers, model.config.n_layers());
  const ActivationTensor acts = restrict_activations(fwd.activations, keep, a.decimate);
  atomic_write(out, [&](const fs::path& tmp) { write_wnac(tmp.string(), acts); });

  write_run_report(run_path,
                   json{{"command", "dump-activations"},
                        {"checkpoint", a.ckpt},
                        {"checkpoint_hash", file_fingerprint(a.ckpt)},
                        {"wav", a.wav},
                        {"wav_hash", file_fingerprint(a.wav)},
                        {"layers", keep},
                        {"decimate", a.decimate},
                        {"preacts", a.preacts},
                        {"outputs", json{{"dump", out.string()}, {"dump_hash", file_fingerprint(out)}}}},
                   a.overwrite);
  std::fprintf(stderr, "dump-activations: wrote %s (%lld samples, %zu layers)\n",
               out.string().c_str(), static_cast<long long>(acts.n_samples), acts.n_layers());
  return 0;
}

struct ProbeArgs {
  std::string dump, wav, features, ckpt, target, layers = "all", out;
  std::uint64_t split_seed = 17;
  double test_fraction = 0.25;
  bool stacked = false;
  bool no_references = false;
  bool overwrite = false;
};

int cmd_probe(const ProbeArgs& a) {
  const std::vector<fs::path> dumps = gather(a.dump, ".wnac");
  Model model;
  bool have_model = false;
  if (!a.ckpt.empty()) {
    model = load_checkpoint(a.ckpt);
    have_model = true;
  }
  require(a.target != "waveform" || have_model, errc::config,
          "probe: --target waveform needs --ckpt for the receptive field and references");

  // One dump resident at a time; the batteries may revisit utterances.
  std::size_t cached = static_cast<std::size_t>(-1);
  ProbeUtterance slot;
  json inputs = json::array();
  for (const fs::path& d : dumps) inputs.push_back(json{{"dump", d.string()}, {"hash", file_fingerprint(d)}});

  const double sample_rate = 16000.0;
  auto load = [&](std::size_t i) -> const ProbeUtterance& {
    if (cached == i) return slot;
    slot = ProbeUtterance{};
    slot.acts = read_wnac(dumps[i].string());
    if (have_model)
      require(slot.acts.width == model.config.layer_width, errc::format,
              "probe: dump width " + std::to_string(slot.acts.width) +
                  " does not match checkpoint width " + std::to_string(model.config.layer_width));
    if (!a.wav.empty())
      slot.audio = read_wav(companion(dumps[i], a.wav, ".wav", dumps.size()).string());

    if (a.target == "f0") {
      slot.target = a.features.empty()
                        ? dsp::f0_estimate(slot.audio)
                        : load_track(companion(dumps[i], a.features, ".f0.csv", dumps.size()),
                                     FeatureKind::log_f0);
    } else if (a.target == "band-energy") {
      slot.target = a.features.empty()
                        ? dsp::band_energy_db(slot.audio)
                        : load_track(companion(dumps[i], a.features, ".band.csv", dumps.size()),
                                     FeatureKind::band_energy_db);
    } else if (a.target == "spectrogram-wide") {
      slot.target = dsp::stft_magnitude(slot.audio, 4.0, 2.0);
    } else if (a.target == "spectrogram-narrow") {
      slot.target = dsp::stft_magnitude(slot.audio, 32.0, 5.0);
    }
    cached = i;
    return slot;
  };

  const bool needs_wav =
      a.target == "waveform" || a.target.rfind("spectrogram", 0) == 0 || a.features.empty();
  require(!needs_wav || !a.wav.empty(), errc::config,
          "probe: --wav is required to compute this target");

  const int max_layer = [&] {
    const ProbeUtterance& first = load(0);
    return first.acts.layer_ids.back();
  }();
  const std::vector<int> layer_list = parse_layers(a.layers, max_layer);
  for (int l : layer_list) load(0).acts.index_of(l);  // validate against the dump

  ProbeOptions opt;
  opt.split_seed = a.split_seed;
  opt.test_fraction = a.test_fraction;
  opt.compute_references = !a.no_references;

  std::vector<std::vector<int>> probe_sets;
  if (a.stacked) {
    probe_sets.push_back(layer_list);
  } else {
    for (int l : layer_list) probe_sets.push_back({l});
  }

  fs::create_directories(a.out);
  const fs::path outdir(a.out);
  const fs::path summary_path = outdir / "probe_summary.csv";
  check_clobber(summary_path, a.overwrite);

  std::string summary = "target,layers,metric,n_train,n_test,train_metric,test_metric\n";
  json results = json::array();
  for (const std::vector<int>& set : probe_sets) {
    ProbeResult res;
    if (a.target == "waveform") {
      res = probe_waveform(load, dumps.size(), set, model, WaveformTarget::next_sample, opt);
    } else {
      res = probe_feature(load, dumps.size(), set, sample_rate, opt);
    }

    const std::string label = layers_label(set, a.stacked);
    const fs::path jpath = outdir / ("probe_" + a.target + "_" + label + ".json");
    check_clobber(jpath, a.overwrite);
    write_text(jpath, probe_result_json(res).dump(2) + "\n");
    results.push_back(jpath.filename().string());

    char row[256];
    auto fmt = [](const std::optional<double>& v) {
      return v ? std::to_string(*v) : std::string("undefined");
    };
    std::snprintf(row, sizeof(row), "%s,%s,%s,%lld,%lld,%s,%s\n", res.target.c_str(), label.c_str(),
                  res.metric.c_str(), static_cast<long long>(res.n_train),
                  static_cast<long long>(res.n_test), fmt(res.train_metric).c_str(),
                  fmt(res.test_metric).c_str());
    summary += row;
    std::fprintf(stderr, "probe: %s %s test %s\n", res.target.c_str(), label.c_str(),
                 fmt(res.test_metric).c_str());
  }
  write_text(summary_path, summary);

  write_run_report(outdir,
                   json{{"command", "probe"},
                        {"target", a.target},
                        {"split_seed", a.split_seed},
                        {"test_fraction", a.test_fraction},
                        {"stacked", a.stacked},
                        {"inputs", inputs},
                        {"results", results}},
                   a.overwrite);
  return 0;
}

struct SvdArgs {
  std::string dump, out, mode = "causal";
  bool overwrite = false;
};

int cmd_svd(const SvdArgs& a) {
  const ActivationTensor acts = read_wnac(a.dump);
  const dsp::FilterMode mode = [&] {
    if (a.mode == "causal") return dsp::FilterMode::causal;
    if (a.mode == "zero-phase") return dsp::FilterMode::zero_phase;
    fail(errc::config, "svd-scan: --mode must be causal or zero-phase");
  }();

  fs::create_directories(a.out);
  const fs::path outdir(a.out);
  const fs::path csv = outdir / "svd_scan.csv";
  const fs::path js = outdir / "svd_scan.json";
  check_clobber(csv, a.overwrite);
  check_clobber(js, a.overwrite);

  const SvdScan scan = svd_scan(acts, 16000.0, mode);
  atomic_write(csv, [&](const fs::path& tmp) { write_svd_scan_csv(tmp.string(), scan); });
  write_text(js, svd_scan_json(scan).dump(2) + "\n");
  write_run_report(outdir,
                   json{{"command", "svd-scan"},
                        {"dump", a.dump},
                        {"dump_hash", file_fingerprint(a.dump)},
                        {"mode", a.mode},
                        {"results", json::array({csv.filename().string(), js.filename().string()})}},
                   a.overwrite);
  std::fprintf(stderr, "svd-scan: wrote %s\n", csv.string().c_str());
  return 0;
}

struct PreactArgs {
  std::string dump, f0, out;
  bool overwrite = false;
};

int cmd_preact(const PreactArgs& a) {
  const std::vector<fs::path> dumps = gather(a.dump, ".wnac");
  std::size_t cached = static_cast<std::size_t>(-1);
  ProbeUtterance slot;
  auto load = [&](std::size_t i) -> const ProbeUtterance& {
    if (cached == i) return slot;
    slot = ProbeUtterance{};
    slot.acts = read_wnac(dumps[i].string());
    slot.target = load_track(companion(dumps[i], a.f0, ".f0.csv", dumps.size()), FeatureKind::log_f0);
    cached = i;
    return slot;
  };

  const std::vector<PreactF0Layer> stats = preactivation_f0_correlation(load, dumps.size(), 16000.0);

  fs::create_directories(a.out);
  const fs::path outdir(a.out);
  const fs::path csv = outdir / "preact_f0.csv";
  check_clobber(csv, a.overwrite);

  std::string text = "layer,max_abs_rho,best_unit,constant_units,n_frames\n";
  json rows = json::array();
  for (const PreactF0Layer& s : stats) {
    char row[160];
    std::snprintf(row, sizeof(row), "%d,%s,%d,%zu,%lld\n", s.layer,
                  s.max_abs_rho ? std::to_string(*s.max_abs_rho).c_str() : "undefined", s.best_unit,
                  s.constant_units, static_cast<long long>(s.n_frames));
    text += row;
    rows.push_back(json{{"layer", s.layer},
                        {"max_abs_rho", s.max_abs_rho ? json(*s.max_abs_rho) : json(nullptr)},
                        {"best_unit", s.best_unit},
                        {"constant_units", s.constant_units},
                        {"n_frames", s.n_frames}});
  }
  write_text(csv, text);
  const fs::path js = outdir / "preact_f0.json";
  check_clobber(js, a.overwrite);
  write_text(js, rows.dump(2) + "\n");
  write_run_report(outdir, json{{"command", "preact-f0"}, {"rows", rows.size()}}, a.overwrite);
  std::fprintf(stderr, "preact-f0: wrote %s\n", csv.string().c_str());
  return 0;
}

struct ReportArgs {
  std::vector<std::string> in_dirs;
  std::string format = "csv";
};

int cmd_report(const ReportArgs& a) {
  require(a.format == "csv" || a.format == "json", errc::config, "report: --format must be csv or json");
  json rows = json::array();
  for (const std::string& dir : a.in_dirs) {
    require(fs::is_directory(dir), errc::config, "report: '" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json" &&
          e.path().filename().string().rfind("probe_", 0) == 0)
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      json j = load_json_file(f, errc::format);
      j["source"] = f.string();
      rows.push_back(std::move(j));
    }
  }

  if (a.format == "json") {
    std::cout << rows.dump(2) << "\n";
    return 0;
  }
  std::cout << "source,target,layers,metric,n_train,n_test,train_metric,test_metric\n";
  for (const json& r : rows) {
    std::string layers;
    for (const auto& l : r.at("layers")) layers += (layers.empty() ? "" : " ") + l.dump();
    auto metric = [&](const char* key) {
      return r.at(key).is_null() ? std::string("undefined") : std::to_string(r.at(key).get<double>());
    };
    std::cout << r.at("source").get<std::string>() << ',' << r.at("target").get<std::string>() << ','
              << layers << ',' << r.at("metric").get<std::string>() << ',' << r.at("n_train") << ','
              << r.at("n_test") << ',' << metric("train_metric") << ',' << metric("test_metric")
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"miniature autoregressive audio models with layer-probing analyses"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* sc_synth = app.add_subcommand("synth-corpus", "generate the synthetic harmonic corpus");
  sc_synth->add_option("--spec", synth.spec_path, "CorpusSpec json")->required();
  sc_synth->add_option("--out", synth.out_dir, "output directory")->required();
  sc_synth->add_flag("--overwrite", synth.overwrite, "replace existing outputs");

  TrainArgs tr;
  auto* sc_train = app.add_subcommand("train", "train a model on a corpus");
  sc_train->add_option("--config", tr.config_path, "ModelConfig json (defaults apply if omitted)");
  sc_train->add_option("--corpus", tr.corpus, "wav directory or CorpusSpec json")->required();
  sc_train->add_option("--out", tr.out, "checkpoint path (.wnck)")->required();
  sc_train->add_option("--steps", tr.steps, "Adam steps");
  sc_train->add_option("--clip", tr.clip, "max training clip length in samples");
  sc_train->add_option("--lr", tr.lr, "learning rate");
  sc_train->add_option("--seed", tr.seed, "init and clip-sampling seed");
  sc_train->add_option("--width", tr.width, "override layer width");
  sc_train->add_option("--skip-width", tr.skip_width, "override skip width");
  sc_train->add_option("--blocks", tr.blocks, "override block count");
  sc_train->add_option("--dilations", tr.dilations, "override per-block dilations, comma separated");
  sc_train->add_flag("--overwrite", tr.overwrite, "replace existing outputs");

  DumpArgs dm;
  auto* sc_dump = app.add_subcommand("dump-activations", "run a wav through a model and store every layer");
  sc_dump->add_option("--ckpt", dm.ckpt, "checkpoint")->required();
  sc_dump->add_option("--wav", dm.wav, "input audio")->required();
  sc_dump->add_option("--out", dm.out, "dump path (.wnac)")->required();
  sc_dump->add_option("--layers", dm.layers, "layer list/range or 'all'");
  sc_dump->add_option("--decimate", dm.decimate, "keep every d-th sample");
  sc_dump->add_flag("--preacts", dm.preacts, "store filter/gate pre-activations too");
  sc_dump->add_flag("--overwrite", dm.overwrite, "replace existing outputs");

  ProbeArgs pr;
  auto* sc_probe = app.add_subcommand("probe", "fit linear probes from activations to targets");
  sc_probe->add_option("--dump", pr.dump, "wnac file or directory")->required();
  sc_probe->add_option("--wav", pr.wav, "matching wav file or directory");
  sc_probe->add_option("--features", pr.features, "precomputed target track file or directory");
  sc_probe->add_option("--ckpt", pr.ckpt, "checkpoint (required for waveform probes)");
  sc_probe->add_option("--target", pr.target, "waveform|f0|band-energy|spectrogram-wide|spectrogram-narrow")
      ->required()
      ->check(CLI::IsMember({"waveform", "f0", "band-energy", "spectrogram-wide", "spectrogram-narrow"}));
  sc_probe->add_option("--layers", pr.layers, "layer list/range or 'all'");
  sc_probe->add_flag("--stacked", pr.stacked, "one probe on all requested layers stacked");
  sc_probe->add_option("--split-seed", pr.split_seed, "utterance split seed");
  sc_probe->add_option("--test-fraction", pr.test_fraction, "held-out fraction");
  sc_probe->add_flag("--no-references", pr.no_references, "skip reference SNR computation");
  sc_probe->add_option("--out", pr.out, "output directory")->required();
  sc_probe->add_flag("--overwrite", pr.overwrite, "replace existing outputs");

  SvdArgs sv;
  auto* sc_svd = app.add_subcommand("svd-scan", "singular value spectra of band-split activations");
  sc_svd->add_option("--dump", sv.dump, "wnac file")->required();
  sc_svd->add_option("--mode", sv.mode, "causal|zero-phase");
  sc_svd->add_option("--out", sv.out, "output directory")->required();
  sc_svd->add_flag("--overwrite", sv.overwrite, "replace existing outputs");

  PreactArgs pa;
  auto* sc_pre = app.add_subcommand("preact-f0", "per-unit pre-activation rank correlation with log-F0");
  sc_pre->add_option("--dump", pa.dump, "wnac file or directory (dumped with --preacts)")->required();
  sc_pre->add_option("--f0", pa.f0, "log-F0 track file or directory")->required();
  sc_pre->add_option("--out", pa.out, "output directory")->required();
  sc_pre->add_flag("--overwrite", pa.overwrite, "replace existing outputs");

  ReportArgs rp;
  auto* sc_report = app.add_subcommand("report", "aggregate probe outputs to stdout");
  sc_report->add_option("--in", rp.in_dirs, "probe output directories")->required()->expected(-1);
  sc_report->add_option("--format", rp.format, "csv|json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_synth->parsed()) return cmd_synth(synth);
    if (sc_train->parsed()) return cmd_train(tr);
    if (sc_dump->parsed()) return cmd_dump(dm);
    if (sc_probe->parsed()) return cmd_probe(pr);
    if (sc_svd->parsed()) return cmd_svd(sv);
    if (sc_pre->parsed()) return cmd_preact(pa);
    if (sc_report->parsed()) return cmd_report(rp);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
