/* Copyright 2026 The EVWF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evwf/cli.h"
#include "evwf/eval.h"
#include "evwf/visual.h"
#include "io_util.h"

namespace evwf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FormatSnr(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr);
  return buf;
}

uint64_t Mix64(uint64_t a, uint64_t b) {
  uint64_t x = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void WriteText(const fs::path& path, const std::string& text) {
  internal::WriteFileBytes(path, std::span(reinterpret_cast<const uint8_t*>(text.data()),
                                           text.size()));
}

std::string ReadText(const fs::path& path) {
  const auto bytes = internal::ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

// --- manifest ----------------------------------------------------------------

struct Mixture {
  std::string noise;
  double snr_db = 0.0;
  std::string path;  // relative to the corpus root

  std::string Name(const std::string& id) const {
    return id + "_" + noise + "_" + FormatSnr(snr_db);
  }
};

struct ManifestEntry {
  std::string id;
  std::string speaker;
  SplitLabel split = SplitLabel::kTrain;
  std::string clean;
  std::string frames;
  std::string visual;
  std::string audio;
  std::vector<Mixture> mixtures;
};

struct Manifest {
  fs::path root;
  uint64_t seed = 0;
  StftConfig stft;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> Split(SplitLabel s) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
      if (e.split == s) out.push_back(&e);
    }
    return out;
  }
};

SplitLabel ParseSplit(const std::string& s) {
  if (s == "train") return SplitLabel::kTrain;
  if (s == "val") return SplitLabel::kVal;
  if (s == "test") return SplitLabel::kTest;
  throw DataError("manifest: unknown split '" + s + "'");
}

std::string ManifestToJson(const Manifest& m) {
  json j;
  j["format"] = "evwf-corpus";
  j["version"] = 1;
  j["seed"] = m.seed;
  j["sample_rate"] = kDefaultSampleRate;
  j["stft"] = {{"frame_len", m.stft.frame_len}, {"hop", m.stft.hop},
               {"dft_size", m.stft.dft_size}};
  json list = json::array();
  for (const auto& e : m.entries) {
    json mixes = json::array();
    for (const auto& x : e.mixtures) {
      mixes.push_back({{"noise", x.noise}, {"snr_db", x.snr_db}, {"path", x.path}});
    }
    list.push_back({{"id", e.id},
                    {"speaker", e.speaker},
                    {"split", SplitLabelName(e.split)},
                    {"clean", e.clean},
                    {"frames", e.frames},
                    {"visual", e.visual},
                    {"audio", e.audio},
                    {"mixtures", mixes}});
  }
  j["utterances"] = list;
  return j.dump(2) + "\n";
}

Manifest LoadManifest(const fs::path& path) {
  Manifest m;
  m.root = path.parent_path();
  try {
    const json j = json::parse(ReadText(path));
    if (j.at("format") != "evwf-corpus") throw DataError("manifest: wrong format tag");
    m.seed = j.at("seed").get<uint64_t>();
    const auto& s = j.at("stft");
    m.stft.frame_len = s.at("frame_len").get<int>();
    m.stft.hop = s.at("hop").get<int>();
    m.stft.dft_size = s.at("dft_size").get<int>();
    m.stft.Validate();
    for (const auto& u : j.at("utterances")) {
      ManifestEntry e;
      e.id = u.at("id").get<std::string>();
      e.speaker = u.at("speaker").get<std::string>();
      e.split = ParseSplit(u.at("split").get<std::string>());
      e.clean = u.at("clean").get<std::string>();
      e.frames = u.at("frames").get<std::string>();
      e.visual = u.at("visual").get<std::string>();
      e.audio = u.at("audio").get<std::string>();
      for (const auto& x : u.at("mixtures")) {
        e.mixtures.push_back({x.at("noise").get<std::string>(), x.at("snr_db").get<double>(),
                              x.at("path").get<std::string>()});
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

AlignedUtterance LoadAligned(const Manifest& m, const ManifestEntry& e) {
  AlignedUtterance a;
  a.id = e.id;
  a.speaker = e.speaker;
  a.visual = ReadAvfb(m.root / e.visual);
  a.audio.frames = ReadAvfb(m.root / e.audio);
  try {
    a.Validate();
  } catch (const std::exception& ex) {
    throw DataError(e.id + ": " + ex.what());
  }
  return a;
}

std::vector<AlignedUtterance> LoadSplit(const Manifest& m, SplitLabel s, int jobs) {
  const auto entries = m.Split(s);
  std::vector<AlignedUtterance> out(entries.size());
  ParallelFor(entries.size(), jobs, [&](size_t i) { out[i] = LoadAligned(m, *entries[i]); });
  return out;
}

// --- shared options ----------------------------------------------------------

struct CommonOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  int jobs = 1;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides config and EVWF_SEED)");
  cmd->add_option("--jobs", o.jobs, "Worker threads for per-utterance work")
      ->check(CLI::PositiveNumber);
}

// Defaults < config file < EVWF_SEED < --seed.
RunConfig ResolveConfig(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = LoadRunConfig(o.config_path);
  if (const char* env = std::getenv("EVWF_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') {
      throw UsageError(std::string("EVWF_SEED: not a non-negative integer: '") + env + "'");
    }
    cfg.seed = v;
  }
  if (o.seed) cfg.seed = *o.seed;
  cfg.train.rng_seed = cfg.seed;
  return cfg;
}

MelFilterbank BuildFilterbank(const StftConfig& stft) {
  return MelFilterbank::Build(kDefaultSampleRate, stft.dft_size);
}

// --- synth-corpus ------------------------------------------------------------

struct SynthOptions {
  CommonOptions common;
  std::string out;
  std::optional<int> utterances;
};

int RunSynth(const SynthOptions& o, std::ostream& out) {
  RunConfig cfg = ResolveConfig(o.common);
  if (o.utterances) cfg.utterances = *o.utterances;
  cfg.Validate();
  const SynthCorpusConfig corpus = cfg.CorpusConfig();
  const fs::path root = o.out;
  for (const char* sub : {"clean", "frames", "features", "noisy"}) EnsureDir(root / sub);
  const MelFilterbank fb = BuildFilterbank(cfg.stft);

  std::vector<std::string> speakers(cfg.utterances);
  for (int i = 0; i < cfg.utterances; ++i) {
    speakers[i] = "s" + std::to_string(i % cfg.speakers);
  }
  const auto splits = SplitDataset(speakers, cfg.split, cfg.seed);

  Manifest m;
  m.root = root;
  m.seed = cfg.seed;
  m.stft = cfg.stft;
  m.entries.resize(cfg.utterances);
  ParallelFor(static_cast<size_t>(cfg.utterances), o.common.jobs, [&](size_t i) {
    const SynthUtterance u = SynthesizeUtterance(corpus, static_cast<int>(i));
    ManifestEntry& e = m.entries[i];
    e.id = u.id;
    e.speaker = u.speaker;
    e.split = splits[i];
    e.clean = "clean/" + u.id + ".wav";
    e.frames = "frames/" + u.id;
    e.visual = "features/" + u.id + ".visual.avfb";
    e.audio = "features/" + u.id + ".audio.avfb";
    WriteWav(root / e.clean, u.clean);
    EnsureDir(root / e.frames);
    for (size_t v = 0; v < u.frames.size(); ++v) {
      char name[32];
      std::snprintf(name, sizeof(name), "%03zu.pgm", v);
      WritePgm(root / e.frames / name, u.frames[v]);
    }
    // Features are taken from the stored (quantized) audio so that they
    // match what `extract` produces from the WAV file.
    const AudioBuffer stored = ReadWav(root / e.clean);
    WriteAvfb(root / e.visual, UpsampleTriplicate(VisualFeatureSequence(u.frames)));
    WriteAvfb(root / e.audio, ExtractLogFb(stored, cfg.stft, fb).frames);
    if (e.split != SplitLabel::kTest) return;
    for (size_t ni = 0; ni < cfg.noises.size(); ++ni) {
      for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const NoiseLabel label = cfg.noises[ni];
        const uint64_t seed = Mix64(Mix64(cfg.seed, i), ni * 1000 + si);
        const AudioBuffer noise =
            GenerateNoise(label, stored.size(), stored.sample_rate(), seed);
        Mixture x{NoiseLabelName(label), cfg.snr_db[si], ""};
        x.path = "noisy/" + x.Name(u.id) + ".wav";
        WriteWav(root / x.path, MixAtSnr(stored, noise, {cfg.snr_db[si], label}));
        e.mixtures.push_back(std::move(x));
      }
    }
  });
  WriteText(root / "manifest.json", ManifestToJson(m));
  WriteText(root / "config.json", RunConfigToJson(cfg) + "\n");
  int counts[3] = {0, 0, 0};
  for (const auto& e : m.entries) ++counts[static_cast<int>(e.split)];
  out << "wrote " << m.entries.size() << " utterances to " << root.string() << " (train "
      << counts[0] << ", val " << counts[1] << ", test " << counts[2] << ")\n";
  return kExitOk;
}

// --- extract -----------------------------------------------------------------

struct ExtractOptions {
  CommonOptions common;
  std::string audio;
  std::string frames;
  std::string out;
  bool no_triplicate = false;
};

int RunExtract(const ExtractOptions& o, std::ostream& out) {
  RunConfig cfg = ResolveConfig(o.common);
  cfg.Validate();
  if (o.audio.empty() == o.frames.empty()) {
    throw UsageError("extract: give exactly one of --audio or --frames");
  }
  Matrix m;
  if (!o.audio.empty()) {
    const AudioBuffer a = ReadWav(o.audio);
    if (a.sample_rate() != kDefaultSampleRate) {
      throw DataError("extract: expected a " + FormatSnr(kDefaultSampleRate) + " Hz file");
    }
    m = ExtractLogFb(a, cfg.stft, BuildFilterbank(cfg.stft)).frames;
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.frames)) {
      if (entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("extract: no .pgm files in " + o.frames);
    std::vector<VisualFrame> frames;
    for (const auto& f : files) frames.push_back(ReadPgm(f));
    m = VisualFeatureSequence(frames);
    if (!o.no_triplicate) m = UpsampleTriplicate(m);
  }
  WriteAvfb(o.out, m);
  out << "wrote " << m.rows() << " x " << m.cols() << " features to " << o.out << "\n";
  return kExitOk;
}

// --- train -------------------------------------------------------------------

struct TrainOptions {
  CommonOptions common;
  std::string manifest;
  std::string out;
  std::string history;
  std::optional<std::string> model;
  std::optional<int> context;
  std::optional<int> epochs;
  bool full_scale = false;
};

int RunTrain(const TrainOptions& o, std::ostream& out) {
  RunConfig cfg = ResolveConfig(o.common);
  if (o.model) {
    try {
      cfg.model.kind = ParseModelKind(*o.model);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.context) cfg.model.context = *o.context;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.full_scale) {
    const auto a = LstmArchitecture::FullScale(cfg.model.context);
    cfg.model.hidden1 = a.hidden1;
    cfg.model.hidden2 = a.hidden2;
  }
  cfg.Validate();
  const Manifest m = LoadManifest(o.manifest);
  const auto train = LoadSplit(m, SplitLabel::kTrain, o.common.jobs);
  const auto val = LoadSplit(m, SplitLabel::kVal, o.common.jobs);
  const auto test = LoadSplit(m, SplitLabel::kTest, o.common.jobs);
  if (cfg.model.kind == ModelKind::kMlp) cfg.train.dropout_rate = 0.0;
  const LipReadingFit fit = TrainLipReading(cfg.model, train, val, cfg.train);
  fit.model.Save(o.out);

  if (!o.history.empty()) {
    std::ostringstream csv;
    csv << "epoch,train_loss,val_loss,val_mse\n";
    char line[128];
    for (const auto& h : fit.result.history) {
      std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g\n", h.epoch, h.train_loss,
                    h.val_loss, h.val_mse);
      csv << line;
    }
    WriteText(o.history, csv.str());
  }
  out << ModelKindName(cfg.model.kind) << " k=" << cfg.model.context << ": best epoch "
      << fit.result.best_epoch << ", val mse (normalized) " << fit.result.best_val_mse;
  if (!test.empty()) out << ", test feature mse " << fit.model.EvaluateMse(test);
  out << "\n";
  return kExitOk;
}

// --- enhance -----------------------------------------------------------------

struct EnhanceOptions {
  CommonOptions common;
  std::string method;
  std::string in;
  std::string out;
  std::string features;
  std::string manifest;
  std::string out_dir;
};

// Single-file feature source for EVWF.
LogFbFeatures ResolveFeatures(const std::string& spec, const RunConfig& cfg,
                              const MelFilterbank& fb) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw UsageError("enhance: --features must be ideal:<wav>, file:<avfb> or "
                     "model:<model.avnn>+<visual.avfb>");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  if (kind == "ideal") return IdealMappingFeatures(ReadWav(arg), fb, cfg.stft);
  if (kind == "file") {
    LogFbFeatures f;
    f.frames = ReadAvfb(arg);
    return f;
  }
  if (kind == "model") {
    const auto plus = arg.find('+');
    if (plus == std::string::npos) {
      throw UsageError("enhance: model features need <model.avnn>+<visual.avfb>");
    }
    const LipReadingModel model = LipReadingModel::Load(arg.substr(0, plus));
    return model.PredictFeatures(ReadAvfb(arg.substr(plus + 1)));
  }
  throw UsageError("enhance: unknown feature source '" + kind + "'");
}

AudioBuffer RunBaseline(const std::string& method, const AudioBuffer& noisy,
                        const RunConfig& cfg) {
  if (method == "ss") return SpectralSubtract(noisy, cfg.ss, cfg.stft);
  return LogMmse(noisy, cfg.lmmse, cfg.stft);
}

int RunEnhance(const EnhanceOptions& o, std::ostream& out) {
  RunConfig cfg = ResolveConfig(o.common);
  cfg.Validate();
  if (o.method != "evwf" && o.method != "ss" && o.method != "lmmse") {
    throw UsageError("enhance: --method must be evwf|ss|lmmse");
  }
  if (o.method == "evwf" && o.features.empty()) {
    throw UsageError("enhance: --method evwf needs --features");
  }
  const MelFilterbank fb = BuildFilterbank(cfg.stft);

  if (o.manifest.empty()) {
    if (o.in.empty() || o.out.empty()) {
      throw UsageError("enhance: give --in and --out, or --manifest and --out-dir");
    }
    const AudioBuffer noisy = ReadWav(o.in);
    const AudioBuffer result =
        o.method == "evwf"
            ? EnhanceUtterance(noisy, ResolveFeatures(o.features, cfg, fb), fb, cfg.stft,
                               cfg.evwf)
            : RunBaseline(o.method, noisy, cfg);
    WriteWav(o.out, result);
    out << "wrote " << o.out << "\n";
    return kExitOk;
  }

  // Batch mode over every test-split mixture.
  if (o.out_dir.empty()) throw UsageError("enhance: --manifest needs --out-dir");
  const Manifest m = LoadManifest(o.manifest);
  std::string label = o.method;
  std::optional<LipReadingModel> model;
  if (o.method == "evwf") {
    if (o.features == "ideal") {
      label = "evwf_ideal";
    } else if (o.features.rfind("model:", 0) == 0) {
      label = "evwf_model";
      model = LipReadingModel::Load(o.features.substr(6));
    } else {
      throw UsageError("enhance: batch mode takes --features ideal or model:<model.avnn>");
    }
  }
  const fs::path dir = fs::path(o.out_dir) / label;
  EnsureDir(dir);
  std::vector<std::pair<const ManifestEntry*, const Mixture*>> items;
  for (const auto* e : m.Split(SplitLabel::kTest)) {
    for (const auto& x : e->mixtures) items.emplace_back(e, &x);
  }
  if (items.empty()) throw DataError("enhance: manifest has no test mixtures");
  ParallelFor(items.size(), o.common.jobs, [&](size_t i) {
    const auto& [e, x] = items[i];
    const AudioBuffer noisy = ReadWav(m.root / x->path);
    AudioBuffer result;
    if (o.method == "evwf") {
      const LogFbFeatures f =
          model ? model->PredictFeatures(ReadAvfb(m.root / e->visual))
                : IdealMappingFeatures(ReadWav(m.root / e->clean), fb, cfg.stft);
      result = EnhanceUtterance(noisy, f, fb, cfg.stft, cfg.evwf);
    } else {
      result = RunBaseline(o.method, noisy, cfg);
    }
    WriteWav(dir / (x->Name(e->id) + ".wav"), result);
  });
  out << "enhanced " << items.size() << " mixtures into " << dir.string() << "\n";
  return kExitOk;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateOptions {
  CommonOptions common;
  std::string manifest;
  std::string enhanced_dir;
  std::string out_dir;
};

int RunEvaluate(const EvaluateOptions& o, std::ostream& out) {
  RunConfig cfg = ResolveConfig(o.common);
  cfg.Validate();
  const Manifest m = LoadManifest(o.manifest);
  const MelFilterbank fb = BuildFilterbank(m.stft);
  std::vector<std::string> methods = {"noisy"};
  for (const auto& label : MethodLabels()) {
    if (label != "noisy" && fs::is_directory(fs::path(o.enhanced_dir) / label)) {
      methods.push_back(label);
    }
  }
  std::vector<std::pair<const ManifestEntry*, const Mixture*>> items;
  for (const auto* e : m.Split(SplitLabel::kTest)) {
    for (const auto& x : e->mixtures) items.emplace_back(e, &x);
  }
  if (items.empty()) throw DataError("evaluate: manifest has no test mixtures");

  std::vector<std::vector<EvalRow>> per_item(items.size());
  ParallelFor(items.size(), o.common.jobs, [&](size_t i) {
    const auto& [e, x] = items[i];
    const AudioBuffer clean = ReadWav(m.root / e->clean);
    const LogFbFeatures clean_fb = ExtractLogFb(clean, m.stft, fb);
    for (const auto& method : methods) {
      const fs::path path = method == "noisy"
                                ? m.root / x->path
                                : fs::path(o.enhanced_dir) / method / (x->Name(e->id) + ".wav");
      if (!fs::exists(path)) throw DataError("evaluate: missing " + path.string());
      const AudioBuffer proc = ReadWav(path);
      LogFbFeatures proc_fb = ExtractLogFb(proc, m.stft, fb);
      const Eigen::Index rows = std::min(proc_fb.frames.rows(), clean_fb.frames.rows());
      LogFbFeatures ref;
      ref.frames = clean_fb.frames.topRows(rows);
      proc_fb.frames = proc_fb.frames.topRows(rows).eval();
      EvalRow row;
      row.method = method;
      row.snr_db = x->snr_db;
      row.utterance = x->Name(e->id);
      row.seg_snr_db = SegmentalSnr(clean, proc);
      row.lsd_db = LogSpectralDistance(clean, proc, m.stft);
      row.feature_mse = FeatureMse(proc_fb, ref);
      if (!std::isfinite(row.seg_snr_db) || !std::isfinite(row.lsd_db) ||
          !std::isfinite(row.feature_mse)) {
        throw NumericError("evaluate: non-finite metric for " + row.utterance);
      }
      per_item[i].push_back(std::move(row));
    }
  });
  std::vector<EvalRow> rows;
  for (auto& v : per_item) rows.insert(rows.end(), v.begin(), v.end());

  const fs::path dir = o.out_dir;
  EnsureDir(dir);
  WriteText(dir / "report.csv", RenderReportCsv(rows));
  const std::string table = RenderReportTable(rows);
  WriteText(dir / "report.txt", table);
  out << table;

  // Welch tests of the EVWF seg-SNR against each baseline, per SNR.
  const bool have_model =
      std::find(methods.begin(), methods.end(), "evwf_model") != methods.end();
  const bool have_ideal =
      std::find(methods.begin(), methods.end(), "evwf_ideal") != methods.end();
  if (!have_model && !have_ideal) return kExitOk;
  const std::string evwf = have_model ? "evwf_model" : "evwf_ideal";
  for (const std::string baseline : {"ss", "lmmse"}) {
    if (std::find(methods.begin(), methods.end(), baseline) == methods.end()) continue;
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_snr;
    for (const auto& r : rows) {
      if (r.method == evwf) by_snr[r.snr_db].first.push_back(r.seg_snr_db);
      if (r.method == baseline) by_snr[r.snr_db].second.push_back(r.seg_snr_db);
    }
    std::vector<TTestRow> tests;
    for (const auto& [snr, samples] : by_snr) {
      if (samples.first.size() < 2 || samples.second.size() < 2) continue;
      tests.push_back({snr, TwoSampleTTest(samples.first, samples.second)});
    }
    WriteText(dir / ("ttest_" + evwf + "_vs_" + baseline + ".csv"), RenderTTestCsv(tests));
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visually-derived Wiener filtering for speech enhancement", "evwf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "evwf 1.0.0");

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth-corpus", "Generate a synthetic audio-visual corpus");
  AddCommon(c_synth, synth.common);
  c_synth->add_option("--out", synth.out, "Output corpus directory")->required();
  c_synth->add_option("--utterances", synth.utterances, "Number of utterances")
      ->check(CLI::PositiveNumber);

  ExtractOptions extract;
  auto* c_extract = app.add_subcommand("extract", "Extract log-FB or visual DCT features");
  AddCommon(c_extract, extract.common);
  c_extract->add_option("--audio", extract.audio, "Input WAV (50 kHz mono)");
  c_extract->add_option("--frames", extract.frames, "Directory of PGM lip frames");
  c_extract->add_option("--out", extract.out, "Output AVFB file")->required();
  c_extract->add_flag("--no-triplicate", extract.no_triplicate,
                      "Keep visual features at the video frame rate");

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train a lip-reading regression model");
  AddCommon(c_train, train.common);
  c_train->add_option("--manifest", train.manifest, "Corpus manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  c_train->add_option("--out", train.out, "Output model file (.avnn)")->required();
  c_train->add_option("--history", train.history, "Loss-history CSV");
  c_train->add_option("--model", train.model, "lstm|mlp");
  c_train->add_option("--context", train.context, "Prior frames k")
      ->check(CLI::NonNegativeNumber);
  c_train->add_option("--epochs", train.epochs, "Training epochs")->check(CLI::PositiveNumber);
  c_train->add_flag("--full-scale", train.full_scale, "LSTM layers of 250 and 300 cells");

  EnhanceOptions enhance;
  auto* c_enhance = app.add_subcommand("enhance", "Enhance noisy speech");
  AddCommon(c_enhance, enhance.common);
  c_enhance->add_option("--method", enhance.method, "evwf|ss|lmmse")->required();
  c_enhance->add_option("--in", enhance.in, "Noisy WAV");
  c_enhance->add_option("--out", enhance.out, "Enhanced WAV");
  c_enhance->add_option("--features", enhance.features,
                        "EVWF features: ideal:<clean.wav> | file:<feat.avfb> | "
                        "model:<model.avnn>+<visual.avfb>; batch mode: ideal | "
                        "model:<model.avnn>");
  c_enhance->add_option("--manifest", enhance.manifest, "Batch mode: corpus manifest.json");
  c_enhance->add_option("--out-dir", enhance.out_dir, "Batch mode: output root");

  EvaluateOptions evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score enhanced outputs and run t-tests");
  AddCommon(c_eval, evaluate.common);
  c_eval->add_option("--manifest", evaluate.manifest, "Corpus manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("--enhanced-dir", evaluate.enhanced_dir,
                     "Root holding one directory per method")
      ->required();
  c_eval->add_option("--out-dir", evaluate.out_dir, "Report directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_synth->parsed()) return RunSynth(synth, out);
    if (c_extract->parsed()) return RunExtract(extract, out);
    if (c_train->parsed()) return RunTrain(train, out);
    if (c_enhance->parsed()) return RunEnhance(enhance, out);
    if (c_eval->parsed()) return RunEvaluate(evaluate, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const AlignmentError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConstructionError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace evwf
