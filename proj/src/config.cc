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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "evwf/cli.h"
#include "io_util.h"

namespace evwf {
namespace {

using nlohmann::json;

// Typed, key-checked view of one JSON object.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError("config: '" + Name() + "' must be an object");
  }

  // Rejects any key not in `allowed`.
  void Allow(std::initializer_list<const char*> allowed) const {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!keys.count(key)) throw UsageError("config: unknown key '" + Path(key) + "'");
    }
  }

  bool Has(const char* key) const { return j_.contains(key); }
  Section Sub(const char* key) const { return Section(j_.at(key), Path(key)); }

  void Get(const char* key, double& v) const {
    if (!Has(key)) return;
    if (!j_.at(key).is_number()) throw TypeError(key, "a number");
    v = j_.at(key).get<double>();
  }
  void Get(const char* key, int& v) const {
    if (!Has(key)) return;
    if (!j_.at(key).is_number_integer()) throw TypeError(key, "an integer");
    v = j_.at(key).get<int>();
  }
  void Get(const char* key, uint64_t& v) const {
    if (!Has(key)) return;
    if (!j_.at(key).is_number_unsigned()) throw TypeError(key, "a non-negative integer");
    v = j_.at(key).get<uint64_t>();
  }
  void Get(const char* key, bool& v) const {
    if (!Has(key)) return;
    if (!j_.at(key).is_boolean()) throw TypeError(key, "a boolean");
    v = j_.at(key).get<bool>();
  }
  void Get(const char* key, std::string& v) const {
    if (!Has(key)) return;
    if (!j_.at(key).is_string()) throw TypeError(key, "a string");
    v = j_.at(key).get<std::string>();
  }
  template <typename T>
  void GetList(const char* key, std::vector<T>& v) const {
    if (!Has(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array()) throw TypeError(key, "an array");
    std::vector<T> out;
    for (const auto& e : a) {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) throw TypeError(key, "an array of strings");
      } else if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) throw TypeError(key, "an array of integers");
      } else {
        if (!e.is_number()) throw TypeError(key, "an array of numbers");
      }
      out.push_back(e.get<T>());
    }
    v = std::move(out);
  }
  // Converts a string field with `parse`, reporting failures under the key.
  template <typename T, typename F>
  void GetEnum(const char* key, T& v, F parse) const {
    if (!Has(key)) return;
    std::string s;
    Get(key, s);
    try {
      v = parse(s);
    } catch (const std::invalid_argument& e) {
      throw UsageError("config: '" + Path(key) + "': " + e.what());
    }
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string Name() const { return path_.empty() ? "<root>" : path_; }
  UsageError TypeError(const char* key, const char* what) const {
    return UsageError("config: '" + Path(key) + "' must be " + what);
  }

  const json& j_;
  std::string path_;
};

GainExponent ParseGainExponent(const std::string& s) {
  if (s == "direct") return GainExponent::kDirect;
  if (s == "sqrt_power") return GainExponent::kSqrtPower;
  throw std::invalid_argument("expected direct|sqrt_power, got '" + s + "'");
}

Activation ParseActivation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("expected tanh|sigmoid, got '" + s + "'");
}

void ParseTracking(const Section& s, NoiseTracking& t) {
  s.Get("noise_tracking", t.enabled);
  s.Get("tracking_smoothing", t.smoothing);
  s.Get("vad_threshold_db", t.vad_threshold_db);
}

}  // namespace

SynthCorpusConfig RunConfig::CorpusConfig() const {
  SynthCorpusConfig c;
  c.num_utterances = utterances;
  c.num_speakers = speakers;
  c.visual_frames = visual_frames;
  c.silence_frames = silence_frames;
  c.pixel_noise = pixel_noise;
  c.stft = stft;
  c.seed = seed;
  return c;
}

void RunConfig::Validate() const {
  try {
    stft.Validate();
    evwf.Validate();
    train.Validate();
    ss.Validate();
    lmmse.Validate();
    CorpusConfig().Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (split.train <= 0.0 || split.val <= 0.0 || split.test <= 0.0 ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    throw UsageError("config: split ratios must be positive and sum to 1");
  }
  if (model.context < 0) throw UsageError("config: 'model.context' must be >= 0");
  if (snr_db.empty() || noises.empty()) {
    throw UsageError("config: 'mix.snr_db' and 'mix.noise' must be non-empty");
  }
  if (std::find(noises.begin(), noises.end(), NoiseLabel::kFile) != noises.end()) {
    throw UsageError("config: 'mix.noise' cannot use 'file'");
  }
}

RunConfig ParseRunConfig(const std::string& json_text, RunConfig cfg) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: invalid JSON: ") + e.what());
  }
  const Section r(root, "");
  r.Allow({"seed", "stft", "evwf", "train", "ss", "lmmse", "split", "model", "corpus", "mix"});
  r.Get("seed", cfg.seed);
  if (r.Has("stft")) {
    const Section s = r.Sub("stft");
    s.Allow({"frame_len", "hop", "dft_size", "vectors_per_second"});
    s.Get("frame_len", cfg.stft.frame_len);
    s.Get("hop", cfg.stft.hop);
    s.Get("dft_size", cfg.stft.dft_size);
    if (s.Has("vectors_per_second")) {
      if (s.Has("hop")) {
        throw UsageError("config: 'stft.hop' and 'stft.vectors_per_second' are exclusive");
      }
      double vps = 0.0;
      s.Get("vectors_per_second", vps);
      if (!(vps > 0.0)) throw UsageError("config: 'stft.vectors_per_second' must be > 0");
      cfg.stft.hop = StftConfig::ForVectorsPerSecond(vps, kDefaultSampleRate).hop;
    }
  }
  if (r.Has("evwf")) {
    const Section s = r.Sub("evwf");
    s.Allow({"gain_floor", "spectral_floor", "gain_exponent"});
    s.Get("gain_floor", cfg.evwf.gain_floor);
    s.Get("spectral_floor", cfg.evwf.spectral_floor);
    s.GetEnum("gain_exponent", cfg.evwf.gain_exponent, ParseGainExponent);
  }
  if (r.Has("train")) {
    const Section s = r.Sub("train");
    s.Allow({"lr", "rms_rho", "rms_eps", "dropout_rate", "batch_size", "epochs"});
    s.Get("lr", cfg.train.lr);
    s.Get("rms_rho", cfg.train.rms_rho);
    s.Get("rms_eps", cfg.train.rms_eps);
    s.Get("dropout_rate", cfg.train.dropout_rate);
    s.Get("batch_size", cfg.train.batch_size);
    s.Get("epochs", cfg.train.epochs);
  }
  if (r.Has("ss")) {
    const Section s = r.Sub("ss");
    s.Allow({"oversubtraction", "floor", "noise_frames", "noise_tracking",
             "tracking_smoothing", "vad_threshold_db"});
    s.Get("oversubtraction", cfg.ss.oversubtraction);
    s.Get("floor", cfg.ss.floor);
    s.Get("noise_frames", cfg.ss.noise_frames);
    ParseTracking(s, cfg.ss.tracking);
  }
  if (r.Has("lmmse")) {
    const Section s = r.Sub("lmmse");
    s.Allow({"dd_alpha", "xi_min_db", "noise_frames", "noise_tracking", "tracking_smoothing",
             "vad_threshold_db"});
    s.Get("dd_alpha", cfg.lmmse.dd_alpha);
    s.Get("xi_min_db", cfg.lmmse.xi_min_db);
    s.Get("noise_frames", cfg.lmmse.noise_frames);
    ParseTracking(s, cfg.lmmse.tracking);
  }
  if (r.Has("split")) {
    const Section s = r.Sub("split");
    s.Allow({"layout", "train", "val", "test"});
    if (s.Has("layout")) {
      std::string layout;
      s.Get("layout", layout);
      if (layout == "table") {
        cfg.split = SplitRatios::TableLayout();
      } else if (layout == "text") {
        cfg.split = SplitRatios::TextLayout();
      } else {
        throw UsageError("config: 'split.layout' must be table|text");
      }
    }
    s.Get("train", cfg.split.train);
    s.Get("val", cfg.split.val);
    s.Get("test", cfg.split.test);
  }
  if (r.Has("model")) {
    const Section s = r.Sub("model");
    s.Allow({"kind", "context", "hidden1", "hidden2", "mlp_hidden", "activation"});
    s.GetEnum("kind", cfg.model.kind, ParseModelKind);
    s.Get("context", cfg.model.context);
    s.Get("hidden1", cfg.model.hidden1);
    s.Get("hidden2", cfg.model.hidden2);
    s.GetList("mlp_hidden", cfg.model.mlp_hidden);
    s.GetEnum("activation", cfg.model.mlp_activation, ParseActivation);
  }
  if (r.Has("corpus")) {
    const Section s = r.Sub("corpus");
    s.Allow({"utterances", "speakers", "visual_frames", "silence_frames", "pixel_noise"});
    s.Get("utterances", cfg.utterances);
    s.Get("speakers", cfg.speakers);
    s.Get("visual_frames", cfg.visual_frames);
    s.Get("silence_frames", cfg.silence_frames);
    s.Get("pixel_noise", cfg.pixel_noise);
  }
  if (r.Has("mix")) {
    const Section s = r.Sub("mix");
    s.Allow({"snr_db", "noise"});
    s.GetList("snr_db", cfg.snr_db);
    std::vector<std::string> names;
    s.GetList("noise", names);
    if (s.Has("noise")) {
      cfg.noises.clear();
      for (const auto& n : names) {
        try {
          cfg.noises.push_back(ParseNoiseLabel(n));
        } catch (const std::invalid_argument& e) {
          throw UsageError("config: 'mix.noise': " + std::string(e.what()));
        }
      }
    }
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path, RunConfig base) {
  std::vector<uint8_t> bytes;
  try {
    bytes = internal::ReadFileBytes(path);
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return ParseRunConfig(std::string(bytes.begin(), bytes.end()), std::move(base));
}

std::string RunConfigToJson(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["stft"] = {{"frame_len", c.stft.frame_len}, {"hop", c.stft.hop},
               {"dft_size", c.stft.dft_size}};
  j["evwf"] = {{"gain_floor", c.evwf.gain_floor},
               {"spectral_floor", c.evwf.spectral_floor},
               {"gain_exponent",
                c.evwf.gain_exponent == GainExponent::kDirect ? "direct" : "sqrt_power"}};
  j["train"] = {{"lr", c.train.lr},
                {"rms_rho", c.train.rms_rho},
                {"rms_eps", c.train.rms_eps},
                {"dropout_rate", c.train.dropout_rate},
                {"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs}};
  j["ss"] = {{"oversubtraction", c.ss.oversubtraction},
             {"floor", c.ss.floor},
             {"noise_frames", c.ss.noise_frames},
             {"noise_tracking", c.ss.tracking.enabled},
             {"tracking_smoothing", c.ss.tracking.smoothing},
             {"vad_threshold_db", c.ss.tracking.vad_threshold_db}};
  j["lmmse"] = {{"dd_alpha", c.lmmse.dd_alpha},
                {"xi_min_db", c.lmmse.xi_min_db},
                {"noise_frames", c.lmmse.noise_frames},
                {"noise_tracking", c.lmmse.tracking.enabled},
                {"tracking_smoothing", c.lmmse.tracking.smoothing},
                {"vad_threshold_db", c.lmmse.tracking.vad_threshold_db}};
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
  j["model"] = {{"kind", ModelKindName(c.model.kind)},
                {"context", c.model.context},
                {"hidden1", c.model.hidden1},
                {"hidden2", c.model.hidden2},
                {"mlp_hidden", c.model.mlp_hidden},
                {"activation",
                 c.model.mlp_activation == Activation::kTanh ? "tanh" : "sigmoid"}};
  j["corpus"] = {{"utterances", c.utterances},
                 {"speakers", c.speakers},
                 {"visual_frames", c.visual_frames},
                 {"silence_frames", c.silence_frames},
                 {"pixel_noise", c.pixel_noise}};
  std::vector<std::string> noise;
  for (auto n : c.noises) noise.push_back(NoiseLabelName(n));
  j["mix"] = {{"snr_db", c.snr_db}, {"noise", noise}};
  return j.dump(2);
}

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  if (jobs < 1) throw std::invalid_argument("ParallelFor: jobs must be >= 1");
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads = std::min<size_t>(static_cast<size_t>(jobs), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace evwf
