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

#include "evwf/avdata.h"

#include <array>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "io_util.h"

namespace evwf {

Matrix UpsampleTriplicate(const Matrix& visual) {
  if (visual.rows() == 0) throw std::invalid_argument("UpsampleTriplicate: empty sequence");
  Matrix out(3 * visual.rows(), visual.cols());
  for (Eigen::Index v = 0; v < visual.rows(); ++v) {
    for (int r = 0; r < 3; ++r) out.row(3 * v + r) = visual.row(v);
  }
  return out;
}

void AlignedUtterance::Validate() const {
  if (visual.rows() == 0 || visual.rows() != audio.frames.rows()) {
    throw AlignmentError("utterance " + id + ": " + std::to_string(visual.rows()) +
                         " visual rows vs " + std::to_string(audio.frames.rows()) +
                         " audio rows");
  }
}

std::vector<ContextWindow> BuildContextWindows(const AlignedUtterance& utt, int k) {
  utt.Validate();
  if (k < 0) throw std::invalid_argument("BuildContextWindows: k < 0");
  const Eigen::Index frames = utt.visual.rows();
  if (frames < k + 1) {
    throw std::invalid_argument("BuildContextWindows: utterance " + utt.id + " has " +
                                std::to_string(frames) + " frames, need >= " +
                                std::to_string(k + 1));
  }
  std::vector<ContextWindow> out;
  out.reserve(frames - k);
  for (Eigen::Index t = k; t < frames; ++t) {
    out.push_back({utt.visual.middleRows(t - k, k + 1),
                   utt.audio.frames.row(t).transpose()});
  }
  return out;
}

Dataset WindowsToDataset(std::span<const AlignedUtterance> utts, int k) {
  if (k < 0) throw std::invalid_argument("WindowsToDataset: k < 0");
  Eigen::Index rows = 0;
  Eigen::Index dim = -1, out_dim = -1;
  for (const auto& u : utts) {
    u.Validate();
    if (u.visual.rows() < k + 1) {
      throw std::invalid_argument("WindowsToDataset: utterance " + u.id +
                                  " shorter than the context window");
    }
    if (dim < 0) {
      dim = u.visual.cols();
      out_dim = u.audio.frames.cols();
    } else if (dim != u.visual.cols() || out_dim != u.audio.frames.cols()) {
      throw std::invalid_argument("WindowsToDataset: inconsistent feature widths");
    }
    rows += u.visual.rows() - k;
  }
  Dataset ds;
  ds.steps = k + 1;
  ds.feature_dim = static_cast<int>(std::max<Eigen::Index>(dim, 0));
  ds.inputs.resize(rows, (k + 1) * std::max<Eigen::Index>(dim, 0));
  ds.targets.resize(rows, std::max<Eigen::Index>(out_dim, 0));
  Eigen::Index r = 0;
  for (const auto& u : utts) {
    for (Eigen::Index t = k; t < u.visual.rows(); ++t, ++r) {
      for (int s = 0; s <= k; ++s) {
        ds.inputs.block(r, s * dim, 1, dim) = u.visual.row(t - k + s);
      }
      ds.targets.row(r) = u.audio.frames.row(t);
    }
  }
  return ds;
}

Matrix CausalWindows(const Matrix& visual, int k) {
  if (k < 0) throw std::invalid_argument("CausalWindows: k < 0");
  if (visual.rows() == 0) throw std::invalid_argument("CausalWindows: empty sequence");
  const Eigen::Index dim = visual.cols();
  Matrix out(visual.rows(), (k + 1) * dim);
  for (Eigen::Index t = 0; t < visual.rows(); ++t) {
    for (int s = 0; s <= k; ++s) {
      const Eigen::Index src = std::max<Eigen::Index>(0, t - k + s);
      out.block(t, s * dim, 1, dim) = visual.row(src);
    }
  }
  return out;
}

// --- noise -----------------------------------------------------------------

NoiseLabel ParseNoiseLabel(const std::string& name) {
  if (name == "cafe") return NoiseLabel::kCafe;
  if (name == "street") return NoiseLabel::kStreet;
  if (name == "bus") return NoiseLabel::kBus;
  if (name == "pedestrian") return NoiseLabel::kPedestrian;
  if (name == "white") return NoiseLabel::kWhite;
  if (name == "file") return NoiseLabel::kFile;
  throw std::invalid_argument("unknown noise label '" + name + "'");
}

std::string NoiseLabelName(NoiseLabel label) {
  switch (label) {
    case NoiseLabel::kCafe: return "cafe";
    case NoiseLabel::kStreet: return "street";
    case NoiseLabel::kBus: return "bus";
    case NoiseLabel::kPedestrian: return "pedestrian";
    case NoiseLabel::kWhite: return "white";
    case NoiseLabel::kFile: return "file";
  }
  return "unknown";
}

namespace {

// Paul Kellet's economy pink filter.
class PinkFilter {
 public:
  double operator()(double w) {
    b0_ = 0.99765 * b0_ + w * 0.0990460;
    b1_ = 0.96300 * b1_ + w * 0.2965164;
    b2_ = 0.57000 * b2_ + w * 1.0526913;
    return 0.25 * (b0_ + b1_ + b2_ + w * 0.1848);
  }

 private:
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

class OnePoleLowpass {
 public:
  OnePoleLowpass(double cutoff_hz, double sample_rate)
      : a_(std::exp(-2.0 * std::numbers::pi * cutoff_hz / sample_rate)) {}
  double operator()(double x) { return y_ = (1.0 - a_) * x + a_ * y_; }

 private:
  double a_;
  double y_ = 0.0;
};

}  // namespace

AudioBuffer GenerateNoise(NoiseLabel label, size_t num_samples,
                          double sample_rate, uint64_t seed) {
  if (label == NoiseLabel::kFile) {
    throw std::invalid_argument("GenerateNoise: 'file' noise must be loaded from disk");
  }
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(num_samples, 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  switch (label) {
    case NoiseLabel::kWhite:
      for (auto& s : out) s = gauss(rng);
      break;
    case NoiseLabel::kCafe: {
      constexpr int kTalkers = 6;
      struct Talker {
        OnePoleLowpass lo, hi;
        double rate, phase;
      };
      std::vector<Talker> talkers;
      for (int i = 0; i < kTalkers; ++i) {
        talkers.push_back({OnePoleLowpass(2500.0 + 1000.0 * unif(rng), sample_rate),
                           OnePoleLowpass(250.0 + 150.0 * unif(rng), sample_rate),
                           3.0 + 2.5 * unif(rng), two_pi * unif(rng)});
      }
      PinkFilter pink;
      for (size_t n = 0; n < num_samples; ++n) {
        const double t = n / sample_rate;
        double acc = 0.3 * pink(gauss(rng));
        for (auto& tk : talkers) {
          const double band = tk.lo(gauss(rng));
          const double voiced = band - tk.hi(band);
          const double env = std::pow(std::sin(two_pi * tk.rate * t + tk.phase), 2);
          acc += 3.0 * env * voiced;
        }
        out[n] = acc;
      }
      break;
    }
    case NoiseLabel::kStreet: {
      OnePoleLowpass lp(400.0, sample_rate);
      PinkFilter pink;
      const double rate = 0.15 + 0.1 * unif(rng);
      const double phase = two_pi * unif(rng);
      for (size_t n = 0; n < num_samples; ++n) {
        const double t = n / sample_rate;
        const double level = 1.0 + 0.6 * std::sin(two_pi * rate * t + phase);
        out[n] = level * 4.0 * lp(gauss(rng)) + 0.3 * pink(gauss(rng));
      }
      break;
    }
    case NoiseLabel::kBus: {
      OnePoleLowpass rumble(150.0, sample_rate);
      const double f0 = 35.0 + 15.0 * unif(rng);
      std::vector<double> phases(10);
      for (auto& p : phases) p = two_pi * unif(rng);
      for (size_t n = 0; n < num_samples; ++n) {
        const double t = n / sample_rate;
        double acc = 6.0 * rumble(gauss(rng));
        for (int h = 1; h <= 10; ++h) {
          acc += 0.5 / h * std::sin(two_pi * f0 * h * t + phases[h - 1]);
        }
        out[n] = acc;
      }
      break;
    }
    case NoiseLabel::kPedestrian: {
      PinkFilter pink;
      OnePoleLowpass lp(3000.0, sample_rate);
      double burst = 0.0;
      const double decay = std::exp(-1.0 / (0.02 * sample_rate));
      const double step_prob = 2.0 / sample_rate;  // about two steps per second
      for (size_t n = 0; n < num_samples; ++n) {
        if (unif(rng) < step_prob) burst = 1.0 + unif(rng);
        burst *= decay;
        out[n] = pink(gauss(rng)) + 2.0 * burst * lp(gauss(rng));
      }
      break;
    }
    case NoiseLabel::kFile:
      break;
  }
  return AudioBuffer(std::move(out), sample_rate);
}

AudioBuffer MixAtSnr(const AudioBuffer& clean, const AudioBuffer& noise,
                     const NoiseMixSpec& spec) {
  if (!std::isfinite(spec.snr_db)) {
    throw std::invalid_argument("MixAtSnr: SNR must be finite");
  }
  if (clean.sample_rate() != noise.sample_rate()) {
    throw std::invalid_argument("MixAtSnr: sample rates differ");
  }
  if (clean.empty() || noise.empty()) {
    throw std::invalid_argument("MixAtSnr: empty signal");
  }
  const size_t n = clean.size();
  std::vector<double> tiled(n);
  for (size_t i = 0; i < n; ++i) tiled[i] = noise[i % noise.size()];
  const double clean_power = clean.MeanPower();
  double noise_power = 0.0;
  for (double s : tiled) noise_power += s * s;
  noise_power /= static_cast<double>(n);
  if (!(clean_power > 0.0) || !(noise_power > 0.0)) {
    throw std::invalid_argument("MixAtSnr: clean and noise need nonzero power");
  }
  const double gain =
      std::sqrt(clean_power / (noise_power * std::pow(10.0, spec.snr_db / 10.0)));
  std::vector<double> mixed(n);
  for (size_t i = 0; i < n; ++i) mixed[i] = clean[i] + gain * tiled[i];
  return AudioBuffer(std::move(mixed), clean.sample_rate());
}

double MeasureSnrDb(const AudioBuffer& clean, const AudioBuffer& noisy) {
  if (clean.size() != noisy.size()) {
    throw std::invalid_argument("MeasureSnrDb: length mismatch");
  }
  double signal = 0.0, noise = 0.0;
  for (size_t i = 0; i < clean.size(); ++i) {
    signal += clean[i] * clean[i];
    const double d = noisy[i] - clean[i];
    noise += d * d;
  }
  return 10.0 * std::log10(signal / noise);
}

// --- splits ----------------------------------------------------------------

std::string SplitLabelName(SplitLabel s) {
  switch (s) {
    case SplitLabel::kTrain: return "train";
    case SplitLabel::kVal: return "val";
    case SplitLabel::kTest: return "test";
  }
  return "unknown";
}

std::vector<int> SplitCounts(int n, const SplitRatios& ratios) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  if (r[0] < 0.0 || r[1] < 0.0 || r[2] < 0.0 ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("SplitCounts: ratios must be >= 0 and sum to 1");
  }
  std::vector<int> counts(3);
  double frac[3];
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = n * r[i];
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    frac[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int i = 0; assigned < n; i = (i + 1) % 3, ++assigned) ++counts[order[i]];
  return counts;
}

std::vector<SplitLabel> SplitDataset(std::span<const std::string> speakers,
                                     const SplitRatios& ratios, uint64_t seed) {
  if (speakers.empty()) throw std::invalid_argument("SplitDataset: no items");
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < speakers.size(); ++i) by_speaker[speakers[i]].push_back(i);
  Rng rng(seed);
  std::vector<SplitLabel> out(speakers.size(), SplitLabel::kTrain);
  for (auto& [speaker, items] : by_speaker) {
    std::shuffle(items.begin(), items.end(), rng);
    const auto counts = SplitCounts(static_cast<int>(items.size()), ratios);
    for (size_t j = 0; j < items.size(); ++j) {
      const int pos = static_cast<int>(j);
      out[items[j]] = pos < counts[0]              ? SplitLabel::kTrain
                      : pos < counts[0] + counts[1] ? SplitLabel::kVal
                                                    : SplitLabel::kTest;
    }
  }
  return out;
}

// --- AVFB ------------------------------------------------------------------

std::vector<uint8_t> EncodeAvfb(const Matrix& m) {
  internal::ByteWriter w;
  w.PutString("AVFB");
  w.Put<uint32_t>(static_cast<uint32_t>(m.rows()));
  w.Put<uint32_t>(static_cast<uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.Put<float>(static_cast<float>(m(r, c)));
  }
  return w.Take();
}

Matrix DecodeAvfb(std::span<const uint8_t> bytes) {
  internal::ByteReader r(bytes, "AVFB");
  if (r.GetString(4) != "AVFB") throw DataError("AVFB: bad magic");
  const uint32_t rows = r.Get<uint32_t>();
  const uint32_t cols = r.Get<uint32_t>();
  if (r.remaining() != static_cast<size_t>(rows) * cols * sizeof(float)) {
    throw DataError("AVFB: payload size does not match header");
  }
  Matrix m(rows, cols);
  for (uint32_t i = 0; i < rows; ++i) {
    for (uint32_t j = 0; j < cols; ++j) m(i, j) = r.Get<float>();
  }
  return m;
}

void WriteAvfb(const std::filesystem::path& path, const Matrix& m) {
  internal::WriteFileBytes(path, EncodeAvfb(m));
}

Matrix ReadAvfb(const std::filesystem::path& path) {
  const auto bytes = internal::ReadFileBytes(path);
  try {
    return DecodeAvfb(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace evwf
