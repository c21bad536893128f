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

#include "evwf/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace evwf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxHarmonicHz = 8000.0;
constexpr double kOpeningLeak = 0.8;  // per audio frame
constexpr int kWidthLag = 6;          // audio frames (two video frames)
constexpr double kBackgroundLevel = 2e-4;
constexpr double kAspirationLevel = 3e-3;

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Sum of sinusoids with random rates in [lo_hz, hi_hz], scaled to [-1, 1].
std::vector<double> SmoothTrack(int frames, double frame_rate, double lo_hz,
                                double hi_hz, int terms, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> rate(terms), phase(terms), amp(terms);
  double total = 0.0;
  for (int j = 0; j < terms; ++j) {
    rate[j] = lo_hz + (hi_hz - lo_hz) * unif(rng);
    phase[j] = kTwoPi * unif(rng);
    amp[j] = 0.5 + unif(rng);
    total += amp[j];
  }
  std::vector<double> out(frames);
  for (int t = 0; t < frames; ++t) {
    double v = 0.0;
    for (int j = 0; j < terms; ++j) {
      v += amp[j] * std::sin(kTwoPi * rate[j] * t / frame_rate + phase[j]);
    }
    out[t] = v / total;
  }
  return out;
}

double Resonance(double f, double center, double bandwidth) {
  const double x = (f - center) / bandwidth;
  return 1.0 / (1.0 + x * x);
}

}  // namespace

void SynthCorpusConfig::Validate() const {
  stft.Validate();
  if (num_utterances < 1 || num_speakers < 1) {
    throw std::invalid_argument("SynthCorpusConfig: need >= 1 utterance and speaker");
  }
  if (visual_frames < 2) {
    throw std::invalid_argument("SynthCorpusConfig: need >= 2 visual frames");
  }
  if (silence_frames < 0 || 2 * silence_frames + 3 > 3 * visual_frames) {
    throw std::invalid_argument(
        "SynthCorpusConfig: silence leaves no room for speech (degenerate duration)");
  }
  if (!(sample_rate > 0.0) || image_width < 4 || image_height < 4) {
    throw std::invalid_argument("SynthCorpusConfig: invalid rate or image size");
  }
  if (image_width * image_height < kDctFeatureDim) {
    throw std::invalid_argument("SynthCorpusConfig: image too small for 50 DCT features");
  }
  if (!(pixel_noise >= 0.0)) throw std::invalid_argument("SynthCorpusConfig: pixel_noise < 0");
}

SpeakerTraits SpeakerTraitsFor(int speaker_index) {
  static constexpr double kF0[] = {120.0, 210.0, 150.0, 180.0, 105.0};
  const int i = speaker_index % 5;
  const int round = speaker_index / 5;
  SpeakerTraits t;
  t.f0_hz = kF0[i] * (1.0 + 0.03 * round);
  t.lip_scale = 0.9 + 0.05 * i;
  t.formant_shift = 0.94 + 0.03 * ((i + round) % 4);
  return t;
}

size_t SynthAudioLength(int visual_frames, const StftConfig& stft) {
  return static_cast<size_t>(stft.frame_len) +
         static_cast<size_t>(3 * visual_frames - 1) * stft.hop;
}

AudioBuffer RenderCleanAudio(const Matrix& trajectory, const SpeakerTraits& traits,
                             const SynthCorpusConfig& cfg, uint64_t noise_seed) {
  const int frames = static_cast<int>(trajectory.rows());
  const int harmonics = static_cast<int>(kMaxHarmonicHz / traits.f0_hz);
  // Per-frame harmonic amplitudes.
  Matrix amp(frames, harmonics);
  double integrated = 0.0;
  for (int t = 0; t < frames; ++t) {
    const double opening = trajectory(t, 0);
    const double width = trajectory(t, 1);
    integrated = kOpeningLeak * integrated + (1.0 - kOpeningLeak) * opening;
    const double width_change = width - trajectory(std::max(0, t - kWidthLag), 1);
    const double s = traits.formant_shift;
    const double f1 = s * (250.0 + 650.0 * integrated);
    const double f2 =
        s * std::clamp(800.0 + 1400.0 * width + 1500.0 * width_change, 600.0, 3200.0);
    const double f3 = s * (2400.0 + 500.0 * integrated + 300.0 * width);
    const double level = 0.08 * std::sqrt(opening);
    for (int h = 0; h < harmonics; ++h) {
      const double f = (h + 1) * traits.f0_hz;
      const double env = Resonance(f, f1, 90.0) + 0.6 * Resonance(f, f2, 130.0) +
                         0.3 * Resonance(f, f3, 200.0) + 0.01;
      amp(t, h) = level * env / (1.0 + f / 1500.0);
    }
  }

  const size_t length = SynthAudioLength(frames / 3, cfg.stft);
  std::vector<double> out(length, 0.0);
  std::vector<std::complex<double>> phasor(harmonics), step(harmonics);
  for (int h = 0; h < harmonics; ++h) {
    phasor[h] = {1.0, 0.0};
    step[h] = std::polar(1.0, kTwoPi * (h + 1) * traits.f0_hz / cfg.sample_rate);
  }
  const double center = cfg.stft.frame_len / 2.0;
  Rng rng(SplitMix64(noise_seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t n = 0; n < length; ++n) {
    const double u = std::clamp((static_cast<double>(n) - center) / cfg.stft.hop, 0.0,
                                static_cast<double>(frames - 1));
    const int t0 = static_cast<int>(u);
    const int t1 = std::min(t0 + 1, frames - 1);
    const double frac = u - t0;
    const double opening = (1.0 - frac) * trajectory(t0, 0) + frac * trajectory(t1, 0);
    double acc = (kBackgroundLevel + kAspirationLevel * opening) * gauss(rng);
    for (int h = 0; h < harmonics; ++h) {
      const double a = (1.0 - frac) * amp(t0, h) + frac * amp(t1, h);
      acc += a * phasor[h].imag();
      phasor[h] *= step[h];
    }
    if (n % 1024 == 1023) {
      for (auto& p : phasor) p /= std::abs(p);
    }
    out[n] = acc;
  }
  return AudioBuffer(std::move(out), cfg.sample_rate);
}

VisualFrame RenderLipFrame(double opening, double width, const SpeakerTraits& traits,
                           const SynthCorpusConfig& cfg, Rng& rng) {
  const int w = cfg.image_width;
  const int h = cfg.image_height;
  const double scale = traits.lip_scale;
  const double rx = (0.22 + 0.18 * width) * w * scale;
  const double ry = (0.12 + 0.22 * opening) * h * scale;
  const double rx_in = 0.8 * rx;
  const double ry_in = 0.8 * opening * ry;
  auto inside = [](double x, double y, double ax, double ay) {
    if (ax < 1e-3 || ay < 1e-3) return 0.0;
    const double r = std::sqrt((x / ax) * (x / ax) + (y / ay) * (y / ay));
    return std::clamp(0.5 + (1.0 - r) * std::min(ax, ay), 0.0, 1.0);
  };
  std::normal_distribution<double> noise(0.0, cfg.pixel_noise);
  std::vector<double> pixels(static_cast<size_t>(w) * h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const double x = col + 0.5 - w / 2.0;
      const double y = row + 0.5 - h / 2.0;
      const double lips = inside(x, y, rx, ry);
      const double mouth = inside(x, y, rx_in, ry_in);
      double v = 0.75 * (1.0 - lips) + 0.45 * lips;
      v = v * (1.0 - mouth) + 0.08 * mouth;
      if (cfg.pixel_noise > 0.0) v += noise(rng);
      pixels[static_cast<size_t>(row) * w + col] = std::clamp(v, 0.0, 1.0);
    }
  }
  return VisualFrame(w, h, std::move(pixels));
}

SynthUtterance SynthesizeUtterance(const SynthCorpusConfig& cfg, int index) {
  cfg.Validate();
  Rng rng(SplitMix64(cfg.seed * 0x100000001B3ull + static_cast<uint64_t>(index)));
  const int speaker = index % cfg.num_speakers;
  SynthUtterance u;
  char id[32];
  std::snprintf(id, sizeof(id), "u%04d", index);
  u.id = id;
  u.speaker = "s" + std::to_string(speaker);
  u.traits = SpeakerTraitsFor(speaker);

  const int frames = 3 * cfg.visual_frames;
  const double frame_rate = cfg.sample_rate / cfg.stft.hop;
  const auto open_track = SmoothTrack(frames, frame_rate, 1.5, 5.0, 3, rng);
  const auto width_track = SmoothTrack(frames, frame_rate, 0.5, 2.5, 2, rng);
  const int lead = cfg.silence_frames;
  const int tail = frames - cfg.silence_frames;
  constexpr int kRamp = 4;
  u.trajectory.resize(frames, 2);
  for (int t = 0; t < frames; ++t) {
    double gate = 0.0;
    if (t >= lead && t < tail) {
      const int edge = std::min(t - lead, tail - 1 - t);
      gate = edge >= kRamp ? 1.0
                           : 0.5 - 0.5 * std::cos(std::numbers::pi * (edge + 1) / (kRamp + 1));
    }
    u.trajectory(t, 0) = gate * std::clamp(0.55 + 0.5 * open_track[t], 0.0, 1.0);
    u.trajectory(t, 1) = std::clamp(0.5 + 0.45 * width_track[t], 0.0, 1.0);
  }
  for (int v = 0; v < cfg.visual_frames; ++v) {
    u.frames.push_back(RenderLipFrame(u.trajectory(3 * v, 0), u.trajectory(3 * v, 1),
                                      u.traits, cfg, rng));
  }
  u.clean = RenderCleanAudio(u.trajectory, u.traits, cfg, rng());
  return u;
}

std::vector<SynthUtterance> SynthAvCorpus(const SynthCorpusConfig& cfg) {
  cfg.Validate();
  std::vector<SynthUtterance> out;
  out.reserve(cfg.num_utterances);
  for (int i = 0; i < cfg.num_utterances; ++i) out.push_back(SynthesizeUtterance(cfg, i));
  return out;
}

Matrix VisualFeatureSequence(const std::vector<VisualFrame>& frames) {
  if (frames.empty()) throw std::invalid_argument("VisualFeatureSequence: no frames");
  Matrix out(static_cast<Eigen::Index>(frames.size()), kDctFeatureDim);
  for (size_t v = 0; v < frames.size(); ++v) out.row(v) = VisualFeatures(frames[v]).transpose();
  return out;
}

AlignedUtterance AlignUtterance(const SynthUtterance& utt, const MelFilterbank& fb,
                                const StftConfig& stft) {
  AlignedUtterance a;
  a.id = utt.id;
  a.speaker = utt.speaker;
  a.visual = UpsampleTriplicate(VisualFeatureSequence(utt.frames));
  a.audio = ExtractLogFb(utt.clean, stft, fb);
  a.Validate();
  return a;
}

}  // namespace evwf
