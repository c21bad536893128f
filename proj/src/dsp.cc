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

#include "evwf/dsp.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.h"

namespace evwf {

StftConfig StftConfig::ForVectorsPerSecond(double vectors_per_second,
                                           double sample_rate) {
  if (!(vectors_per_second > 0.0) || !(sample_rate > 0.0)) {
    throw std::invalid_argument("vectors per second and sample rate must be > 0");
  }
  StftConfig cfg;
  cfg.hop = static_cast<int>(std::ceil(sample_rate / vectors_per_second));
  cfg.Validate();
  return cfg;
}

void StftConfig::Validate() const {
  if (hop <= 0 || hop > frame_len || frame_len > dft_size) {
    throw std::invalid_argument(
        "StftConfig: need 0 < hop <= frame_len <= dft_size (hop=" +
        std::to_string(hop) + ", frame_len=" + std::to_string(frame_len) +
        ", dft_size=" + std::to_string(dft_size) + ")");
  }
  if (!std::has_single_bit(static_cast<unsigned>(dft_size))) {
    throw std::invalid_argument("StftConfig: dft_size must be a power of two");
  }
}

std::vector<double> HammingWindow(int n) {
  if (n < 2) throw std::invalid_argument("HammingWindow: n must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / denom);
  }
  return w;
}

int NumFrames(size_t num_samples, const StftConfig& cfg) {
  if (num_samples < static_cast<size_t>(cfg.frame_len)) return 0;
  return 1 + static_cast<int>((num_samples - cfg.frame_len) / cfg.hop);
}

size_t SynthesisLength(int num_frames, const StftConfig& cfg) {
  if (num_frames <= 0) return 0;
  return static_cast<size_t>(num_frames - 1) * cfg.hop + cfg.frame_len;
}

namespace {

std::vector<double> AnalysisWindow(const StftConfig& cfg) {
  switch (cfg.window) {
    case WindowType::kHamming:
      return HammingWindow(cfg.frame_len);
  }
  throw std::invalid_argument("unknown window type");
}

}  // namespace

ComplexSpectrogram Stft(const AudioBuffer& audio, const StftConfig& cfg) {
  cfg.Validate();
  const int num_frames = NumFrames(audio.size(), cfg);
  if (num_frames == 0) {
    throw std::invalid_argument("Stft: audio shorter than one frame (" +
                                std::to_string(audio.size()) + " < " +
                                std::to_string(cfg.frame_len) + ")");
  }
  const std::vector<double> window = AnalysisWindow(cfg);
  const int bins = cfg.num_bins();
  ComplexSpectrogram out{ComplexMatrix(num_frames, bins), cfg};
  std::vector<double> frame(cfg.dft_size, 0.0);
  std::vector<std::complex<double>> spectrum(bins);
  const auto samples = audio.samples();
  for (int t = 0; t < num_frames; ++t) {
    const size_t start = static_cast<size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      frame[i] = samples[start + i] * window[i];
    }
    internal::ForwardRealFft(frame, spectrum);
    spectrum[0].imag(0.0);
    spectrum[bins - 1].imag(0.0);
    for (int k = 0; k < bins; ++k) out.frames(t, k) = spectrum[k];
  }
  return out;
}

AudioBuffer IstftOverlapAdd(const MagnitudeSpectrogram& mag,
                            const PhaseSpectrogram& phase,
                            const StftConfig& cfg, double sample_rate) {
  cfg.Validate();
  if (mag.frames.rows() != phase.frames.rows() ||
      mag.frames.cols() != phase.frames.cols()) {
    throw std::invalid_argument("IstftOverlapAdd: magnitude/phase shape mismatch");
  }
  if (mag.frames.cols() != cfg.num_bins()) {
    throw std::invalid_argument("IstftOverlapAdd: bin count does not match dft_size");
  }
  const int num_frames = static_cast<int>(mag.frames.rows());
  const size_t length = SynthesisLength(num_frames, cfg);
  const std::vector<double> window = AnalysisWindow(cfg);
  std::vector<double> acc(length, 0.0);
  std::vector<double> wsum(length, 0.0);
  std::vector<std::complex<double>> spectrum(cfg.num_bins());
  std::vector<double> frame(cfg.dft_size);
  const double scale = 1.0 / cfg.dft_size;
  for (int t = 0; t < num_frames; ++t) {
    for (int k = 0; k < cfg.num_bins(); ++k) {
      spectrum[k] = std::polar(mag.frames(t, k), phase.frames(t, k));
    }
    internal::InverseRealFft(spectrum, frame);
    const size_t start = static_cast<size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      acc[start + i] += frame[i] * scale * window[i];
      wsum[start + i] += window[i] * window[i];
    }
  }
  for (size_t i = 0; i < length; ++i) acc[i] /= std::max(wsum[i], 1e-8);
  return AudioBuffer(std::move(acc), sample_rate);
}

std::pair<MagnitudeSpectrogram, PhaseSpectrogram> SplitMagPhase(
    const ComplexSpectrogram& spec) {
  MagnitudeSpectrogram mag{spec.frames.cwiseAbs()};
  PhaseSpectrogram phase{Matrix(spec.frames.rows(), spec.frames.cols())};
  for (Eigen::Index t = 0; t < spec.frames.rows(); ++t) {
    for (Eigen::Index k = 0; k < spec.frames.cols(); ++k) {
      const auto z = spec.frames(t, k);
      double a = (z == std::complex<double>(0.0, 0.0)) ? 0.0 : std::arg(z);
      if (a <= -std::numbers::pi) a = std::numbers::pi;  // keep (-pi, pi]
      phase.frames(t, k) = a;
    }
  }
  return {std::move(mag), std::move(phase)};
}

PowerSpectrogram PowerOf(const MagnitudeSpectrogram& mag) {
  return PowerSpectrogram{mag.frames.array().square().matrix()};
}

}  // namespace evwf
