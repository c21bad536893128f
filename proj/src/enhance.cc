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

#include "evwf/enhance.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace evwf {

void EvwfConfig::Validate() const {
  if (!(gain_floor >= 0.0 && gain_floor < 1.0)) {
    throw std::invalid_argument("EvwfConfig: gain_floor must be in [0, 1)");
  }
  if (!(spectral_floor > 0.0)) {
    throw std::invalid_argument("EvwfConfig: spectral_floor must be > 0");
  }
}

Vector FbWienerGain(std::span<const double> clean_fb,
                    std::span<const double> noisy_fb, const EvwfConfig& cfg) {
  cfg.Validate();
  if (clean_fb.size() != noisy_fb.size()) {
    throw std::invalid_argument("FbWienerGain: clean/noisy length mismatch");
  }
  Vector gain(clean_fb.size());
  for (size_t m = 0; m < clean_fb.size(); ++m) {
    const double g = clean_fb[m] / std::max(noisy_fb[m], cfg.spectral_floor);
    gain[m] = std::clamp(g, cfg.gain_floor, 1.0);
  }
  return gain;
}

namespace {

// DC and Nyquist lie outside every filter's open support; they copy the gain
// of the nearest covered bin.
void FillUncovered(const MelFilterbank& fb, Eigen::Ref<Eigen::RowVectorXd> gain) {
  const auto& covered = fb.covered();
  const int n = static_cast<int>(gain.size());
  int first = 0;
  while (first < n && !covered[first]) ++first;
  int last = n - 1;
  while (last >= 0 && !covered[last]) --last;
  if (first > last) return;
  for (int k = 0; k < first; ++k) gain[k] = gain[first];
  for (int k = last + 1; k < n; ++k) gain[k] = gain[last];
}

}  // namespace

Vector ExpandGain(const MelFilterbank& fb, std::span<const double> clean_fb,
                  std::span<const double> noisy_fb, const EvwfConfig& cfg) {
  if (clean_fb.size() != noisy_fb.size()) {
    throw std::invalid_argument("ExpandGain: clean/noisy length mismatch");
  }
  const auto m = static_cast<Eigen::Index>(clean_fb.size());
  Matrix clean = Eigen::Map<const Matrix>(clean_fb.data(), 1, m);
  Matrix noisy = Eigen::Map<const Matrix>(noisy_fb.data(), 1, m);
  return ExpandGains(fb, clean, noisy, cfg).frames.row(0).transpose();
}

WienerGain ExpandGains(const MelFilterbank& fb, const Matrix& clean_fb,
                       const Matrix& noisy_fb, const EvwfConfig& cfg) {
  cfg.Validate();
  if (clean_fb.rows() != noisy_fb.rows() || clean_fb.cols() != noisy_fb.cols()) {
    throw std::invalid_argument("ExpandGains: clean/noisy shape mismatch");
  }
  if ((clean_fb.array() < 0.0).any() || (noisy_fb.array() < 0.0).any()) {
    throw std::invalid_argument("ExpandGains: energies must be nonnegative");
  }
  const Matrix num = LeastSquaresSpectrum(fb, clean_fb);
  const Matrix den = LeastSquaresSpectrum(fb, noisy_fb);
  // Where the noisy least-squares spectrum is at or below the floor the bin
  // ratio is meaningless; those bins take the FB-domain gain spread through
  // the filter weights.
  const Matrix fb_gain =
      (clean_fb.array() / noisy_fb.array().max(cfg.spectral_floor))
          .max(cfg.gain_floor)
          .min(1.0)
          .matrix();
  const Eigen::RowVectorXd weight_sum = fb.weights().rowwise().sum().transpose();
  const Matrix spread = fb_gain * fb.weights().transpose();
  Matrix gain(num.rows(), num.cols());
  for (Eigen::Index t = 0; t < num.rows(); ++t) {
    for (Eigen::Index k = 0; k < num.cols(); ++k) {
      double g;
      if (den(t, k) > cfg.spectral_floor || weight_sum[k] == 0.0) {
        g = std::max(num(t, k), cfg.spectral_floor) /
            std::max(den(t, k), cfg.spectral_floor);
      } else {
        g = spread(t, k) / weight_sum[k];
      }
      g = std::clamp(g, cfg.gain_floor, 1.0);
      if (cfg.gain_exponent == GainExponent::kSqrtPower) g = std::sqrt(g);
      gain(t, k) = g;
    }
    FillUncovered(fb, gain.row(t));
  }
  return WienerGain{std::move(gain)};
}

MagnitudeSpectrogram ApplyGain(const MagnitudeSpectrogram& noisy_mag,
                               const WienerGain& gain) {
  if (noisy_mag.frames.rows() != gain.frames.rows() ||
      noisy_mag.frames.cols() != gain.frames.cols()) {
    throw std::invalid_argument("ApplyGain: magnitude/gain shape mismatch");
  }
  return MagnitudeSpectrogram{noisy_mag.frames.cwiseProduct(gain.frames)};
}

AudioBuffer EnhanceUtterance(const AudioBuffer& noisy,
                             const LogFbFeatures& clean_features,
                             const MelFilterbank& fb,
                             const StftConfig& stft_cfg,
                             const EvwfConfig& evwf_cfg) {
  evwf_cfg.Validate();
  if (stft_cfg.dft_size != fb.dft_size()) {
    throw std::invalid_argument("EnhanceUtterance: dft_size differs between STFT and filterbank");
  }
  if (clean_features.frames.cols() != fb.channels()) {
    throw std::invalid_argument("EnhanceUtterance: feature width != filterbank channels");
  }
  auto [mag, phase] = SplitMagPhase(Stft(noisy, stft_cfg));
  const Eigen::Index noisy_frames = mag.frames.rows();
  const Eigen::Index feat_frames = clean_features.frames.rows();
  const Eigen::Index diff = std::abs(noisy_frames - feat_frames);
  if (diff > 2) {
    throw AlignmentError("EnhanceUtterance: " + std::to_string(feat_frames) +
                         " feature frames vs " + std::to_string(noisy_frames) +
                         " audio frames");
  }
  const Eigen::Index frames = std::min(noisy_frames, feat_frames);
  if (diff > 0) {
    std::cerr << "warning: trimming to " << frames << " frames (features "
              << feat_frames << ", audio " << noisy_frames << ")\n";
  }

  const PowerSpectrogram noisy_power{
      mag.frames.topRows(frames).array().square().matrix()};
  const Matrix noisy_fb = ExpExpand(LogCompress(Analysis(fb, noisy_power)));
  Matrix clean_fb = clean_features.frames.topRows(frames);
  if (evwf_cfg.feature_domain == FeatureDomain::kLogFb) {
    clean_fb = clean_fb.array().exp().matrix();
  }

  const WienerGain gain = ExpandGains(fb, clean_fb, noisy_fb, evwf_cfg);
  const MagnitudeSpectrogram enhanced =
      ApplyGain(MagnitudeSpectrogram{mag.frames.topRows(frames)}, gain);
  const PhaseSpectrogram trimmed_phase{phase.frames.topRows(frames)};
  return IstftOverlapAdd(enhanced, trimmed_phase, stft_cfg, noisy.sample_rate());
}

LogFbFeatures IdealMappingFeatures(const AudioBuffer& clean,
                                   const MelFilterbank& fb,
                                   const StftConfig& stft_cfg) {
  return ExtractLogFb(clean, stft_cfg, fb);
}

}  // namespace evwf
