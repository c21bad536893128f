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

// Filterbank-domain Wiener filtering driven by externally supplied clean
// speech features.
//
// Per frame, the clean and noisy filterbank energies are each expanded to
// full spectral resolution through the filterbank pseudoinverse; their
// per-bin ratio is the gain applied to the noisy magnitude spectrum. The
// noisy phase is reused for resynthesis. No noise estimate or voice
// activity decision is involved: the denominator is the noisy signal
// itself.

#ifndef EVWF_ENHANCE_H_
#define EVWF_ENHANCE_H_

#include <span>

#include "evwf/audio.h"
#include "evwf/dsp.h"
#include "evwf/filterbank.h"
#include "evwf/types.h"

namespace evwf {

enum class GainExponent {
  kDirect,     // power-ratio gain applied to the magnitude as is
  kSqrtPower,  // square root of the power-ratio gain
};

enum class FeatureDomain {
  kLogFb,     // features are natural-log energies; exponentiated first
  kLinearFb,  // features are energies
};

struct EvwfConfig {
  double gain_floor = 0.0;
  double spectral_floor = kDefaultSpectralFloor;
  GainExponent gain_exponent = GainExponent::kDirect;
  FeatureDomain feature_domain = FeatureDomain::kLogFb;

  // Requires 0 <= gain_floor < 1 and spectral_floor > 0.
  void Validate() const;
};

// T x N per-bin gains, each in [gain_floor, 1].
struct WienerGain {
  Matrix frames;
};

// clean[m] / max(noisy[m], spectral_floor), clamped to [gain_floor, 1].
Vector FbWienerGain(std::span<const double> clean_fb,
                    std::span<const double> noisy_fb, const EvwfConfig& cfg);

// Gain at every bin from the ratio of synthesized clean and noisy power,
// both floored at spectral_floor. Bins where the noisy synthesis is at or
// below the floor use the FB-domain gain averaged through the filter
// weights instead. Bins outside every filter's support (DC and Nyquist)
// take the gain of the nearest covered bin.
Vector ExpandGain(const MelFilterbank& fb, std::span<const double> clean_fb,
                  std::span<const double> noisy_fb, const EvwfConfig& cfg);

// Frame-wise ExpandGain for T x M energy matrices.
WienerGain ExpandGains(const MelFilterbank& fb, const Matrix& clean_fb,
                       const Matrix& noisy_fb, const EvwfConfig& cfg);

MagnitudeSpectrogram ApplyGain(const MagnitudeSpectrogram& noisy_mag,
                               const WienerGain& gain);

// Full pipeline. `clean_features` must have the same frame count as the
// noisy STFT; a difference of up to two frames is trimmed (with a warning
// on stderr), larger differences throw AlignmentError.
AudioBuffer EnhanceUtterance(const AudioBuffer& noisy,
                             const LogFbFeatures& clean_features,
                             const MelFilterbank& fb,
                             const StftConfig& stft_cfg,
                             const EvwfConfig& evwf_cfg);

// Clean-reference features: the "ideal mapping" oracle.
LogFbFeatures IdealMappingFeatures(const AudioBuffer& clean,
                                   const MelFilterbank& fb,
                                   const StftConfig& stft_cfg);

}  // namespace evwf

#endif  // EVWF_ENHANCE_H_
