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

// Audio-only comparison enhancers: power spectral subtraction and the
// Ephraim-Malah log-spectral amplitude (Log-MMSE) estimator. Both need a
// noise power estimate, taken from the leading frames of the utterance,
// which are assumed to be noise only.

#ifndef EVWF_BASELINES_H_
#define EVWF_BASELINES_H_

#include <span>
#include <vector>

#include "evwf/audio.h"
#include "evwf/dsp.h"
#include "evwf/types.h"

namespace evwf {

struct NoiseEstimate {
  Vector psd;  // power per bin
  int frames_used = 0;
};

// Optional noise tracking: frames that EnergyVad marks as non-speech update
// the estimate as psd <- smoothing * psd + (1 - smoothing) * |Y|^2.
struct NoiseTracking {
  bool enabled = false;
  double smoothing = 0.9;
  double vad_threshold_db = 30.0;
};

struct SsConfig {
  double oversubtraction = 1.0;  // a
  double floor = 0.02;           // b
  int noise_frames = 6;
  NoiseTracking tracking;

  void Validate() const;
};

struct LogMmseConfig {
  double dd_alpha = 0.98;
  double xi_min_db = -25.0;
  int noise_frames = 6;
  NoiseTracking tracking;

  void Validate() const;
};

// Mean power over the first `num_frames` frames, per bin.
NoiseEstimate EstimateNoiseInitial(const MagnitudeSpectrogram& noisy,
                                   int num_frames);

// |X|^2 = max(|Y|^2 - a N, b |Y|^2), noisy phase.
AudioBuffer SpectralSubtract(const AudioBuffer& noisy, const SsConfig& cfg,
                             const StftConfig& stft_cfg);
MagnitudeSpectrogram SpectralSubtractMagnitude(const MagnitudeSpectrogram& noisy,
                                               const SsConfig& cfg);

// Exponential integral E1(x) = int_x^inf exp(-t)/t dt, x > 0. Power series
// below 1, continued fraction from 1 upward.
double ExpIntegralE1(double x);

// Log-MMSE gain for a-priori SNR xi and a-posteriori SNR gamma,
// (xi / (1 + xi)) exp(E1(v) / 2) with v = xi gamma / (1 + xi), limited to
// (0, 1].
double LogMmseGain(double xi, double gamma);

// T x N gains produced by the decision-directed Log-MMSE recursion.
Matrix LogMmseGains(const MagnitudeSpectrogram& noisy, const LogMmseConfig& cfg);
AudioBuffer LogMmse(const AudioBuffer& noisy, const LogMmseConfig& cfg,
                    const StftConfig& stft_cfg);

// Frame t is speech iff 10 log10(peak / e_t) <= threshold_db. Throws
// std::invalid_argument on empty input or a negative threshold.
std::vector<bool> EnergyVad(std::span<const double> frame_energies,
                            double threshold_db_below_peak);

}  // namespace evwf

#endif  // EVWF_BASELINES_H_
