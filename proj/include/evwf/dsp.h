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

// Short-time spectral analysis and overlap-add resynthesis.

#ifndef EVWF_DSP_H_
#define EVWF_DSP_H_

#include <vector>

#include "evwf/audio.h"
#include "evwf/types.h"

namespace evwf {

enum class WindowType { kHamming };

struct StftConfig {
  int frame_len = 800;
  int hop = 500;
  int dft_size = 2048;  // frames are zero-padded to this length
  WindowType window = WindowType::kHamming;

  // Hop such that `vectors_per_second` frames cover one second at
  // `sample_rate`, rounded up (75 vps at 50 kHz gives hop 667).
  static StftConfig ForVectorsPerSecond(double vectors_per_second,
                                        double sample_rate);

  int num_bins() const { return dft_size / 2 + 1; }

  // Requires 0 < hop <= frame_len <= dft_size and a power-of-two dft_size.
  void Validate() const;
};

// w[i] = 0.54 - 0.46 cos(2 pi i / (n - 1)). Requires n >= 2.
std::vector<double> HammingWindow(int n);

// 1 + floor((num_samples - frame_len) / hop), or 0 when the signal is
// shorter than one frame.
int NumFrames(size_t num_samples, const StftConfig& cfg);

// Length of the overlap-add output for `num_frames` frames.
size_t SynthesisLength(int num_frames, const StftConfig& cfg);

// One-sided spectra, num_bins() columns.
struct ComplexSpectrogram {
  ComplexMatrix frames;
  StftConfig config;
};
struct MagnitudeSpectrogram {
  Matrix frames;
};
struct PhaseSpectrogram {
  Matrix frames;
};
struct PowerSpectrogram {
  Matrix frames;
};

ComplexSpectrogram Stft(const AudioBuffer& audio, const StftConfig& cfg);

// Weighted overlap-add: each inverse-transformed frame is multiplied by the
// analysis window and the sum is divided by the accumulated squared window
// (floored at 1e-8). Output length is SynthesisLength(T).
AudioBuffer IstftOverlapAdd(const MagnitudeSpectrogram& mag,
                            const PhaseSpectrogram& phase,
                            const StftConfig& cfg,
                            double sample_rate = kDefaultSampleRate);

// Phase of an exact zero is 0.
std::pair<MagnitudeSpectrogram, PhaseSpectrogram> SplitMagPhase(
    const ComplexSpectrogram& spec);
PowerSpectrogram PowerOf(const MagnitudeSpectrogram& mag);

}  // namespace evwf

#endif  // EVWF_DSP_H_
