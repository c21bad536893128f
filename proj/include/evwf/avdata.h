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

// Audio-visual data preparation: rate alignment, context windows, noise
// mixing at a target SNR, dataset splits and the AVFB feature file format.

#ifndef EVWF_AVDATA_H_
#define EVWF_AVDATA_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evwf/audio.h"
#include "evwf/filterbank.h"
#include "evwf/neural.h"
#include "evwf/types.h"

namespace evwf {

// Each visual row repeated three times: V x D -> 3V x D.
Matrix UpsampleTriplicate(const Matrix& visual);

struct AlignedUtterance {
  std::string id;
  std::string speaker;
  Matrix visual;         // T x 50, audio frame rate
  LogFbFeatures audio;   // T x 23

  void Validate() const;  // equal, nonzero frame counts
};

struct ContextWindow {
  Matrix input;  // (k + 1) x D, oldest frame first
  Vector target;
};

// Window t (t >= k) holds visual rows t-k..t and audio row t; T - k windows.
std::vector<ContextWindow> BuildContextWindows(const AlignedUtterance& utt,
                                               int k);

// All windows of all utterances as one dataset, rows in utterance order.
Dataset WindowsToDataset(std::span<const AlignedUtterance> utts, int k);

// Inputs for predicting every frame of a T x D visual sequence: the first k
// rows are padded by repeating row 0. Returns T x ((k + 1) D).
Matrix CausalWindows(const Matrix& visual, int k);

// --- noise -----------------------------------------------------------------

enum class NoiseLabel { kCafe, kStreet, kBus, kPedestrian, kWhite, kFile };

NoiseLabel ParseNoiseLabel(const std::string& name);
std::string NoiseLabelName(NoiseLabel label);

struct NoiseMixSpec {
  double snr_db = 0.0;
  NoiseLabel label = NoiseLabel::kWhite;
};

// Deterministic synthetic noise for every label except kFile. The colored
// labels are stand-ins with distinct spectral tilt and modulation:
// cafe = babble-like modulated band noise, street = low-passed noise with
// slow level changes, bus = engine harmonics over rumble, pedestrian = pink
// noise with transients.
AudioBuffer GenerateNoise(NoiseLabel label, size_t num_samples,
                          double sample_rate, uint64_t seed);

// Scales `noise` (tiled cyclically when shorter than `clean`) so that
// 10 log10(P_clean / P_noise) == snr_db over the whole utterance, and adds
// it to `clean`.
AudioBuffer MixAtSnr(const AudioBuffer& clean, const AudioBuffer& noise,
                     const NoiseMixSpec& spec);

// Measured SNR of `noisy` = clean + n against `clean`.
double MeasureSnrDb(const AudioBuffer& clean, const AudioBuffer& noisy);

// --- splits ----------------------------------------------------------------

enum class SplitLabel { kTrain, kVal, kTest };
std::string SplitLabelName(SplitLabel s);

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  static SplitRatios TableLayout() { return {0.7, 0.1, 0.2}; }
  static SplitRatios TextLayout() { return {0.8, 0.1, 0.1}; }
};

// Per-speaker counts: floors of n * ratio, with the leftover items handed
// out by largest fractional part (ties: train, val, test).
std::vector<int> SplitCounts(int n, const SplitRatios& ratios);

// Per-speaker stratified shuffle. Item i belongs to speakers[i].
std::vector<SplitLabel> SplitDataset(std::span<const std::string> speakers,
                                     const SplitRatios& ratios, uint64_t seed);

// --- AVFB ------------------------------------------------------------------
// "AVFB", u32 rows, u32 cols, rows * cols little-endian float32, row-major.

std::vector<uint8_t> EncodeAvfb(const Matrix& m);
Matrix DecodeAvfb(std::span<const uint8_t> bytes);
void WriteAvfb(const std::filesystem::path& path, const Matrix& m);
Matrix ReadAvfb(const std::filesystem::path& path);

}  // namespace evwf

#endif  // EVWF_AVDATA_H_
