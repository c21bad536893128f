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

#ifndef EVWF_AUDIO_H_
#define EVWF_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace evwf {

inline constexpr double kDefaultSampleRate = 50000.0;

// Mono time-domain signal. Samples are finite; nominal range [-1, 1].
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Throws std::invalid_argument for a non-positive rate or non-finite
  // samples.
  explicit AudioBuffer(std::vector<double> samples,
                       double sample_rate = kDefaultSampleRate);

  std::span<const double> samples() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](size_t i) const { return samples_[i]; }

  // Mean of squared samples; 0 for an empty buffer.
  double MeanPower() const;

 private:
  std::vector<double> samples_;
  double sample_rate_ = kDefaultSampleRate;
};

// RIFF/WAVE, PCM 16-bit little-endian, mono. Samples are scaled by 1/32768
// on read. On write, samples are clipped to [-1, 1] and quantized with
// round-half-away-from-zero.
AudioBuffer DecodeWav(std::span<const uint8_t> bytes);
std::vector<uint8_t> EncodeWav(const AudioBuffer& audio);

AudioBuffer ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace evwf

#endif  // EVWF_AUDIO_H_
