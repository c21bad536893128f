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

#include "evwf/audio.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evwf/types.h"
#include "io_util.h"

namespace evwf {

AudioBuffer::AudioBuffer(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw std::invalid_argument("AudioBuffer: sample rate must be positive");
  }
  for (double s : samples_) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("AudioBuffer: non-finite sample");
    }
  }
}

double AudioBuffer::MeanPower() const {
  if (samples_.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples_) acc += s * s;
  return acc / static_cast<double>(samples_.size());
}

AudioBuffer DecodeWav(std::span<const uint8_t> bytes) {
  internal::ByteReader reader(bytes, "WAV");
  if (reader.GetString(4) != "RIFF") throw DataError("WAV: missing RIFF tag");
  reader.Get<uint32_t>();  // riff size, not trusted
  if (reader.GetString(4) != "WAVE") throw DataError("WAV: missing WAVE tag");

  bool have_fmt = false;
  uint32_t sample_rate = 0;
  while (reader.remaining() >= 8) {
    const std::string id = reader.GetString(4);
    const uint32_t size = reader.Get<uint32_t>();
    if (id == "fmt ") {
      if (size < 16) throw DataError("WAV: fmt chunk too small");
      const uint16_t format = reader.Get<uint16_t>();
      const uint16_t channels = reader.Get<uint16_t>();
      sample_rate = reader.Get<uint32_t>();
      reader.Get<uint32_t>();  // byte rate
      reader.Get<uint16_t>();  // block align
      const uint16_t bits = reader.Get<uint16_t>();
      reader.Skip(size - 16 + (size & 1));
      if (format != 1) throw DataError("WAV: only PCM is supported");
      if (channels != 1) throw DataError("WAV: only mono is supported");
      if (bits != 16) throw DataError("WAV: only 16-bit samples are supported");
      if (sample_rate == 0) throw DataError("WAV: zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError("WAV: data chunk before fmt chunk");
      if (size % 2 != 0) throw DataError("WAV: odd data chunk size");
      auto raw = reader.GetBytes(size);
      std::vector<double> samples(size / 2);
      for (size_t i = 0; i < samples.size(); ++i) {
        const auto v = static_cast<int16_t>(
            static_cast<uint16_t>(raw[2 * i]) |
            static_cast<uint16_t>(raw[2 * i + 1]) << 8);
        samples[i] = static_cast<double>(v) / 32768.0;
      }
      return AudioBuffer(std::move(samples), sample_rate);
    } else {
      reader.Skip(size + (size & 1));
    }
  }
  throw DataError("WAV: no data chunk");
}

std::vector<uint8_t> EncodeWav(const AudioBuffer& audio) {
  const auto n = static_cast<uint32_t>(audio.size());
  const auto rate = static_cast<uint32_t>(std::lround(audio.sample_rate()));
  internal::ByteWriter w;
  w.PutString("RIFF");
  w.Put<uint32_t>(36 + 2 * n);
  w.PutString("WAVE");
  w.PutString("fmt ");
  w.Put<uint32_t>(16);
  w.Put<uint16_t>(1);
  w.Put<uint16_t>(1);
  w.Put<uint32_t>(rate);
  w.Put<uint32_t>(rate * 2);
  w.Put<uint16_t>(2);
  w.Put<uint16_t>(16);
  w.PutString("data");
  w.Put<uint32_t>(2 * n);
  for (double s : audio.samples()) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const long q = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    w.Put<int16_t>(static_cast<int16_t>(q));
  }
  return w.Take();
}

AudioBuffer ReadWav(const std::filesystem::path& path) {
  const auto bytes = internal::ReadFileBytes(path);
  try {
    return DecodeWav(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void WriteWav(const std::filesystem::path& path, const AudioBuffer& audio) {
  internal::WriteFileBytes(path, EncodeWav(audio));
}

}  // namespace evwf
