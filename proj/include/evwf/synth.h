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

// Synthetic audio-visual corpus.
//
// Each utterance is driven by a smooth two-dimensional articulator
// trajectory (mouth opening and width) sampled at the audio frame rate.
// Visual frames are rendered lip images of the trajectory at one in three
// audio frames. Clean audio is a harmonic source shaped by a formant
// envelope whose first formant follows a leaky integral of the opening and
// whose second formant follows the width and its recent change, so the
// audio at frame t depends on the trajectory history, not only on the
// current image. Utterances start and end with closed lips (silence).

#ifndef EVWF_SYNTH_H_
#define EVWF_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "evwf/audio.h"
#include "evwf/avdata.h"
#include "evwf/dsp.h"
#include "evwf/filterbank.h"
#include "evwf/visual.h"

namespace evwf {

struct SynthCorpusConfig {
  int num_utterances = 200;
  int num_speakers = 5;
  int visual_frames = 30;    // per utterance, 3 audio frames each
  int silence_frames = 9;    // audio frames of closed lips at each end
  double sample_rate = kDefaultSampleRate;
  StftConfig stft;
  int image_width = 32;
  int image_height = 24;
  double pixel_noise = 0.04;
  uint64_t seed = 1;

  void Validate() const;
};

struct SpeakerTraits {
  double f0_hz = 150.0;
  double lip_scale = 1.0;
  double formant_shift = 1.0;
};

struct SynthUtterance {
  std::string id;
  std::string speaker;
  SpeakerTraits traits;
  Matrix trajectory;  // 3V x 2: opening, width in [0, 1]
  std::vector<VisualFrame> frames;
  AudioBuffer clean;
};

SpeakerTraits SpeakerTraitsFor(int speaker_index);

// Audio sample count giving exactly 3V STFT frames.
size_t SynthAudioLength(int visual_frames, const StftConfig& stft);

// Deterministic renderers, exposed so the trajectory -> audio mapping can be
// checked independently of the generator.
// The harmonic part is fully determined by the trajectory; `noise_seed`
// drives a low background floor and aspiration noise scaled by the opening.
AudioBuffer RenderCleanAudio(const Matrix& trajectory, const SpeakerTraits& traits,
                             const SynthCorpusConfig& cfg, uint64_t noise_seed);
VisualFrame RenderLipFrame(double opening, double width, const SpeakerTraits& traits,
                           const SynthCorpusConfig& cfg, Rng& rng);

// Utterance i uses a seed derived from (cfg.seed, i); the corpus is
// bitwise reproducible and can be generated in any order.
SynthUtterance SynthesizeUtterance(const SynthCorpusConfig& cfg, int index);
std::vector<SynthUtterance> SynthAvCorpus(const SynthCorpusConfig& cfg);

// Visual DCT features (triplicated) and clean log-FB features.
AlignedUtterance AlignUtterance(const SynthUtterance& utt, const MelFilterbank& fb,
                                const StftConfig& stft);

// V x 50 DCT features of a frame sequence, before triplication.
Matrix VisualFeatureSequence(const std::vector<VisualFrame>& frames);

}  // namespace evwf

#endif  // EVWF_SYNTH_H_
