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

// Trained visual-to-audio mapping: a network plus the feature scalers it was
// trained with, and the AVNN model file format.

#ifndef EVWF_LIPREADING_H_
#define EVWF_LIPREADING_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evwf/avdata.h"
#include "evwf/filterbank.h"
#include "evwf/neural.h"
#include "evwf/types.h"

namespace evwf {

// Per-column affine normalization (x - mean) / scale. Applied to inputs
// that tile several frames, the statistics repeat every `dim()` columns.
struct FeatureScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  int dim() const { return static_cast<int>(mean.size()); }
  // Column statistics of `rows`; columns with a standard deviation below
  // 1e-8 get scale 1.
  static FeatureScaler Fit(const Matrix& rows);
  Matrix Apply(const Matrix& m) const;
  Matrix Invert(const Matrix& m) const;
};

enum class ModelKind { kLstm, kMlp };
ModelKind ParseModelKind(const std::string& name);
std::string ModelKindName(ModelKind kind);

class LipReadingModel {
 public:
  using Network = std::variant<LstmNetwork, MlpNetwork>;

  LipReadingModel(Network net, FeatureScaler visual, FeatureScaler audio);

  ModelKind kind() const;
  int context() const;
  const Network& network() const { return net_; }
  const FeatureScaler& visual_scaler() const { return visual_; }
  const FeatureScaler& audio_scaler() const { return audio_; }

  // Log-FB estimate for every frame of a T x 50 visual sequence (audio frame
  // rate). Frames t < k see row 0 repeated as their missing history.
  LogFbFeatures PredictFeatures(const Matrix& visual) const;

  // Feature MSE (no 0.5 factor) against the clean audio over frames
  // t >= first_frame of every utterance. The default (-1) starts at
  // context(), the frames whose full history exists, matching the training
  // windows. Comparisons across context sizes should pass the largest k.
  double EvaluateMse(std::span<const AlignedUtterance> utts, int first_frame = -1) const;

  std::vector<uint8_t> Encode() const;
  static LipReadingModel Decode(std::span<const uint8_t> bytes);
  void Save(const std::filesystem::path& path) const;
  static LipReadingModel Load(const std::filesystem::path& path);

 private:
  Network net_;
  FeatureScaler visual_;
  FeatureScaler audio_;
};

struct LipReadingSpec {
  ModelKind kind = ModelKind::kLstm;
  int context = 0;
  int hidden1 = 32;  // LSTM layer sizes
  int hidden2 = 48;
  std::vector<int> mlp_hidden = {50};
  Activation mlp_activation = Activation::kTanh;
};

struct LipReadingFit {
  LipReadingModel model;
  TrainResult result;
};

// Fits scalers on the training utterances, builds context windows and
// trains. Throws DataError for an empty split.
LipReadingFit TrainLipReading(const LipReadingSpec& spec,
                              std::span<const AlignedUtterance> train,
                              std::span<const AlignedUtterance> val,
                              const TrainConfig& cfg);

}  // namespace evwf

#endif  // EVWF_LIPREADING_H_
