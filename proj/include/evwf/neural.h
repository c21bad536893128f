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

// Visual-to-audio regression networks: a two-layer stacked LSTM with a
// linear dense head, and a tanh/sigmoid MLP over the concatenated context
// window. Both are trained with the per-sample cost
//   C = sum_i 0.5 (pred_i - target_i)^2,
// averaged over the batch, using RMSProp.
//
// Parameters live in one flat vector per network. Canonical order (also
// the on-disk order):
//   LSTM: for layer 1 then layer 2: W (4H x in), U (4H x H), b (4H);
//         then head W (out x H2), b (out). Matrices are row-major and the
//         four gate blocks are stacked as input, forget, output, candidate.
//   MLP:  for each layer from the input side: W (out x in), b (out).

#ifndef EVWF_NEURAL_H_
#define EVWF_NEURAL_H_

#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "evwf/types.h"

namespace evwf {

using Rng = std::mt19937_64;

// One sample per row. Inputs are the context window flattened oldest frame
// first: row = [x_{t-k}, ..., x_t], each `feature_dim` wide.
struct Dataset {
  Matrix inputs;
  Matrix targets;
  int steps = 1;
  int feature_dim = 0;

  Eigen::Index size() const { return inputs.rows(); }
  void Validate() const;
};

// Rows of `ds` selected by `indices`, in that order.
Dataset Subset(const Dataset& ds, std::span<const Eigen::Index> indices);

// --- LSTM ------------------------------------------------------------------

struct LstmArchitecture {
  int input_dim = 50;
  int hidden1 = 32;
  int hidden2 = 48;
  int output_dim = 23;
  int context = 0;  // prior frames; sequence length is context + 1

  static LstmArchitecture FullScale(int context);
  void Validate() const;
};

// One layer, gates stacked (input, forget, output, candidate).
struct LstmLayerParams {
  Matrix w;  // 4H x in
  Matrix u;  // 4H x H
  Vector b;  // 4H

  int hidden() const { return static_cast<int>(u.cols()); }
  int input_dim() const { return static_cast<int>(w.cols()); }
};

struct LstmCellState {
  Vector h;
  Vector c;
};

// i, f, o = sigmoid(.), g = tanh(.), c = f c_prev + i g, h = o tanh(c).
LstmCellState LstmCellForward(const LstmLayerParams& p, const Vector& x,
                              const Vector& h_prev, const Vector& c_prev);

class LstmNetwork {
 public:
  explicit LstmNetwork(const LstmArchitecture& arch);  // all-zero parameters

  static size_t LayerParamCount(int input_dim, int hidden);
  static size_t ParamCount(const LstmArchitecture& arch);

  // Uniform(-s, s) with s = 1 / sqrt(fan_in); forget-gate bias 1.
  void InitializeRandom(Rng& rng);

  const LstmArchitecture& arch() const { return arch_; }
  int steps() const { return arch_.context + 1; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  LstmLayerParams layer(int index) const;  // 0 or 1
  void set_layer(int index, const LstmLayerParams& p);

  // Evaluation mode, B x out for B x (steps * input_dim) inputs.
  Matrix Predict(const Matrix& inputs) const;

  // Mean per-sample cost over the batch. When `grad` is non-null it
  // receives the exact gradient w.r.t. params(). Dropout with the given
  // rate is applied after each LSTM layer's outputs when rate > 0 (needs
  // `rng`).
  double LossAndGradient(const Matrix& inputs, const Matrix& targets,
                         double dropout_rate, Rng* rng, Vector* grad) const;

  // Training-mode forward pass with fresh dropout masks.
  Matrix PredictWithDropout(const Matrix& inputs, double dropout_rate,
                            Rng& rng) const;

 private:
  LstmArchitecture arch_;
  Vector params_;
};

// --- MLP -------------------------------------------------------------------

enum class Activation { kTanh, kSigmoid };

struct MlpArchitecture {
  int input_dim = 50;
  std::vector<int> hidden = {50};  // 1 or 2 layers, each 10..150 wide
  int output_dim = 23;
  int context = 0;
  Activation activation = Activation::kTanh;

  void Validate() const;
};

class MlpNetwork {
 public:
  explicit MlpNetwork(const MlpArchitecture& arch);

  static size_t ParamCount(const MlpArchitecture& arch);
  void InitializeRandom(Rng& rng);

  const MlpArchitecture& arch() const { return arch_; }
  int steps() const { return arch_.context + 1; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Matrix Predict(const Matrix& inputs) const;
  // Same contract as LstmNetwork; the MLP has no dropout, so the rate and
  // rng are ignored.
  double LossAndGradient(const Matrix& inputs, const Matrix& targets,
                         double dropout_rate, Rng* rng, Vector* grad) const;

 private:
  MlpArchitecture arch_;
  Vector params_;
};

template <typename T>
concept RegressionNetwork =
    requires(T& net, const T& cnet, const Matrix& x, Rng* rng, Vector* g) {
      { cnet.Predict(x) } -> std::same_as<Matrix>;
      { cnet.LossAndGradient(x, x, 0.0, rng, g) } -> std::same_as<double>;
      { net.params() } -> std::same_as<Vector&>;
    };

// --- Loss, optimizer, training ---------------------------------------------

// sum_i 0.5 (pred_i - target_i)^2.
double MseLoss(std::span<const double> pred, std::span<const double> target);
// Mean over rows of MseLoss.
double BatchMseLoss(const Matrix& pred, const Matrix& target);
// Mean squared error over all entries, no 0.5 factor.
double MeanSquaredError(const Matrix& pred, const Matrix& target);

struct TrainConfig {
  double lr = 1e-3;
  double rms_rho = 0.9;
  double rms_eps = 1e-8;
  double dropout_rate = 0.25;
  int batch_size = 32;
  int epochs = 30;
  uint64_t rng_seed = 1;

  void Validate() const;
};

class RmsProp {
 public:
  RmsProp(size_t num_params, double lr, double rho, double eps);

  // cache <- rho cache + (1 - rho) g^2; theta <- theta - lr g / (sqrt(cache) + eps)
  void Step(Vector& params, const Vector& grad);
  const Vector& cache() const { return cache_; }

 private:
  Vector cache_;
  double lr_;
  double rho_;
  double eps_;
};

struct EpochStats {
  int epoch = 0;            // 0 is the initial network
  double train_loss = 0.0;  // eval-mode batch cost on the training set
  double val_loss = 0.0;
  double val_mse = 0.0;     // mean squared error, no 0.5 factor
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Mini-batch RMSProp training. Deterministic for a given rng_seed. On
// return the network holds the parameters with the lowest validation MSE.
TrainResult Train(LstmNetwork& net, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg);
TrainResult Train(MlpNetwork& net, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg);

// Eval-mode predictions for a whole dataset, in batches.
template <RegressionNetwork Net>
Matrix PredictAll(const Net& net, const Matrix& inputs) {
  constexpr Eigen::Index kChunk = 512;
  Matrix out;
  for (Eigen::Index start = 0; start < inputs.rows(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, inputs.rows() - start);
    Matrix part = net.Predict(inputs.middleRows(start, n));
    if (out.size() == 0) out.resize(inputs.rows(), part.cols());
    out.middleRows(start, n) = part;
  }
  return out;
}

}  // namespace evwf

#endif  // EVWF_NEURAL_H_
