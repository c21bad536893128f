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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "evwf/neural.h"

namespace evwf {

void Dataset::Validate() const {
  if (inputs.rows() != targets.rows()) {
    throw std::invalid_argument("Dataset: input/target row mismatch");
  }
  if (steps < 1 || feature_dim < 1 ||
      inputs.cols() != static_cast<Eigen::Index>(steps) * feature_dim) {
    throw std::invalid_argument("Dataset: input width != steps * feature_dim");
  }
}

Dataset Subset(const Dataset& ds, std::span<const Eigen::Index> indices) {
  Dataset out;
  out.steps = ds.steps;
  out.feature_dim = ds.feature_dim;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), ds.inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(indices.size()), ds.targets.cols());
  for (size_t i = 0; i < indices.size(); ++i) {
    out.inputs.row(i) = ds.inputs.row(indices[i]);
    out.targets.row(i) = ds.targets.row(indices[i]);
  }
  return out;
}

double MseLoss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("MseLoss: length mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += 0.5 * d * d;
  }
  return acc;
}

double BatchMseLoss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("BatchMseLoss: shape mismatch");
  }
  if (pred.rows() == 0) return 0.0;
  return 0.5 * (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

double MeanSquaredError(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("MeanSquaredError: shape mismatch");
  }
  if (pred.size() == 0) return 0.0;
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

void TrainConfig::Validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("TrainConfig: lr must be >= 0");
  if (!(rms_rho >= 0.0 && rms_rho < 1.0)) {
    throw std::invalid_argument("TrainConfig: rms_rho must be in [0, 1)");
  }
  if (!(rms_eps >= 0.0)) throw std::invalid_argument("TrainConfig: rms_eps < 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("TrainConfig: dropout_rate must be in [0, 1)");
  }
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size < 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs < 0");
}

RmsProp::RmsProp(size_t num_params, double lr, double rho, double eps)
    : cache_(Vector::Zero(static_cast<Eigen::Index>(num_params))),
      lr_(lr),
      rho_(rho),
      eps_(eps) {}

void RmsProp::Step(Vector& params, const Vector& grad) {
  if (params.size() != cache_.size() || grad.size() != cache_.size()) {
    throw std::invalid_argument("RmsProp::Step: shape mismatch");
  }
  cache_ = rho_ * cache_ + (1.0 - rho_) * grad.cwiseAbs2();
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    if (grad[i] == 0.0) continue;
    params[i] -= lr_ * grad[i] / (std::sqrt(cache_[i]) + eps_);
  }
}

namespace {

template <RegressionNetwork Net>
EpochStats Evaluate(const Net& net, const Dataset& train, const Dataset& val,
                    int epoch) {
  EpochStats s;
  s.epoch = epoch;
  s.train_loss = BatchMseLoss(PredictAll(net, train.inputs), train.targets);
  const Matrix val_pred = PredictAll(net, val.inputs);
  s.val_loss = BatchMseLoss(val_pred, val.targets);
  s.val_mse = MeanSquaredError(val_pred, val.targets);
  if (!std::isfinite(s.train_loss) || !std::isfinite(s.val_loss)) {
    throw NumericError("training diverged at epoch " + std::to_string(epoch));
  }
  return s;
}

template <RegressionNetwork Net>
TrainResult TrainImpl(Net& net, const Dataset& train, const Dataset& val,
                      const TrainConfig& cfg) {
  cfg.Validate();
  train.Validate();
  val.Validate();
  if (train.size() == 0 || val.size() == 0) {
    throw std::invalid_argument("Train: empty training or validation set");
  }
  Rng rng(cfg.rng_seed);
  RmsProp opt(static_cast<size_t>(net.params().size()), cfg.lr, cfg.rms_rho,
              cfg.rms_eps);
  TrainResult result;
  result.history.push_back(Evaluate(net, train, val, 0));
  result.best_val_mse = result.history.back().val_mse;
  Vector best = net.params();

  std::vector<Eigen::Index> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Vector grad;
  Matrix xb, yb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t n = std::min<size_t>(cfg.batch_size, order.size() - start);
      xb.resize(static_cast<Eigen::Index>(n), train.inputs.cols());
      yb.resize(static_cast<Eigen::Index>(n), train.targets.cols());
      for (size_t i = 0; i < n; ++i) {
        xb.row(i) = train.inputs.row(order[start + i]);
        yb.row(i) = train.targets.row(order[start + i]);
      }
      net.LossAndGradient(xb, yb, cfg.dropout_rate, &rng, &grad);
      opt.Step(net.params(), grad);
    }
    result.history.push_back(Evaluate(net, train, val, epoch));
    if (result.history.back().val_mse < result.best_val_mse) {
      result.best_val_mse = result.history.back().val_mse;
      result.best_epoch = epoch;
      best = net.params();
    }
  }
  net.params() = best;
  return result;
}

}  // namespace

TrainResult Train(LstmNetwork& net, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg) {
  return TrainImpl(net, train, val, cfg);
}

TrainResult Train(MlpNetwork& net, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg) {
  return TrainImpl(net, train, val, cfg);
}

}  // namespace evwf
