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

#include <cmath>
#include <stdexcept>
#include <string>

#include "evwf/neural.h"

namespace evwf {
namespace {

struct DenseLayer {
  Eigen::Map<const Matrix> w;
  Eigen::Map<const Vector> b;
};

std::vector<int> LayerSizes(const MlpArchitecture& a) {
  std::vector<int> sizes;
  sizes.push_back(a.input_dim * (a.context + 1));
  sizes.insert(sizes.end(), a.hidden.begin(), a.hidden.end());
  sizes.push_back(a.output_dim);
  return sizes;
}

Matrix Activate(const Matrix& z, Activation act) {
  if (act == Activation::kTanh) return z.array().tanh().matrix();
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

// Derivative expressed through the activation output.
Matrix ActivationSlope(const Matrix& a, Activation act) {
  if (act == Activation::kTanh) return (1.0 - a.array().square()).matrix();
  return (a.array() * (1.0 - a.array())).matrix();
}

}  // namespace

void MlpArchitecture::Validate() const {
  if (input_dim < 1 || output_dim < 1 || context < 0) {
    throw std::invalid_argument("MlpArchitecture: dimensions must be positive");
  }
  if (hidden.empty() || hidden.size() > 2) {
    throw std::invalid_argument("MlpArchitecture: 1 or 2 hidden layers required");
  }
  for (int h : hidden) {
    if (h < 10 || h > 150) {
      throw std::invalid_argument("MlpArchitecture: hidden width " +
                                  std::to_string(h) + " outside [10, 150]");
    }
  }
}

size_t MlpNetwork::ParamCount(const MlpArchitecture& arch) {
  const auto sizes = LayerSizes(arch);
  size_t n = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }
  return n;
}

MlpNetwork::MlpNetwork(const MlpArchitecture& arch) : arch_(arch) {
  arch_.Validate();
  params_ = Vector::Zero(static_cast<Eigen::Index>(ParamCount(arch_)));
}

void MlpNetwork::InitializeRandom(Rng& rng) {
  const auto sizes = LayerSizes(arch_);
  size_t off = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const size_t nw = static_cast<size_t>(sizes[l + 1]) * sizes[l];
    const double s = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> dist(-s, s);
    for (size_t i = 0; i < nw; ++i) params_[off + i] = dist(rng);
    off += nw;
    params_.segment(off, sizes[l + 1]).setZero();
    off += sizes[l + 1];
  }
}

namespace {

std::vector<DenseLayer> Layers(const MlpArchitecture& a, const Vector& params) {
  const auto sizes = LayerSizes(a);
  std::vector<DenseLayer> layers;
  size_t off = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double* w = params.data() + off;
    off += static_cast<size_t>(sizes[l + 1]) * sizes[l];
    const double* b = params.data() + off;
    off += sizes[l + 1];
    layers.push_back({Eigen::Map<const Matrix>(w, sizes[l + 1], sizes[l]),
                      Eigen::Map<const Vector>(b, sizes[l + 1])});
  }
  return layers;
}

// Returns activations a_0 (input) .. a_L (output).
std::vector<Matrix> ForwardMlp(const MlpArchitecture& a, const Vector& params,
                               const Matrix& inputs) {
  const auto layers = Layers(a, params);
  if (inputs.cols() != layers.front().w.cols()) {
    throw std::invalid_argument("MlpNetwork: expected " +
                                std::to_string(layers.front().w.cols()) +
                                " inputs, got " + std::to_string(inputs.cols()));
  }
  std::vector<Matrix> acts{inputs};
  for (size_t l = 0; l < layers.size(); ++l) {
    Matrix z = acts.back() * layers[l].w.transpose();
    z.rowwise() += layers[l].b.transpose();
    acts.push_back(l + 1 < layers.size() ? Activate(z, a.activation) : z);
  }
  return acts;
}

}  // namespace

Matrix MlpNetwork::Predict(const Matrix& inputs) const {
  return ForwardMlp(arch_, params_, inputs).back();
}

double MlpNetwork::LossAndGradient(const Matrix& inputs, const Matrix& targets,
                                   double /*dropout_rate*/, Rng* /*rng*/,
                                   Vector* grad) const {
  if (targets.rows() != inputs.rows() || targets.cols() != arch_.output_dim) {
    throw std::invalid_argument("MlpNetwork: target shape mismatch");
  }
  if (inputs.rows() == 0) throw std::invalid_argument("MlpNetwork: empty batch");
  const auto acts = ForwardMlp(arch_, params_, inputs);
  const double batch = static_cast<double>(inputs.rows());
  const Matrix diff = acts.back() - targets;
  const double loss = 0.5 * diff.squaredNorm() / batch;
  if (grad == nullptr) return loss;

  grad->setZero(params_.size());
  const auto layers = Layers(arch_, params_);
  std::vector<size_t> offsets;
  size_t off = 0;
  for (const auto& l : layers) {
    offsets.push_back(off);
    off += l.w.size() + l.b.size();
  }
  Matrix dz = diff / batch;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[l];
    Eigen::Map<Matrix> gw(grad->data() + offsets[l], layer.w.rows(), layer.w.cols());
    Eigen::Map<Vector> gb(grad->data() + offsets[l] + layer.w.size(), layer.b.size());
    gw.noalias() = dz.transpose() * acts[l];
    gb = dz.colwise().sum().transpose();
    if (l > 0) {
      dz = (dz * layer.w).cwiseProduct(ActivationSlope(acts[l], arch_.activation));
    }
  }
  return loss;
}

}  // namespace evwf
