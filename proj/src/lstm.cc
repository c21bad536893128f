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

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;
using MatrixMap = Eigen::Map<Matrix>;
using VectorMap = Eigen::Map<Vector>;
using RowArray =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Offsets {
  size_t layer[2];
  size_t head;
};

Offsets ComputeOffsets(const LstmArchitecture& a) {
  Offsets o;
  o.layer[0] = 0;
  o.layer[1] = LstmNetwork::LayerParamCount(a.input_dim, a.hidden1);
  o.head = o.layer[1] + LstmNetwork::LayerParamCount(a.hidden1, a.hidden2);
  return o;
}

template <typename Scalar>
struct LayerView {
  Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Matrix, Matrix>> w;
  Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Matrix, Matrix>> u;
  Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Vector, Vector>> b;
};

template <typename Scalar>
LayerView<Scalar> ViewLayer(Scalar* base, int in, int hidden) {
  const int g = 4 * hidden;
  Scalar* w = base;
  Scalar* u = w + static_cast<size_t>(g) * in;
  Scalar* b = u + static_cast<size_t>(g) * hidden;
  return {{w, g, in}, {u, g, hidden}, {b, g}};
}

Matrix Sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

struct LayerTrace {
  std::vector<Matrix> x;      // B x in
  std::vector<Matrix> gates;  // B x 4H, activated
  std::vector<Matrix> c;      // B x H
  std::vector<Matrix> tanh_c;
  std::vector<Matrix> h;
};

template <typename View>
void LayerForward(const View& p, std::vector<Matrix> xs, LayerTrace* tr) {
  const Eigen::Index hidden = p.u.cols();
  const Eigen::Index batch = xs.front().rows();
  Matrix h = Matrix::Zero(batch, hidden);
  Matrix c = Matrix::Zero(batch, hidden);
  tr->x = std::move(xs);
  for (const Matrix& x : tr->x) {
    Matrix z = x * p.w.transpose() + h * p.u.transpose();
    z.rowwise() += p.b.transpose();
    Matrix gates(batch, 4 * hidden);
    gates.leftCols(3 * hidden) = Sigmoid(z.leftCols(3 * hidden));
    gates.rightCols(hidden) = z.rightCols(hidden).array().tanh().matrix();
    c = gates.middleCols(hidden, hidden).cwiseProduct(c) +
        gates.leftCols(hidden).cwiseProduct(gates.rightCols(hidden));
    Matrix tc = c.array().tanh().matrix();
    h = gates.middleCols(2 * hidden, hidden).cwiseProduct(tc);
    tr->gates.push_back(std::move(gates));
    tr->c.push_back(c);
    tr->tanh_c.push_back(std::move(tc));
    tr->h.push_back(h);
  }
}

// Backpropagation through time for one layer. `dh_ext[t]` is the loss
// gradient arriving at h_t from above (empty matrix means zero).
// Accumulates parameter gradients into `g` and returns dL/dx_t.
template <typename View, typename GradView>
std::vector<Matrix> LayerBackward(const View& p, const LayerTrace& tr,
                                  const std::vector<Matrix>& dh_ext,
                                  GradView& g, bool need_dx) {
  const int steps = static_cast<int>(tr.h.size());
  const Eigen::Index hidden = p.u.cols();
  const Eigen::Index batch = tr.h.front().rows();
  std::vector<Matrix> dx(need_dx ? steps : 0);
  Matrix dh_next = Matrix::Zero(batch, hidden);
  Matrix dc_next = Matrix::Zero(batch, hidden);
  Matrix dz(batch, 4 * hidden);
  for (int t = steps - 1; t >= 0; --t) {
    Matrix dh = dh_next;
    if (dh_ext[t].size() != 0) dh += dh_ext[t];
    const Matrix& gates = tr.gates[t];
    const auto i = gates.leftCols(hidden).array();
    const auto f = gates.middleCols(hidden, hidden).array();
    const auto o = gates.middleCols(2 * hidden, hidden).array();
    const auto gg = gates.rightCols(hidden).array();
    const auto tc = tr.tanh_c[t].array();

    const RowArray dc =
        dc_next.array() + dh.array() * o * (1.0 - tc.square());
    RowArray c_prev = RowArray::Zero(batch, hidden);
    if (t > 0) c_prev = tr.c[t - 1].array();
    dz.leftCols(hidden) = (dc * gg * i * (1.0 - i)).matrix();
    dz.middleCols(hidden, hidden) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.middleCols(2 * hidden, hidden) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dz.rightCols(hidden) = (dc * i * (1.0 - gg.square())).matrix();
    dc_next = (dc * f).matrix();

    g.w.noalias() += dz.transpose() * tr.x[t];
    if (t > 0) g.u.noalias() += dz.transpose() * tr.h[t - 1];
    g.b.noalias() += dz.colwise().sum().transpose();
    if (need_dx) dx[t] = dz * p.w;
    dh_next = dz * p.u;
  }
  return dx;
}

Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  const double keep = 1.0 - rate;
  std::bernoulli_distribution draw(keep);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = draw(rng) ? 1.0 / keep : 0.0;
  }
  return m;
}

struct NetworkTrace {
  LayerTrace l1, l2;
  std::vector<Matrix> mask1;  // per step, empty when no dropout
  Matrix mask2;
  Matrix top;  // dropped-out final h of layer 2
};

}  // namespace

// --- architecture -----------------------------------------------------------

LstmArchitecture LstmArchitecture::FullScale(int context) {
  LstmArchitecture a;
  a.hidden1 = 250;
  a.hidden2 = 300;
  a.context = context;
  return a;
}

void LstmArchitecture::Validate() const {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1 || output_dim < 1 || context < 0) {
    throw std::invalid_argument("LstmArchitecture: dimensions must be positive");
  }
}

size_t LstmNetwork::LayerParamCount(int input_dim, int hidden) {
  const size_t h = hidden;
  return 4 * (h * input_dim + h * h + h);
}

size_t LstmNetwork::ParamCount(const LstmArchitecture& a) {
  return LayerParamCount(a.input_dim, a.hidden1) +
         LayerParamCount(a.hidden1, a.hidden2) +
         static_cast<size_t>(a.output_dim) * a.hidden2 + a.output_dim;
}

LstmNetwork::LstmNetwork(const LstmArchitecture& arch) : arch_(arch) {
  arch_.Validate();
  params_ = Vector::Zero(static_cast<Eigen::Index>(ParamCount(arch_)));
}

void LstmNetwork::InitializeRandom(Rng& rng) {
  const Offsets off = ComputeOffsets(arch_);
  const int ins[2] = {arch_.input_dim, arch_.hidden1};
  const int hs[2] = {arch_.hidden1, arch_.hidden2};
  for (int l = 0; l < 2; ++l) {
    auto v = ViewLayer(params_.data() + off.layer[l], ins[l], hs[l]);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double s = 1.0 / std::sqrt(static_cast<double>(ins[l] + hs[l]));
    for (Eigen::Index i = 0; i < v.w.size(); ++i) v.w.data()[i] = s * dist(rng);
    for (Eigen::Index i = 0; i < v.u.size(); ++i) v.u.data()[i] = s * dist(rng);
    v.b.setZero();
    v.b.segment(hs[l], hs[l]).setOnes();
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(arch_.hidden2));
  std::uniform_real_distribution<double> dist(-s, s);
  const size_t head_weights = static_cast<size_t>(arch_.output_dim) * arch_.hidden2;
  for (size_t i = 0; i < head_weights; ++i) params_[off.head + i] = dist(rng);
  params_.segment(off.head + head_weights, arch_.output_dim).setZero();
}

LstmLayerParams LstmNetwork::layer(int index) const {
  if (index < 0 || index > 1) throw std::out_of_range("LstmNetwork::layer");
  const Offsets off = ComputeOffsets(arch_);
  const int in = index == 0 ? arch_.input_dim : arch_.hidden1;
  const int h = index == 0 ? arch_.hidden1 : arch_.hidden2;
  auto v = ViewLayer(params_.data() + off.layer[index], in, h);
  return {v.w, v.u, v.b};
}

void LstmNetwork::set_layer(int index, const LstmLayerParams& p) {
  if (index < 0 || index > 1) throw std::out_of_range("LstmNetwork::set_layer");
  const Offsets off = ComputeOffsets(arch_);
  const int in = index == 0 ? arch_.input_dim : arch_.hidden1;
  const int h = index == 0 ? arch_.hidden1 : arch_.hidden2;
  if (p.w.rows() != 4 * h || p.w.cols() != in || p.u.rows() != 4 * h ||
      p.u.cols() != h || p.b.size() != 4 * h) {
    throw std::invalid_argument("LstmNetwork::set_layer: shape mismatch");
  }
  auto v = ViewLayer(params_.data() + off.layer[index], in, h);
  v.w = p.w;
  v.u = p.u;
  v.b = p.b;
}

LstmCellState LstmCellForward(const LstmLayerParams& p, const Vector& x,
                              const Vector& h_prev, const Vector& c_prev) {
  const Eigen::Index h = p.u.cols();
  if (p.w.rows() != 4 * h || p.u.rows() != 4 * h || p.b.size() != 4 * h ||
      x.size() != p.w.cols() || h_prev.size() != h || c_prev.size() != h) {
    throw std::invalid_argument("LstmCellForward: dimension mismatch");
  }
  const Vector z = p.w * x + p.u * h_prev + p.b;
  auto sigmoid = [](const auto& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix().eval();
  };
  const Vector i = sigmoid(z.segment(0, h));
  const Vector f = sigmoid(z.segment(h, h));
  const Vector o = sigmoid(z.segment(2 * h, h));
  const Vector g = z.segment(3 * h, h).array().tanh().matrix();
  LstmCellState s;
  s.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  s.h = o.cwiseProduct(s.c.array().tanh().matrix());
  return s;
}

// --- forward / backward -----------------------------------------------------

namespace {

Matrix ForwardLstm(const LstmArchitecture& a, const Vector& params,
                   const Matrix& inputs, double rate, Rng* rng,
                   NetworkTrace* tr) {
  const int steps = a.context + 1;
  if (inputs.cols() != static_cast<Eigen::Index>(steps) * a.input_dim) {
    throw std::invalid_argument(
        "LstmNetwork: expected " + std::to_string(steps) + " steps of " +
        std::to_string(a.input_dim) + " features, got " +
        std::to_string(inputs.cols()) + " columns");
  }
  const bool dropout = rate > 0.0;
  if (dropout && rng == nullptr) {
    throw std::invalid_argument("LstmNetwork: dropout needs an rng");
  }
  const Offsets off = ComputeOffsets(a);
  const auto l1 = ViewLayer(params.data() + off.layer[0], a.input_dim, a.hidden1);
  const auto l2 = ViewLayer(params.data() + off.layer[1], a.hidden1, a.hidden2);
  const ConstMatrixMap head_w(params.data() + off.head, a.output_dim, a.hidden2);
  const ConstVectorMap head_b(
      params.data() + off.head + static_cast<size_t>(a.output_dim) * a.hidden2,
      a.output_dim);

  const Eigen::Index batch = inputs.rows();
  std::vector<Matrix> xs(steps);
  for (int t = 0; t < steps; ++t) xs[t] = inputs.middleCols(t * a.input_dim, a.input_dim);

  LayerForward(l1, std::move(xs), &tr->l1);
  std::vector<Matrix> x2(steps);
  for (int t = 0; t < steps; ++t) {
    if (dropout) {
      tr->mask1.push_back(DropoutMask(batch, a.hidden1, rate, *rng));
      x2[t] = tr->l1.h[t].cwiseProduct(tr->mask1.back());
    } else {
      x2[t] = tr->l1.h[t];
    }
  }
  LayerForward(l2, std::move(x2), &tr->l2);
  tr->top = tr->l2.h.back();
  if (dropout) {
    tr->mask2 = DropoutMask(batch, a.hidden2, rate, *rng);
    tr->top = tr->top.cwiseProduct(tr->mask2);
  }
  Matrix y = tr->top * head_w.transpose();
  y.rowwise() += head_b.transpose();
  return y;
}

}  // namespace

Matrix LstmNetwork::Predict(const Matrix& inputs) const {
  NetworkTrace tr;
  return ForwardLstm(arch_, params_, inputs, 0.0, nullptr, &tr);
}

Matrix LstmNetwork::PredictWithDropout(const Matrix& inputs,
                                       double dropout_rate, Rng& rng) const {
  NetworkTrace tr;
  return ForwardLstm(arch_, params_, inputs, dropout_rate, &rng, &tr);
}

double LstmNetwork::LossAndGradient(const Matrix& inputs, const Matrix& targets,
                                    double dropout_rate, Rng* rng,
                                    Vector* grad) const {
  if (targets.rows() != inputs.rows() || targets.cols() != arch_.output_dim) {
    throw std::invalid_argument("LstmNetwork: target shape mismatch");
  }
  if (inputs.rows() == 0) throw std::invalid_argument("LstmNetwork: empty batch");
  NetworkTrace tr;
  const Matrix y = ForwardLstm(arch_, params_, inputs, dropout_rate, rng, &tr);
  const double batch = static_cast<double>(inputs.rows());
  const Matrix diff = y - targets;
  const double loss = 0.5 * diff.squaredNorm() / batch;
  if (grad == nullptr) return loss;

  const LstmArchitecture& a = arch_;
  const int steps = a.context + 1;
  grad->setZero(params_.size());
  const Offsets off = ComputeOffsets(a);
  const auto p1 = ViewLayer(params_.data() + off.layer[0], a.input_dim, a.hidden1);
  const auto p2 = ViewLayer(params_.data() + off.layer[1], a.hidden1, a.hidden2);
  auto g1 = ViewLayer(grad->data() + off.layer[0], a.input_dim, a.hidden1);
  auto g2 = ViewLayer(grad->data() + off.layer[1], a.hidden1, a.hidden2);
  const ConstMatrixMap head_w(params_.data() + off.head, a.output_dim, a.hidden2);
  MatrixMap g_head_w(grad->data() + off.head, a.output_dim, a.hidden2);
  VectorMap g_head_b(
      grad->data() + off.head + static_cast<size_t>(a.output_dim) * a.hidden2,
      a.output_dim);

  const Matrix dy = diff / batch;
  g_head_w.noalias() = dy.transpose() * tr.top;
  g_head_b = dy.colwise().sum().transpose();
  Matrix dtop = dy * head_w;
  if (tr.mask2.size() != 0) dtop = dtop.cwiseProduct(tr.mask2);

  std::vector<Matrix> dh2(steps);
  dh2.back() = std::move(dtop);
  std::vector<Matrix> dx2 = LayerBackward(p2, tr.l2, dh2, g2, true);
  if (!tr.mask1.empty()) {
    for (int t = 0; t < steps; ++t) dx2[t] = dx2[t].cwiseProduct(tr.mask1[t]);
  }
  LayerBackward(p1, tr.l1, dx2, g1, false);
  return loss;
}

}  // namespace evwf
