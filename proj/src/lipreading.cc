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

#include "evwf/lipreading.h"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "io_util.h"

namespace evwf {
namespace {

using nlohmann::json;
constexpr uint32_t kModelVersion = 1;

std::vector<double> ToStd(const Eigen::RowVectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::RowVectorXd FromJson(const json& j, const char* key, int expected) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (static_cast<int>(v.size()) != expected) {
    throw DataError(std::string("model: '") + key + "' has wrong length");
  }
  Eigen::RowVectorXd out(expected);
  for (int i = 0; i < expected; ++i) {
    if (!std::isfinite(v[i])) throw DataError(std::string("model: non-finite '") + key + "'");
    out(i) = v[i];
  }
  return out;
}

Matrix StackVisual(std::span<const AlignedUtterance> utts) {
  Eigen::Index rows = 0;
  for (const auto& u : utts) rows += u.visual.rows();
  Matrix out(rows, utts.empty() ? 0 : utts.front().visual.cols());
  rows = 0;
  for (const auto& u : utts) {
    out.middleRows(rows, u.visual.rows()) = u.visual;
    rows += u.visual.rows();
  }
  return out;
}

Matrix StackAudio(std::span<const AlignedUtterance> utts) {
  Eigen::Index rows = 0;
  for (const auto& u : utts) rows += u.audio.frames.rows();
  Matrix out(rows, utts.empty() ? 0 : utts.front().audio.frames.cols());
  rows = 0;
  for (const auto& u : utts) {
    out.middleRows(rows, u.audio.frames.rows()) = u.audio.frames;
    rows += u.audio.frames.rows();
  }
  return out;
}

}  // namespace

FeatureScaler FeatureScaler::Fit(const Matrix& rows) {
  if (rows.rows() == 0) throw std::invalid_argument("FeatureScaler::Fit: no rows");
  FeatureScaler s;
  s.mean = rows.colwise().mean();
  s.scale = (rows.rowwise() - s.mean).array().square().colwise().mean().sqrt().matrix();
  for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
    if (s.scale(c) < 1e-8) s.scale(c) = 1.0;
  }
  return s;
}

Matrix FeatureScaler::Apply(const Matrix& m) const {
  if (dim() == 0 || m.cols() % dim() != 0) {
    throw std::invalid_argument("FeatureScaler::Apply: width mismatch");
  }
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index b = 0; b < m.cols() / dim(); ++b) {
    out.middleCols(b * dim(), dim()) =
        ((m.middleCols(b * dim(), dim()).rowwise() - mean).array().rowwise() /
         scale.array())
            .matrix();
  }
  return out;
}

Matrix FeatureScaler::Invert(const Matrix& m) const {
  if (m.cols() != dim()) throw std::invalid_argument("FeatureScaler::Invert: width mismatch");
  return ((m.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "lstm") return ModelKind::kLstm;
  if (name == "mlp") return ModelKind::kMlp;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected lstm|mlp)");
}

std::string ModelKindName(ModelKind kind) { return kind == ModelKind::kLstm ? "lstm" : "mlp"; }

LipReadingModel::LipReadingModel(Network net, FeatureScaler visual, FeatureScaler audio)
    : net_(std::move(net)), visual_(std::move(visual)), audio_(std::move(audio)) {
  const auto [in, out] = std::visit(
      [](const auto& n) { return std::pair{n.arch().input_dim, n.arch().output_dim}; }, net_);
  if (visual_.dim() != in || audio_.dim() != out) {
    throw std::invalid_argument("LipReadingModel: scaler widths do not match the network");
  }
}

ModelKind LipReadingModel::kind() const {
  return std::holds_alternative<LstmNetwork>(net_) ? ModelKind::kLstm : ModelKind::kMlp;
}

int LipReadingModel::context() const {
  return std::visit([](const auto& n) { return n.arch().context; }, net_);
}

LogFbFeatures LipReadingModel::PredictFeatures(const Matrix& visual) const {
  if (visual.cols() != visual_.dim()) {
    throw std::invalid_argument("PredictFeatures: visual width mismatch");
  }
  const Matrix inputs = visual_.Apply(CausalWindows(visual, context()));
  const Matrix pred = std::visit([&](const auto& n) { return PredictAll(n, inputs); }, net_);
  LogFbFeatures f;
  f.frames = audio_.Invert(pred);
  if (!f.frames.allFinite()) throw NumericError("PredictFeatures: non-finite prediction");
  return f;
}

double LipReadingModel::EvaluateMse(std::span<const AlignedUtterance> utts,
                                    int first_frame) const {
  if (utts.empty()) throw DataError("EvaluateMse: no utterances");
  const Eigen::Index start = first_frame < 0 ? context() : first_frame;
  double acc = 0.0;
  Eigen::Index count = 0;
  for (const auto& u : utts) {
    if (u.audio.frames.rows() <= start) continue;
    const Matrix diff = PredictFeatures(u.visual).frames - u.audio.frames;
    const Eigen::Index rows = diff.rows() - start;
    acc += diff.bottomRows(rows).squaredNorm();
    count += rows * diff.cols();
  }
  if (count == 0) throw DataError("EvaluateMse: no frames at or after frame " + std::to_string(start));
  return acc / static_cast<double>(count);
}

std::vector<uint8_t> LipReadingModel::Encode() const {
  json d;
  d["type"] = ModelKindName(kind());
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        const auto& a = n.arch();
        d["input_dim"] = a.input_dim;
        d["output_dim"] = a.output_dim;
        d["context"] = a.context;
        if constexpr (std::is_same_v<T, LstmNetwork>) {
          d["hidden1"] = a.hidden1;
          d["hidden2"] = a.hidden2;
        } else {
          d["hidden"] = a.hidden;
          d["activation"] = a.activation == Activation::kTanh ? "tanh" : "sigmoid";
        }
        d["num_params"] = n.params().size();
      },
      net_);
  d["visual_mean"] = ToStd(visual_.mean);
  d["visual_scale"] = ToStd(visual_.scale);
  d["audio_mean"] = ToStd(audio_.mean);
  d["audio_scale"] = ToStd(audio_.scale);
  const std::string text = d.dump();

  internal::ByteWriter w;
  w.PutString("AVNN");
  w.Put<uint32_t>(kModelVersion);
  w.Put<uint32_t>(static_cast<uint32_t>(text.size()));
  w.PutString(text);
  const Vector& p = std::visit([](const auto& n) -> const Vector& { return n.params(); }, net_);
  for (Eigen::Index i = 0; i < p.size(); ++i) w.Put<double>(p(i));
  return w.Take();
}

LipReadingModel LipReadingModel::Decode(std::span<const uint8_t> bytes) {
  internal::ByteReader r(bytes, "model");
  if (r.GetString(4) != "AVNN") throw DataError("model: bad magic");
  const uint32_t version = r.Get<uint32_t>();
  if (version != kModelVersion) {
    throw DataError("model: unsupported version " + std::to_string(version));
  }
  const uint32_t len = r.Get<uint32_t>();
  json d;
  try {
    d = json::parse(r.GetString(len));
    const std::string type = d.at("type").get<std::string>();
    const int in = d.at("input_dim").get<int>();
    const int out = d.at("output_dim").get<int>();
    const int context = d.at("context").get<int>();
    const size_t num_params = d.at("num_params").get<size_t>();
    FeatureScaler vs{FromJson(d, "visual_mean", in), FromJson(d, "visual_scale", in)};
    FeatureScaler as{FromJson(d, "audio_mean", out), FromJson(d, "audio_scale", out)};
    auto read_params = [&](Vector& p) {
      if (static_cast<size_t>(p.size()) != num_params) {
        throw DataError("model: parameter count does not match the architecture");
      }
      if (r.remaining() != num_params * sizeof(double)) {
        throw DataError("model: parameter block has wrong size");
      }
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = r.Get<double>();
        if (!std::isfinite(p(i))) throw DataError("model: non-finite parameter");
      }
    };
    if (type == "lstm") {
      LstmArchitecture a{in, d.at("hidden1").get<int>(), d.at("hidden2").get<int>(), out,
                         context};
      a.Validate();
      LstmNetwork net(a);
      read_params(net.params());
      return LipReadingModel(std::move(net), std::move(vs), std::move(as));
    }
    if (type == "mlp") {
      MlpArchitecture a;
      a.input_dim = in;
      a.output_dim = out;
      a.context = context;
      a.hidden = d.at("hidden").get<std::vector<int>>();
      const std::string act = d.at("activation").get<std::string>();
      if (act != "tanh" && act != "sigmoid") throw DataError("model: unknown activation");
      a.activation = act == "tanh" ? Activation::kTanh : Activation::kSigmoid;
      a.Validate();
      MlpNetwork net(a);
      read_params(net.params());
      return LipReadingModel(std::move(net), std::move(vs), std::move(as));
    }
    throw DataError("model: unknown type '" + type + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("model: bad descriptor: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void LipReadingModel::Save(const std::filesystem::path& path) const {
  internal::WriteFileBytes(path, Encode());
}

LipReadingModel LipReadingModel::Load(const std::filesystem::path& path) {
  return Decode(internal::ReadFileBytes(path));
}

LipReadingFit TrainLipReading(const LipReadingSpec& spec,
                              std::span<const AlignedUtterance> train,
                              std::span<const AlignedUtterance> val,
                              const TrainConfig& cfg) {
  if (train.empty()) throw DataError("train split is empty");
  if (val.empty()) throw DataError("validation split is empty");
  cfg.Validate();
  FeatureScaler vs = FeatureScaler::Fit(StackVisual(train));
  FeatureScaler as = FeatureScaler::Fit(StackAudio(train));
  auto prepare = [&](std::span<const AlignedUtterance> utts) {
    Dataset ds = WindowsToDataset(utts, spec.context);
    ds.inputs = vs.Apply(ds.inputs);
    ds.targets = as.Apply(ds.targets);
    return ds;
  };
  const Dataset dtr = prepare(train);
  const Dataset dva = prepare(val);
  if (dtr.size() == 0 || dva.size() == 0) {
    throw DataError("no context windows: utterances shorter than the context");
  }
  Rng init_rng(cfg.rng_seed ^ 0x5DEECE66Dull);
  const int in = vs.dim();
  const int out = as.dim();
  if (spec.kind == ModelKind::kLstm) {
    LstmArchitecture a{in, spec.hidden1, spec.hidden2, out, spec.context};
    LstmNetwork net(a);
    net.InitializeRandom(init_rng);
    TrainResult res = Train(net, dtr, dva, cfg);
    return {LipReadingModel(std::move(net), std::move(vs), std::move(as)), std::move(res)};
  }
  MlpArchitecture a;
  a.input_dim = in;
  a.output_dim = out;
  a.context = spec.context;
  a.hidden = spec.mlp_hidden;
  a.activation = spec.mlp_activation;
  MlpNetwork net(a);
  net.InitializeRandom(init_rng);
  TrainResult res = Train(net, dtr, dva, cfg);
  return {LipReadingModel(std::move(net), std::move(vs), std::move(as)), std::move(res)};
}

}  // namespace evwf
