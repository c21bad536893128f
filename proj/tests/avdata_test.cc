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
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "evwf/avdata.h"
#include "evwf/dsp.h"
#include "evwf/filterbank.h"
#include "evwf/synth.h"
#include "evwf/visual.h"

namespace evwf {
namespace {

// Orthonormal DCT-II straight from the double sum.
Matrix NaiveDct2(const Matrix& x) {
  const Eigen::Index h = x.rows(), w = x.cols();
  Matrix out(h, w);
  for (Eigen::Index u = 0; u < h; ++u) {
    for (Eigen::Index v = 0; v < w; ++v) {
      long double acc = 0.0L;
      for (Eigen::Index r = 0; r < h; ++r) {
        for (Eigen::Index c = 0; c < w; ++c) {
          acc += x(r, c) * std::cos(std::numbers::pi_v<long double> * (2 * r + 1) * u / (2 * h)) *
                 std::cos(std::numbers::pi_v<long double> * (2 * c + 1) * v / (2 * w));
        }
      }
      const double au = u == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
      const double av = v == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
      out(u, v) = au * av * static_cast<double>(acc);
    }
  }
  return out;
}

bool SameSamples(const AudioBuffer& a, const AudioBuffer& b) {
  return std::ranges::equal(a.samples(), b.samples());
}

Matrix RandomMatrix(Eigen::Index r, Eigen::Index c, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

TEST_CASE("dct of a constant image") {
  const Matrix c = Dct2(Matrix::Constant(24, 32, 0.5));
  CHECK(c(0, 0) == doctest::Approx(0.5 * std::sqrt(24.0 * 32.0)));
  Matrix rest = c;
  rest(0, 0) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dct matches the direct sum, inverts, and preserves energy") {
  for (auto [h, w] : {std::pair{24, 32}, std::pair{5, 7}, std::pair{1, 8}}) {
    const Matrix x = RandomMatrix(h, w, 10 + h);
    const Matrix c = Dct2(x);
    CHECK((c - NaiveDct2(x)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((InverseDct2(c) - x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(c.squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("zigzag order") {
  const std::vector<std::pair<int, int>> expect = {
      {0, 0}, {0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2}, {0, 3}, {1, 2},
      {2, 1}, {3, 0}, {3, 1}, {2, 2}, {1, 3}, {2, 3}, {3, 2}, {3, 3}};
  CHECK(ZigzagOrder(4, 4, 16) == expect);
  const auto z = ZigzagOrder(24, 32, 50);
  CHECK(z.size() == 50);
  CHECK(std::set(z.begin(), z.end()).size() == 50);
  CHECK_THROWS_AS(ZigzagOrder(2, 2, 5), std::invalid_argument);

  Matrix c(4, 4);
  for (int i = 0; i < 16; ++i) c.data()[i] = i;
  const Vector v = ZigzagSelect(c, 6);
  const std::vector<double> want = {0, 1, 4, 8, 5, 2};
  for (int i = 0; i < 6; ++i) CHECK(v[i] == want[i]);

  const VisualFrame frame(32, 24, std::vector<double>(32 * 24, 0.25));
  const Vector f = VisualFeatures(frame);
  CHECK(f.size() == kDctFeatureDim);
  CHECK(f[0] == doctest::Approx(0.25 * std::sqrt(768.0)));
}

TEST_CASE("triplicate upsampling") {
  Matrix v(2, 3);
  v << 1, 2, 3, 4, 5, 6;
  const Matrix u = UpsampleTriplicate(v);
  REQUIRE(u.rows() == 6);
  for (int r = 0; r < 6; ++r) CHECK(u.row(r) == v.row(r / 3));
  CHECK_THROWS_AS(UpsampleTriplicate(Matrix(0, 3)), std::invalid_argument);
}

AlignedUtterance Ramp(int frames, int dim) {
  AlignedUtterance u;
  u.id = "r";
  u.visual.resize(frames, dim);
  u.audio.frames.resize(frames, 2);
  for (int t = 0; t < frames; ++t) {
    u.visual.row(t).setConstant(t);
    u.audio.frames.row(t).setConstant(100 + t);
  }
  return u;
}

TEST_CASE("context windows") {
  const AlignedUtterance u = Ramp(6, 2);
  const auto w = BuildContextWindows(u, 2);
  REQUIRE(w.size() == 4);
  for (size_t i = 0; i < w.size(); ++i) {
    const int t = static_cast<int>(i) + 2;
    CHECK(w[i].input(0, 0) == t - 2);
    CHECK(w[i].input(2, 1) == t);
    CHECK(w[i].target[0] == 100 + t);
  }
  CHECK_THROWS_AS(BuildContextWindows(u, 6), std::invalid_argument);
  CHECK(BuildContextWindows(u, 5).size() == 1);

  const std::vector<AlignedUtterance> both = {u, Ramp(4, 2)};
  const Dataset ds = WindowsToDataset(both, 1);
  CHECK(ds.size() == 5 + 3);
  CHECK(ds.steps == 2);
  CHECK(ds.inputs.row(0) == (Vector(4) << 0, 0, 1, 1).finished().transpose());
  CHECK(ds.targets(5, 0) == 101);

  const Matrix cw = CausalWindows(u.visual, 2);
  CHECK(cw.rows() == 6);
  CHECK(cw.row(0) == Matrix::Zero(1, 6));
  CHECK(cw.row(1) == (Vector(6) << 0, 0, 0, 0, 1, 1).finished().transpose());
  CHECK(cw.row(5) == (Vector(6) << 3, 3, 4, 4, 5, 5).finished().transpose());

  AlignedUtterance bad = u;
  bad.audio.frames.conservativeResize(5, 2);
  CHECK_THROWS_AS(bad.Validate(), AlignmentError);
}

TEST_CASE("mixing hits the requested snr") {
  const SynthUtterance u = SynthesizeUtterance(SynthCorpusConfig{}, 3);
  for (auto label : {NoiseLabel::kWhite, NoiseLabel::kCafe, NoiseLabel::kStreet,
                     NoiseLabel::kBus, NoiseLabel::kPedestrian}) {
    const AudioBuffer noise = GenerateNoise(label, u.clean.size() / 2, 50000.0, 4);
    for (double snr : {-12.0, -6.0, -3.0, 0.0, 3.0, 6.0, 12.0}) {
      const AudioBuffer mixed = MixAtSnr(u.clean, noise, {snr, label});
      CHECK(std::abs(MeasureSnrDb(u.clean, mixed) - snr) < 0.01);
    }
  }
  // Equal powers at -6 dB: the noise is scaled by sqrt(10^0.6).
  const AudioBuffer clean(std::vector<double>{1.0, -1.0, 1.0, -1.0});
  const AudioBuffer noise(std::vector<double>{0.5, 0.5, -0.5, 0.5});
  const AudioBuffer scaled(std::vector<double>{1.0, 1.0, -1.0, 1.0});
  const AudioBuffer mixed = MixAtSnr(clean, scaled, {-6.0, NoiseLabel::kWhite});
  for (size_t i = 0; i < 4; ++i) {
    CHECK(mixed[i] - clean[i] == doctest::Approx(scaled[i] * std::sqrt(std::pow(10.0, 0.6))));
  }
  CHECK_THROWS_AS(MixAtSnr(clean, AudioBuffer(std::vector<double>(4, 0.0)), {0.0}),
                  std::invalid_argument);
  CHECK(SameSamples(GenerateNoise(NoiseLabel::kCafe, 1000, 50000.0, 1),
                    GenerateNoise(NoiseLabel::kCafe, 1000, 50000.0, 1)));
  CHECK_THROWS_AS(GenerateNoise(NoiseLabel::kFile, 10, 50000.0, 1), std::invalid_argument);
  CHECK(ParseNoiseLabel(NoiseLabelName(NoiseLabel::kBus)) == NoiseLabel::kBus);
}

TEST_CASE("split counts") {
  CHECK(SplitCounts(989, SplitRatios::TableLayout()) == std::vector<int>{692, 99, 198});
  CHECK(SplitCounts(100, SplitRatios::TextLayout()) == std::vector<int>{80, 10, 10});
  for (int n = 1; n < 300; ++n) {
    const auto c = SplitCounts(n, SplitRatios{});
    CHECK(c[0] + c[1] + c[2] == n);
    CHECK(std::abs(c[0] - 0.7 * n) < 1.0);
    CHECK(std::abs(c[1] - 0.1 * n) < 1.0);
    CHECK(std::abs(c[2] - 0.2 * n) < 1.0);
  }
  CHECK_THROWS_AS(SplitCounts(10, SplitRatios{0.5, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("stratified split") {
  std::vector<std::string> speakers;
  for (int i = 0; i < 989; ++i) speakers.push_back("s" + std::to_string(i % 5));
  const auto labels = SplitDataset(speakers, SplitRatios{}, 7);
  REQUIRE(labels.size() == speakers.size());
  std::map<std::string, std::array<int, 3>> per;
  for (size_t i = 0; i < labels.size(); ++i) ++per[speakers[i]][static_cast<int>(labels[i])];
  for (const auto& [s, c] : per) {
    const auto want = SplitCounts(c[0] + c[1] + c[2], SplitRatios{});
    CHECK(c[0] == want[0]);
    CHECK(c[1] == want[1]);
    CHECK(c[2] == want[2]);
  }
  CHECK(SplitDataset(speakers, SplitRatios{}, 7) == labels);
  CHECK(SplitDataset(speakers, SplitRatios{}, 8) != labels);
  CHECK_THROWS_AS(SplitDataset(std::vector<std::string>{}, SplitRatios{}, 1), std::invalid_argument);
}

TEST_CASE("avfb codec") {
  Matrix m(3, 2);
  m << 1.5, -2.25, 1e-3, 3.0e5, -23.025850929940457, 0.0;
  const auto bytes = EncodeAvfb(m);
  CHECK(bytes.size() == 12 + 6 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "AVFB");
  CHECK(bytes[4] == 3);
  CHECK(bytes[8] == 2);
  const Matrix back = DecodeAvfb(bytes);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    CHECK(back.data()[i] == static_cast<double>(static_cast<float>(m.data()[i])));
  }
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(DecodeAvfb(truncated), DataError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(DecodeAvfb(magic), DataError);
}

TEST_CASE("pgm codec") {
  using namespace std::string_literals;
  std::vector<double> px(6 * 4);
  for (size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i) / (px.size() - 1);
  const VisualFrame img(6, 4, px);
  const auto bytes = EncodePgm(img);
  const VisualFrame back = DecodePgm(bytes);
  REQUIRE(back.width() == 6);
  REQUIRE(back.height() == 4);
  for (size_t i = 0; i < px.size(); ++i) {
    CHECK(std::abs(back.pixels()[i] - px[i]) <= 0.5 / 255 + 1e-12);
  }
  CHECK(EncodePgm(back) == bytes);

  const std::string with_comment = "P5\n# lips\n2 1\n255\n\x00\xff"s;
  const VisualFrame c = DecodePgm(std::span(reinterpret_cast<const uint8_t*>(with_comment.data()),
                                            with_comment.size()));
  CHECK(c.pixels()[0] == 0.0);
  CHECK(c.pixels()[1] == 1.0);
  const std::string p2 = "P2\n2 1\n255\n0 1\n";
  CHECK_THROWS_AS(DecodePgm(std::span(reinterpret_cast<const uint8_t*>(p2.data()), p2.size())),
                  DataError);
  const std::string wide = "P5\n2 1\n65535\n\0\0\0\0"s;
  CHECK_THROWS_AS(DecodePgm(std::span(reinterpret_cast<const uint8_t*>(wide.data()), wide.size())),
                  DataError);
  const std::string short_px = "P5\n4 1\n255\n\x01";
  CHECK_THROWS_AS(
      DecodePgm(std::span(reinterpret_cast<const uint8_t*>(short_px.data()), short_px.size())),
      DataError);
}

TEST_CASE("synthetic utterances are deterministic and rate aligned") {
  SynthCorpusConfig cfg;
  const SynthUtterance a = SynthesizeUtterance(cfg, 12);
  const SynthUtterance b = SynthesizeUtterance(cfg, 12);
  CHECK(SameSamples(a.clean, b.clean));
  CHECK(a.trajectory == b.trajectory);
  CHECK(a.speaker == "s2");
  CHECK(a.frames.size() == static_cast<size_t>(cfg.visual_frames));
  CHECK(a.trajectory.rows() == 3 * cfg.visual_frames);
  CHECK(a.clean.size() == SynthAudioLength(cfg.visual_frames, cfg.stft));
  CHECK(NumFrames(a.clean.size(), cfg.stft) == 3 * cfg.visual_frames);

  const auto fb = MelFilterbank::Build(cfg.sample_rate, cfg.stft.dft_size);
  const AlignedUtterance al = AlignUtterance(a, fb, cfg.stft);
  CHECK(al.visual.rows() == al.audio.frames.rows());
  CHECK(al.visual.cols() == kDctFeatureDim);
  CHECK(al.audio.frames.cols() == 23);

  cfg.seed = 2;
  CHECK_FALSE(SameSamples(SynthesizeUtterance(cfg, 12).clean, a.clean));
}

TEST_CASE("audio is determined by the trajectory up to the noise floor") {
  SynthCorpusConfig cfg;
  const auto fb = MelFilterbank::Build(cfg.sample_rate, cfg.stft.dft_size);
  const SynthUtterance u = SynthesizeUtterance(cfg, 5);
  const SynthUtterance other = SynthesizeUtterance(cfg, 10);  // same speaker
  auto features = [&](const Matrix& traj, uint64_t seed) {
    return ExtractLogFb(RenderCleanAudio(traj, u.traits, cfg, seed), cfg.stft, fb).frames;
  };
  const Matrix f1 = features(u.trajectory, 1);
  const Matrix f2 = features(u.trajectory, 2);
  const Matrix f3 = features(other.trajectory, 1);
  const double same = (f1 - f2).squaredNorm() / f1.size();
  const double different = (f1 - f3).squaredNorm() / f1.size();
  MESSAGE("noise-seed mse " << same << ", other-trajectory mse " << different);
  CHECK(same < 0.6);
  CHECK(same < 0.1 * different);
}

}  // namespace
}  // namespace evwf
