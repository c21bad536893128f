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
#include <random>
#include <vector>

#include <doctest.h>

#include "evwf/avdata.h"
#include "evwf/baselines.h"
#include "evwf/dsp.h"
#include "evwf/eval.h"
#include "evwf/synth.h"

namespace evwf {
namespace {

// E1(v) = int_v^inf e^-t / t dt = int_0^inf exp(-v e^s) ds, by composite
// Simpson in long double on the substituted integral.
double E1Quadrature(double v) {
  const long double upper = std::log(60.0L / v + 1.0L) + 1.0L;
  const int n = 400000;
  const long double h = upper / n;
  long double acc = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const long double s = i * h;
    const long double f = std::exp(-static_cast<long double>(v) * std::exp(s));
    acc += f * ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2));
  }
  return static_cast<double>(acc * h / 3.0L);
}

AudioBuffer WhiteNoise(size_t n, uint64_t seed, double sd = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return AudioBuffer(std::move(x));
}

double SpectralEnergy(const AudioBuffer& a, const StftConfig& cfg) {
  return SplitMagPhase(Stft(a, cfg)).first.frames.squaredNorm();
}

TEST_CASE("initial noise estimate") {
  Matrix m = Matrix::Constant(10, 5, 3.0);
  const auto est = EstimateNoiseInitial(MagnitudeSpectrogram{m}, 4);
  CHECK(est.frames_used == 4);
  CHECK(est.psd.isApprox(Vector::Constant(5, 9.0)));
  CHECK_THROWS_AS(EstimateNoiseInitial(MagnitudeSpectrogram{m}, 0), std::invalid_argument);
  CHECK_THROWS_AS(EstimateNoiseInitial(MagnitudeSpectrogram{m}, 11), std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Matrix r(8, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = u(rng);
  const auto e = EstimateNoiseInitial(MagnitudeSpectrogram{r}, 6);
  for (int k = 0; k < 6; ++k) {
    double acc = 0.0;
    for (int t = 0; t < 6; ++t) acc += r(t, k) * r(t, k);
    CHECK(e.psd[k] == doctest::Approx(acc / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("spectral subtraction bounds") {
  StftConfig stft;
  const AudioBuffer noise = WhiteNoise(50000, 3);
  auto [mag, phase] = SplitMagPhase(Stft(noise, stft));
  const Matrix in_power = mag.frames.array().square().matrix();
  for (double a : {1.0, 2.0, 4.0}) {
    SsConfig cfg;
    cfg.oversubtraction = a;
    const Matrix out_power =
        SpectralSubtractMagnitude(mag, cfg).frames.array().square().matrix();
    CHECK(((out_power - cfg.floor * in_power).array() >= -1e-15).all());
    CHECK(((out_power - in_power).array() <= 1e-15).all());
  }
}

TEST_CASE("spectral subtraction on stationary noise") {
  StftConfig stft;
  const AudioBuffer noise = WhiteNoise(100000, 4);
  const double in_energy = SpectralEnergy(noise, stft);

  SsConfig strong;
  strong.oversubtraction = 4.0;
  const double strong_ratio = SpectralEnergy(SpectralSubtract(noise, strong, stft), stft) / in_energy;
  CHECK(strong_ratio <= strong.floor + 0.10);

  // With a = 1 roughly e^-1 of a white periodogram's energy survives.
  const double unit_ratio = SpectralEnergy(SpectralSubtract(noise, SsConfig{}, stft), stft) / in_energy;
  CHECK(unit_ratio > 0.2);
  CHECK(unit_ratio < 0.5);

  SsConfig none;
  none.oversubtraction = 0.0;
  const AudioBuffer same = SpectralSubtract(noise, none, stft);
  auto [m, p] = SplitMagPhase(Stft(noise, stft));
  const AudioBuffer rt = IstftOverlapAdd(m, p, stft);
  double err = 0.0;
  for (size_t i = 0; i < rt.size(); ++i) err = std::max(err, std::abs(same[i] - rt[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("baselines do not hurt a 0 dB synthetic mixture") {
  StftConfig stft;
  const SynthUtterance u = SynthesizeUtterance(SynthCorpusConfig{}, 1);
  const AudioBuffer noisy =
      MixAtSnr(u.clean, GenerateNoise(NoiseLabel::kWhite, u.clean.size(), 50000.0, 5),
               {0.0, NoiseLabel::kWhite});
  const double base = SegmentalSnr(u.clean, noisy);
  CHECK(SegmentalSnr(u.clean, SpectralSubtract(noisy, SsConfig{}, stft)) >= base);
  CHECK(SegmentalSnr(u.clean, LogMmse(noisy, LogMmseConfig{}, stft)) >= base);
}

TEST_CASE("exponential integral") {
  CHECK(ExpIntegralE1(1.0) == doctest::Approx(0.21938393439552).epsilon(1e-12));
  CHECK(std::abs(ExpIntegralE1(1.0) - E1Quadrature(1.0)) < 1e-8);
  for (double v : {1e-4, 1e-3, 0.01, 0.1, 0.5, 0.99, 1.0, 1.01, 2.0, 5.0, 10.0, 25.0, 50.0}) {
    CHECK_MESSAGE(std::abs(ExpIntegralE1(v) - E1Quadrature(v)) < 1e-8, "v = " << v);
  }
  // Continuity across the series/continued-fraction switch.
  CHECK(ExpIntegralE1(1.0 - 1e-12) == doctest::Approx(ExpIntegralE1(1.0)).epsilon(1e-10));
  CHECK_THROWS_AS(ExpIntegralE1(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ExpIntegralE1(-1.0), std::invalid_argument);
}

TEST_CASE("log-MMSE gain") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int i = 0; i < 5000; ++i) {
    const double xi = std::pow(10.0, u(rng) / 10.0);
    const double gamma = std::pow(10.0, u(rng) / 10.0);
    const double g = LogMmseGain(xi, gamma);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
  }
  CHECK(LogMmseGain(1e12, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(LogMmseGain(INFINITY, 1.0) == 1.0);
  // Closed form at a moderate point.
  const double xi = 2.0, gamma = 3.0, v = xi / (1.0 + xi) * gamma;
  CHECK(LogMmseGain(xi, gamma) ==
        doctest::Approx(xi / (1.0 + xi) * std::exp(0.5 * E1Quadrature(v))).epsilon(1e-8));
  CHECK_THROWS_AS(LogMmseGain(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("log-MMSE on pure noise suppresses strongly") {
  StftConfig stft;
  auto [mag, phase] = SplitMagPhase(Stft(WhiteNoise(100000, 7), stft));
  const Matrix g = LogMmseGains(mag, LogMmseConfig{});
  CHECK(g.mean() < 0.2);
  CHECK(g.minCoeff() > 0.0);
  CHECK(g.maxCoeff() <= 1.0);
}

TEST_CASE("energy VAD") {
  std::vector<double> constant(10, 2.0);
  for (bool b : EnergyVad(constant, 30.0)) CHECK(b);
  std::vector<double> padded = {1e-8, 1e-8, 1e-8, 1.0, 0.9, 1.1, 1.0, 1e-8, 1e-8};
  const auto mask = EnergyVad(padded, 30.0);
  for (size_t i = 0; i < padded.size(); ++i) CHECK(mask[i] == (padded[i] > 0.1));
  const auto peak = EnergyVad(padded, 0.0);
  for (size_t i = 0; i < padded.size(); ++i) CHECK(peak[i] == (i == 5));
  CHECK_THROWS_AS(EnergyVad(std::vector<double>{}, 10.0), std::invalid_argument);
}

TEST_CASE("vad-gated noise tracking follows a level change") {
  StftConfig stft;
  // Quiet noise, then a loud burst, then louder stationary noise.
  std::vector<double> x;
  const AudioBuffer quiet = WhiteNoise(20000, 8, 0.01);
  const AudioBuffer burst = WhiteNoise(10000, 9, 1.0);
  const AudioBuffer louder = WhiteNoise(40000, 10, 0.05);
  for (auto* a : {&quiet, &burst, &louder}) x.insert(x.end(), a->samples().begin(), a->samples().end());
  const AudioBuffer noisy(x);
  auto [mag, phase] = SplitMagPhase(Stft(noisy, stft));
  LogMmseConfig fixed;
  LogMmseConfig tracked;
  tracked.tracking.enabled = true;
  tracked.tracking.vad_threshold_db = 10.0;
  const Matrix gf = LogMmseGains(mag, fixed);
  const Matrix gt = LogMmseGains(mag, tracked);
  const Eigen::Index tail = mag.frames.rows() - 20;
  // The fixed estimate treats the louder noise as speech; tracking suppresses it.
  CHECK(gt.bottomRows(20).mean() < gf.bottomRows(20).mean());
  CHECK(tail > 0);
  CHECK(LogMmseGains(mag, tracked) == gt);
}

}  // namespace
}  // namespace evwf
