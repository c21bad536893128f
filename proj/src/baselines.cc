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

#include "evwf/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evwf {

void SsConfig::Validate() const {
  if (!(oversubtraction >= 0.0)) {
    throw std::invalid_argument("SsConfig: oversubtraction must be >= 0");
  }
  if (!(floor >= 0.0 && floor < 1.0)) {
    throw std::invalid_argument("SsConfig: floor must be in [0, 1)");
  }
  if (noise_frames < 1) throw std::invalid_argument("SsConfig: noise_frames < 1");
}

void LogMmseConfig::Validate() const {
  if (!(dd_alpha > 0.0 && dd_alpha < 1.0)) {
    throw std::invalid_argument("LogMmseConfig: dd_alpha must be in (0, 1)");
  }
  if (noise_frames < 1) {
    throw std::invalid_argument("LogMmseConfig: noise_frames < 1");
  }
}

NoiseEstimate EstimateNoiseInitial(const MagnitudeSpectrogram& noisy,
                                   int num_frames) {
  if (num_frames < 1 || noisy.frames.rows() < num_frames) {
    throw std::invalid_argument(
        "EstimateNoiseInitial: need 1 <= num_frames <= T (num_frames=" +
        std::to_string(num_frames) + ", T=" +
        std::to_string(noisy.frames.rows()) + ")");
  }
  NoiseEstimate est;
  est.psd = noisy.frames.topRows(num_frames).array().square().colwise().mean();
  est.frames_used = num_frames;
  return est;
}

namespace {

// Per-frame noise PSDs: the initial estimate, optionally refreshed on
// non-speech frames.
Matrix NoiseTrack(const Matrix& power, int noise_frames,
                  const NoiseTracking& tracking) {
  const NoiseEstimate initial =
      EstimateNoiseInitial(MagnitudeSpectrogram{power.cwiseSqrt()}, noise_frames);
  Matrix out(power.rows(), power.cols());
  Eigen::RowVectorXd psd = initial.psd.transpose();
  std::vector<bool> speech(power.rows(), true);
  if (tracking.enabled) {
    std::vector<double> energies(power.rows());
    for (Eigen::Index t = 0; t < power.rows(); ++t) energies[t] = power.row(t).sum();
    speech = EnergyVad(energies, tracking.vad_threshold_db);
  }
  for (Eigen::Index t = 0; t < power.rows(); ++t) {
    if (tracking.enabled && t >= noise_frames && !speech[t]) {
      psd = tracking.smoothing * psd + (1.0 - tracking.smoothing) * power.row(t);
    }
    out.row(t) = psd;
  }
  return out;
}

}  // namespace

MagnitudeSpectrogram SpectralSubtractMagnitude(const MagnitudeSpectrogram& noisy,
                                               const SsConfig& cfg) {
  cfg.Validate();
  const Matrix power = noisy.frames.array().square().matrix();
  const Matrix noise = NoiseTrack(power, cfg.noise_frames, cfg.tracking);
  const Matrix cleaned =
      (power - cfg.oversubtraction * noise).cwiseMax(cfg.floor * power);
  return MagnitudeSpectrogram{cleaned.cwiseSqrt()};
}

AudioBuffer SpectralSubtract(const AudioBuffer& noisy, const SsConfig& cfg,
                             const StftConfig& stft_cfg) {
  const auto [mag, phase] = SplitMagPhase(Stft(noisy, stft_cfg));
  return IstftOverlapAdd(SpectralSubtractMagnitude(mag, cfg), phase, stft_cfg,
                         noisy.sample_rate());
}

double ExpIntegralE1(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("ExpIntegralE1: x must be > 0");
  if (std::isinf(x)) return 0.0;
  if (x < 1.0) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  // Modified Lentz evaluation of
  // E1(x) = exp(-x) / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...))).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

double LogMmseGain(double xi, double gamma) {
  if (!(xi > 0.0) || !(gamma >= 0.0)) {
    throw std::invalid_argument("LogMmseGain: need xi > 0 and gamma >= 0");
  }
  if (std::isinf(xi)) return 1.0;
  const double ratio = xi / (1.0 + xi);
  const double v = std::max(ratio * gamma, 1e-300);
  const double g = ratio * std::exp(0.5 * ExpIntegralE1(v));
  return std::clamp(g, std::numeric_limits<double>::min(), 1.0);
}

Matrix LogMmseGains(const MagnitudeSpectrogram& noisy, const LogMmseConfig& cfg) {
  cfg.Validate();
  const Matrix power = noisy.frames.array().square().matrix();
  const Matrix noise = NoiseTrack(power, cfg.noise_frames, cfg.tracking);
  const double xi_min = std::pow(10.0, cfg.xi_min_db / 10.0);
  constexpr double kPowerFloor = 1e-20;
  Matrix gains(power.rows(), power.cols());
  Eigen::RowVectorXd prev_clean_power = Eigen::RowVectorXd::Zero(power.cols());
  for (Eigen::Index t = 0; t < power.rows(); ++t) {
    for (Eigen::Index k = 0; k < power.cols(); ++k) {
      const double n = std::max(noise(t, k), kPowerFloor);
      const double gamma = power(t, k) / n;
      double xi;
      if (t == 0) {
        xi = cfg.dd_alpha + (1.0 - cfg.dd_alpha) * std::max(gamma - 1.0, 0.0);
      } else {
        xi = cfg.dd_alpha * prev_clean_power[k] / n +
             (1.0 - cfg.dd_alpha) * std::max(gamma - 1.0, 0.0);
      }
      xi = std::max(xi, xi_min);
      const double g = LogMmseGain(xi, gamma);
      gains(t, k) = g;
      prev_clean_power[k] = g * g * power(t, k);
    }
  }
  return gains;
}

AudioBuffer LogMmse(const AudioBuffer& noisy, const LogMmseConfig& cfg,
                    const StftConfig& stft_cfg) {
  const auto [mag, phase] = SplitMagPhase(Stft(noisy, stft_cfg));
  const Matrix gains = LogMmseGains(mag, cfg);
  return IstftOverlapAdd(MagnitudeSpectrogram{mag.frames.cwiseProduct(gains)},
                         phase, stft_cfg, noisy.sample_rate());
}

std::vector<bool> EnergyVad(std::span<const double> frame_energies,
                            double threshold_db_below_peak) {
  if (frame_energies.empty()) {
    throw std::invalid_argument("EnergyVad: no frames");
  }
  if (!(threshold_db_below_peak >= 0.0)) {
    throw std::invalid_argument("EnergyVad: threshold must be >= 0 dB");
  }
  const double peak = *std::max_element(frame_energies.begin(), frame_energies.end());
  std::vector<bool> speech(frame_energies.size());
  if (peak <= 0.0) {
    // All-silent input: every frame is at the (zero) peak.
    std::fill(speech.begin(), speech.end(), true);
    return speech;
  }
  const double threshold = peak * std::pow(10.0, -threshold_db_below_peak / 10.0);
  for (size_t t = 0; t < frame_energies.size(); ++t) {
    speech[t] = frame_energies[t] == peak || frame_energies[t] >= threshold;
  }
  return speech;
}

}  // namespace evwf
