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

#include "evwf/filterbank.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>

namespace evwf {

double MelFromHz(double hz) {
  if (hz < 0.0 || !std::isfinite(hz)) {
    throw std::invalid_argument("MelFromHz: frequency must be finite and >= 0");
  }
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double HzFromMel(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank MelFilterbank::Build(double sample_rate, int dft_size,
                                   int channels, double ridge) {
  if (channels < 1) {
    throw std::invalid_argument("MelFilterbank: channels must be >= 1");
  }
  if (!(sample_rate > 0.0)) {
    throw std::invalid_argument("MelFilterbank: sample rate must be > 0");
  }
  if (dft_size < 2 * channels) {
    throw std::invalid_argument("MelFilterbank: dft_size must be >= 2 * channels");
  }
  if (ridge < 0.0) throw std::invalid_argument("MelFilterbank: ridge < 0");

  MelFilterbank fb;
  fb.sample_rate_ = sample_rate;
  fb.dft_size_ = dft_size;
  const int num_bins = dft_size / 2 + 1;
  const int num_points = channels + 2;

  const double nyquist = sample_rate / 2.0;
  const double mel_top = MelFromHz(nyquist);
  fb.boundary_hz_.resize(num_points);
  fb.boundary_bins_.resize(num_points);
  for (int i = 0; i < num_points; ++i) {
    double hz = HzFromMel(mel_top * i / (num_points - 1));
    if (i == 0) hz = 0.0;
    if (i == num_points - 1) hz = nyquist;
    fb.boundary_hz_[i] = hz;
    fb.boundary_bins_[i] =
        static_cast<int>(std::lround(dft_size / sample_rate * hz));
  }
  for (int i = 1; i < num_points; ++i) {
    if (fb.boundary_bins_[i] <= fb.boundary_bins_[i - 1]) {
      throw ConstructionError(
          "MelFilterbank: " + std::to_string(channels) +
          " channels exceed the bin resolution of a " +
          std::to_string(dft_size) + "-point DFT (boundary " +
          std::to_string(i) + " collides with boundary " +
          std::to_string(i - 1) + ")");
    }
  }

  fb.weights_ = Matrix::Zero(num_bins, channels);
  fb.covered_.assign(num_bins, false);
  for (int m = 0; m < channels; ++m) {
    const int lo = fb.boundary_bins_[m];
    const int mid = fb.boundary_bins_[m + 1];
    const int hi = fb.boundary_bins_[m + 2];
    for (int k = lo; k <= mid; ++k) {
      fb.weights_(k, m) = static_cast<double>(k - lo) / (mid - lo);
    }
    for (int k = mid; k <= hi; ++k) {
      fb.weights_(k, m) = static_cast<double>(hi - k) / (hi - mid);
    }
    for (int k = lo + 1; k < hi; ++k) fb.covered_[k] = true;
  }

  Matrix gram = fb.weights_.transpose() * fb.weights_;
  gram.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw ConstructionError("MelFilterbank: Phi^T Phi is not positive definite");
  }
  fb.pseudoinverse_ = ldlt.solve(Eigen::MatrixXd(fb.weights_.transpose()));
  return fb;
}

Matrix Analysis(const MelFilterbank& fb, const PowerSpectrogram& power) {
  if (power.frames.cols() != fb.bins()) {
    throw std::invalid_argument("Analysis: spectrum has " +
                                std::to_string(power.frames.cols()) +
                                " bins, filterbank expects " +
                                std::to_string(fb.bins()));
  }
  return power.frames * fb.weights();
}

LogFbFeatures LogCompress(const Matrix& energies, double floor_eps) {
  if (!(floor_eps > 0.0)) {
    throw std::invalid_argument("LogCompress: floor_eps must be > 0");
  }
  LogFbFeatures out{energies.cwiseMax(floor_eps).array().log().matrix(),
                    floor_eps};
  return out;
}

Matrix ExpExpand(const LogFbFeatures& features) {
  return features.frames.array().exp().matrix();
}

Matrix LeastSquaresSpectrum(const MelFilterbank& fb, const Matrix& energies) {
  if (energies.cols() != fb.channels()) {
    throw std::invalid_argument("Synthesis: energies have " +
                                std::to_string(energies.cols()) +
                                " channels, filterbank has " +
                                std::to_string(fb.channels()));
  }
  return energies * fb.pseudoinverse();
}

Matrix Synthesis(const MelFilterbank& fb, const Matrix& energies,
                 double spectral_floor) {
  return LeastSquaresSpectrum(fb, energies).cwiseMax(spectral_floor);
}

LogFbFeatures ExtractLogFb(const AudioBuffer& audio, const StftConfig& cfg,
                           const MelFilterbank& fb, double floor_eps) {
  if (cfg.dft_size != fb.dft_size()) {
    throw std::invalid_argument("ExtractLogFb: dft_size differs between STFT and filterbank");
  }
  const auto [mag, phase] = SplitMagPhase(Stft(audio, cfg));
  return LogCompress(Analysis(fb, PowerOf(mag)), floor_eps);
}

void WriteFilterbankCsv(std::ostream& os, const MelFilterbank& fb) {
  os << "bin";
  for (int m = 0; m < fb.channels(); ++m) os << ",ch" << m;
  os << "\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < fb.bins(); ++k) {
    os << k;
    for (int m = 0; m < fb.channels(); ++m) os << "," << fb.weights()(k, m);
    os << "\n";
  }
}

}  // namespace evwf
