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

// Mel filterbank analysis and least-squares synthesis.
//
// The weight matrix Phi is N x M (N = dft_size/2 + 1 bins, M channels);
// column m is a triangle rising from boundary bin m-1 to 1.0 at boundary
// bin m and falling to zero at boundary bin m+1. Boundaries are equally
// spaced on the mel scale between 0 Hz and Nyquist and mapped to bins with
// bin = dft_size / sample_rate * hz, rounded to the nearest integer so that
// each filter peaks at exactly 1.0 on a bin.
//
// The pseudoinverse alpha = (Phi^T Phi + ridge I)^-1 Phi^T (M x N) is a left
// inverse of Phi, so analysis(synthesis(e)) == e for ridge == 0.

#ifndef EVWF_FILTERBANK_H_
#define EVWF_FILTERBANK_H_

#include <ostream>
#include <vector>

#include "evwf/audio.h"
#include "evwf/dsp.h"
#include "evwf/types.h"

namespace evwf {

inline constexpr int kDefaultChannels = 23;
inline constexpr double kDefaultLogFloor = 1e-10;
inline constexpr double kDefaultSpectralFloor = 1e-10;

// 2595 log10(1 + hz / 700). Negative input throws std::invalid_argument.
double MelFromHz(double hz);
double HzFromMel(double mel);

class MelFilterbank {
 public:
  // Throws ConstructionError when two boundary points land on the same bin
  // (some filter would span fewer than two bins), std::invalid_argument for
  // channels < 1 or dft_size < 2 * channels.
  static MelFilterbank Build(double sample_rate, int dft_size,
                             int channels = kDefaultChannels,
                             double ridge = 0.0);

  int channels() const { return static_cast<int>(weights_.cols()); }
  int bins() const { return static_cast<int>(weights_.rows()); }
  int dft_size() const { return dft_size_; }
  double sample_rate() const { return sample_rate_; }

  // M + 2 boundary frequencies and their (integer) bin positions.
  const std::vector<double>& boundary_hz() const { return boundary_hz_; }
  const std::vector<int>& boundary_bins() const { return boundary_bins_; }

  const Matrix& weights() const { return weights_; }              // N x M
  const Matrix& pseudoinverse() const { return pseudoinverse_; }  // M x N

  // True for bins that lie inside the support of at least one filter.
  const std::vector<bool>& covered() const { return covered_; }

 private:
  MelFilterbank() = default;

  double sample_rate_ = 0.0;
  int dft_size_ = 0;
  std::vector<double> boundary_hz_;
  std::vector<int> boundary_bins_;
  Matrix weights_;
  Matrix pseudoinverse_;
  std::vector<bool> covered_;
};

// Natural-log filterbank energies, T x M.
struct LogFbFeatures {
  Matrix frames;
  double floor_eps = kDefaultLogFloor;
};

// T x M energies: power (T x N) times Phi.
Matrix Analysis(const MelFilterbank& fb, const PowerSpectrogram& power);

// log(max(e, floor_eps)). Requires floor_eps > 0.
LogFbFeatures LogCompress(const Matrix& energies,
                          double floor_eps = kDefaultLogFloor);
Matrix ExpExpand(const LogFbFeatures& features);

// T x N least-squares spectra, energies (T x M) times alpha. Entries can be
// negative; Analysis(LeastSquaresSpectrum(f)) == f.
Matrix LeastSquaresSpectrum(const MelFilterbank& fb, const Matrix& energies);

// LeastSquaresSpectrum clamped to >= spectral_floor.
Matrix Synthesis(const MelFilterbank& fb, const Matrix& energies,
                 double spectral_floor = kDefaultSpectralFloor);

// stft -> power -> analysis -> log compression.
LogFbFeatures ExtractLogFb(const AudioBuffer& audio, const StftConfig& cfg,
                           const MelFilterbank& fb,
                           double floor_eps = kDefaultLogFloor);

// Header `bin,ch0,...,chM-1`, one row per bin, weights at full precision.
void WriteFilterbankCsv(std::ostream& os, const MelFilterbank& fb);

}  // namespace evwf

#endif  // EVWF_FILTERBANK_H_
