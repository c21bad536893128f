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

// Objective evaluation: segmental SNR, log-spectral distance, feature MSE,
// Welch's two-sample t-test and the CSV/text report writers.

#ifndef EVWF_EVAL_H_
#define EVWF_EVAL_H_

#include <span>
#include <string>
#include <vector>

#include "evwf/audio.h"
#include "evwf/dsp.h"
#include "evwf/filterbank.h"

namespace evwf {

struct SegSnrConfig {
  int frame_len = 800;
  int hop = 800;
  double min_db = -10.0;
  double max_db = 35.0;
  double silence_energy = 1e-8;  // frames with less clean energy are skipped
};

// Mean over non-silent frames of 10 log10(sum clean^2 / sum (clean - proc)^2),
// each frame clamped to [min_db, max_db]. Signals are trimmed to the
// shorter length. Throws DataError when every frame is silent.
double SegmentalSnr(const AudioBuffer& clean, const AudioBuffer& processed,
                    const SegSnrConfig& cfg = {});

// RMS over frames and bins of 20 (log10 |C| - log10 |P|), magnitudes floored
// at 1e-10. Frame counts may differ by at most one.
double LogSpectralDistance(const AudioBuffer& clean, const AudioBuffer& processed,
                           const StftConfig& stft);

// Mean over all entries of the squared difference (no 0.5 factor).
double FeatureMse(const LogFbFeatures& est, const LogFbFeatures& ref);

struct TTestResult {
  double t_stat = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  bool reject_at_0_05 = false;  // p < alpha
};

// Unpaired Welch t-test, two-sided. Each sample needs >= 2 values.
TTestResult TwoSampleTTest(std::span<const double> a, std::span<const double> b,
                           double alpha = 0.05);

// I_x(a, b).
double RegularizedIncompleteBeta(double x, double a, double b);

// Two-sided tail probability of Student's t with `df` degrees of freedom.
double StudentTwoSidedP(double t, double df);

// --- reports ---------------------------------------------------------------

// Known method labels, in report order.
const std::vector<std::string>& MethodLabels();

struct EvalRow {
  std::string method;
  double snr_db = 0.0;
  std::string utterance;
  double seg_snr_db = 0.0;
  double lsd_db = 0.0;
  double feature_mse = 0.0;
};

struct TTestRow {
  double snr_db = 0.0;
  TTestResult result;
};

// Sorted by (method order, snr, utterance). Header:
// method,snr_db,utterance,seg_snr_db,lsd_db,feature_mse
std::string RenderReportCsv(std::vector<EvalRow> rows);

// Per (method, snr) means as an aligned text table.
std::string RenderReportTable(std::vector<EvalRow> rows);

// snr_db,p_value,reject_h0
std::string RenderTTestCsv(std::vector<TTestRow> rows);

}  // namespace evwf

#endif  // EVWF_EVAL_H_
