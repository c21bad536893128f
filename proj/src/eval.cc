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

#include "evwf/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "evwf/types.h"

namespace evwf {

double SegmentalSnr(const AudioBuffer& clean, const AudioBuffer& processed,
                    const SegSnrConfig& cfg) {
  if (clean.sample_rate() != processed.sample_rate()) {
    throw std::invalid_argument("SegmentalSnr: sample rates differ");
  }
  if (cfg.frame_len < 1 || cfg.hop < 1) {
    throw std::invalid_argument("SegmentalSnr: invalid framing");
  }
  const size_t n = std::min(clean.size(), processed.size());
  double total = 0.0;
  int counted = 0;
  for (size_t start = 0; start + cfg.frame_len <= n; start += cfg.hop) {
    double signal = 0.0, error = 0.0;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const double c = clean[start + i];
      const double d = c - processed[start + i];
      signal += c * c;
      error += d * d;
    }
    if (signal < cfg.silence_energy) continue;
    const double db = error > 0.0 ? 10.0 * std::log10(signal / error) : cfg.max_db;
    total += std::clamp(db, cfg.min_db, cfg.max_db);
    ++counted;
  }
  if (counted == 0) throw DataError("SegmentalSnr: no non-silent frames");
  return total / counted;
}

double LogSpectralDistance(const AudioBuffer& clean, const AudioBuffer& processed,
                           const StftConfig& stft) {
  const auto c = SplitMagPhase(Stft(clean, stft)).first.frames;
  const auto p = SplitMagPhase(Stft(processed, stft)).first.frames;
  if (std::abs(c.rows() - p.rows()) > 1) {
    throw std::invalid_argument("LogSpectralDistance: frame counts differ by more than one");
  }
  const Eigen::Index frames = std::min(c.rows(), p.rows());
  constexpr double kFloor = 1e-10;
  double acc = 0.0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      const double d = 20.0 * (std::log10(std::max(c(t, k), kFloor)) -
                               std::log10(std::max(p(t, k), kFloor)));
      acc += d * d;
    }
  }
  return std::sqrt(acc / static_cast<double>(frames * c.cols()));
}

double FeatureMse(const LogFbFeatures& est, const LogFbFeatures& ref) {
  if (est.frames.rows() != ref.frames.rows() || est.frames.cols() != ref.frames.cols()) {
    throw std::invalid_argument("FeatureMse: shape mismatch");
  }
  if (est.frames.size() == 0) return 0.0;
  return (est.frames - ref.frames).squaredNorm() / static_cast<double>(est.frames.size());
}

double RegularizedIncompleteBeta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("RegularizedIncompleteBeta: need a, b > 0 and x in [0, 1]");
  }
  return boost::math::ibeta(a, b, x);
}

double StudentTwoSidedP(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("StudentTwoSidedP: df must be > 0");
  if (std::isinf(t)) return 0.0;
  return RegularizedIncompleteBeta(df / (df + t * t), df / 2.0, 0.5);
}

TTestResult TwoSampleTTest(std::span<const double> a, std::span<const double> b,
                           double alpha) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("TwoSampleTTest: each sample needs >= 2 values");
  }
  auto moments = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  TTestResult r;
  if (sa + sb == 0.0) {
    r.degrees_of_freedom = na + nb - 2.0;
    if (ma == mb) {
      r.t_stat = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_stat = ma > mb ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.t_stat = (ma - mb) / std::sqrt(sa + sb);
    r.degrees_of_freedom =
        (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p_value = std::clamp(StudentTwoSidedP(r.t_stat, r.degrees_of_freedom), 0.0, 1.0);
  }
  r.reject_at_0_05 = r.p_value < alpha;
  return r;
}

const std::vector<std::string>& MethodLabels() {
  static const std::vector<std::string> kLabels = {"noisy", "evwf_ideal", "evwf_model",
                                                   "ss", "lmmse"};
  return kLabels;
}

namespace {

int MethodRank(const std::string& method) {
  const auto& labels = MethodLabels();
  const auto it = std::find(labels.begin(), labels.end(), method);
  if (it == labels.end()) throw std::invalid_argument("unknown method '" + method + "'");
  return static_cast<int>(it - labels.begin());
}

void SortRows(std::vector<EvalRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& x, const EvalRow& y) {
    const int rx = MethodRank(x.method), ry = MethodRank(y.method);
    if (rx != ry) return rx < ry;
    if (x.snr_db != y.snr_db) return x.snr_db < y.snr_db;
    return x.utterance < y.utterance;
  });
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::string RenderReportCsv(std::vector<EvalRow> rows) {
  SortRows(rows);
  std::ostringstream os;
  os << "method,snr_db,utterance,seg_snr_db,lsd_db,feature_mse\n";
  for (const auto& r : rows) {
    os << r.method << "," << Format("%g", r.snr_db) << "," << r.utterance << ","
       << Format("%.6f", r.seg_snr_db) << "," << Format("%.6f", r.lsd_db) << ","
       << Format("%.6f", r.feature_mse) << "\n";
  }
  return os.str();
}

std::string RenderReportTable(std::vector<EvalRow> rows) {
  SortRows(rows);
  struct Acc {
    double seg = 0.0, lsd = 0.0, mse = 0.0;
    int n = 0;
  };
  std::vector<std::pair<std::pair<int, double>, Acc>> groups;
  for (const auto& r : rows) {
    const auto key = std::pair{MethodRank(r.method), r.snr_db};
    if (groups.empty() || groups.back().first != key) groups.push_back({key, {}});
    auto& a = groups.back().second;
    a.seg += r.seg_snr_db;
    a.lsd += r.lsd_db;
    a.mse += r.feature_mse;
    ++a.n;
  }
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %6s %12s %10s %12s\n", "method", "snr_db",
                "n", "seg_snr_db", "lsd_db", "feature_mse");
  os << line;
  for (const auto& [key, a] : groups) {
    std::snprintf(line, sizeof(line), "%-12s %8g %6d %12.3f %10.3f %12.4f\n",
                  MethodLabels()[key.first].c_str(), key.second, a.n, a.seg / a.n,
                  a.lsd / a.n, a.mse / a.n);
    os << line;
  }
  os << "\nQuality metrics: segmental SNR and log-spectral distance; PESQ is not computed.\n";
  return os.str();
}

std::string RenderTTestCsv(std::vector<TTestRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TTestRow& x, const TTestRow& y) { return x.snr_db < y.snr_db; });
  std::ostringstream os;
  os << "snr_db,p_value,reject_h0\n";
  for (const auto& r : rows) {
    os << Format("%g", r.snr_db) << "," << Format("%.6g", r.result.p_value) << ","
       << (r.result.reject_at_0_05 ? "true" : "false") << "\n";
  }
  return os.str();
}

}  // namespace evwf
