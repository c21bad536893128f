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

// Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
// exits nonzero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evwf/avdata.h"
#include "evwf/baselines.h"
#include "evwf/dsp.h"
#include "evwf/enhance.h"
#include "evwf/eval.h"
#include "evwf/filterbank.h"
#include "evwf/lipreading.h"
#include "evwf/neural.h"
#include "evwf/synth.h"
#include "test_util.h"

namespace evwf {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Matrix Uniform(Eigen::Index r, Eigen::Index c, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

std::vector<double> Gaussian(size_t n, uint64_t seed, double sd = 1.0, double mean = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

double Rms(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double RmsDiff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

const MelFilterbank& Fb() {
  static const MelFilterbank fb = MelFilterbank::Build(kDefaultSampleRate, 2048, 23);
  return fb;
}

// --- 1 ----------------------------------------------------------------------

Outcome PseudoinverseIdentity() {
  double worst = 0.0;
  for (int channels : {23, 16, 30, 40}) {
    const auto fb = MelFilterbank::Build(kDefaultSampleRate, 2048, channels);
    const Matrix prod = fb.pseudoinverse() * fb.weights();
    worst = std::max(worst, (prod - Matrix::Identity(channels, channels)).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-8, Fmt("max|alpha Phi - I| = %.3g over M in {23,16,30,40}, dft 2048 (< 1e-8)", worst)};
}

// --- 2 ----------------------------------------------------------------------

Outcome FilterbankRoundTrip() {
  const auto& fb = Fb();
  const Matrix f = Uniform(100, 23, 2);
  const Matrix back = Analysis(fb, PowerSpectrogram{LeastSquaresSpectrum(fb, f)});
  const double linear = (back - f).cwiseAbs().maxCoeff();

  Matrix smooth(100, 23);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double a = 3.0 * u(rng), b = 6.0 * u(rng), level = 0.01 + u(rng);
    for (int m = 0; m < 23; ++m) smooth(t, m) = level * std::exp(a * std::sin(b * m / 23.0));
  }
  const double clamped =
      (Analysis(fb, PowerSpectrogram{Synthesis(fb, smooth)}) - smooth).cwiseAbs().maxCoeff();
  return {linear < 1e-8 && clamped < 1e-8,
          Fmt("unclamped map on 100 random vectors %.3g; clamped synthesis on 100 smooth "
              "envelopes %.3g (< 1e-8)", linear, clamped)};
}

// --- 3 ----------------------------------------------------------------------

Outcome StftRoundTrip() {
  double worst = 0.0;
  for (int hop : {300, 500, 667}) {
    StftConfig cfg;
    cfg.hop = hop;
    for (int i = 0; i < 100; ++i) {
      const AudioBuffer x(Gaussian(50000, 1000 * hop + i, 0.3));
      auto [mag, phase] = SplitMagPhase(Stft(x, cfg));
      const AudioBuffer y = IstftOverlapAdd(mag, phase, cfg);
      const size_t lo = cfg.frame_len, hi = y.size() - cfg.frame_len;
      const auto xs = x.samples().subspan(lo, hi - lo);
      const auto ys = y.samples().subspan(lo, hi - lo);
      worst = std::max(worst, RmsDiff(xs, ys) / Rms(xs));
    }
  }
  return {worst < 1e-6, Fmt("worst interior relative RMS error %.3g over 300 signals (< 1e-6)", worst)};
}

// --- 4 ----------------------------------------------------------------------

Outcome GainSanity() {
  StftConfig stft;
  const AudioBuffer noisy(Gaussian(50000, 4, 0.2));
  auto [mag, phase] = SplitMagPhase(Stft(noisy, stft));
  const AudioBuffer round_trip = IstftOverlapAdd(mag, phase, stft);
  const AudioBuffer same =
      EnhanceUtterance(noisy, ExtractLogFb(noisy, stft, Fb()), Fb(), stft, EvwfConfig{});
  const double same_err = RmsDiff(same.samples(), round_trip.samples());

  LogFbFeatures floor_feats;
  floor_feats.frames = Matrix::Constant(mag.frames.rows(), 23, std::log(kDefaultLogFloor));
  const AudioBuffer silent = EnhanceUtterance(noisy, floor_feats, Fb(), stft, EvwfConfig{});
  const double ratio = Rms(silent.samples()) / Rms(noisy.samples());
  return {same_err < 1e-6 && ratio < 1e-4,
          Fmt("equal features: RMS vs round trip %.3g (< 1e-6); floor features: output/input "
              "RMS %.3g (< 1e-4)", same_err, ratio)};
}

// --- 5 ----------------------------------------------------------------------

Outcome EnhancementEfficacy() {
  SynthCorpusConfig cfg;
  const StftConfig& stft = cfg.stft;
  constexpr int kUtterances = 20;
  std::vector<SynthUtterance> utts;
  std::vector<LogFbFeatures> ideal;
  for (int i = 0; i < kUtterances; ++i) {
    utts.push_back(SynthesizeUtterance(cfg, i));
    ideal.push_back(IdealMappingFeatures(utts.back().clean, Fb(), stft));
  }
  bool pass = true;
  std::string detail;
  for (auto label : {NoiseLabel::kWhite, NoiseLabel::kCafe, NoiseLabel::kStreet,
                     NoiseLabel::kBus, NoiseLabel::kPedestrian}) {
    for (double snr : {-12.0, -6.0, -3.0, 0.0}) {
      double noisy_sum = 0, evwf_sum = 0, ss_sum = 0, lmmse_sum = 0;
      for (int i = 0; i < kUtterances; ++i) {
        const auto& u = utts[i];
        const AudioBuffer noise = GenerateNoise(label, u.clean.size(), cfg.sample_rate, 100 + i);
        const AudioBuffer noisy = MixAtSnr(u.clean, noise, {snr, label});
        noisy_sum += SegmentalSnr(u.clean, noisy);
        evwf_sum += SegmentalSnr(u.clean, EnhanceUtterance(noisy, ideal[i], Fb(), stft, {}));
        ss_sum += SegmentalSnr(u.clean, SpectralSubtract(noisy, {}, stft));
        lmmse_sum += SegmentalSnr(u.clean, LogMmse(noisy, {}, stft));
      }
      const double n = noisy_sum / kUtterances, e = evwf_sum / kUtterances;
      const double s = ss_sum / kUtterances, l = lmmse_sum / kUtterances;
      bool ok = e - n >= 3.0;
      if (snr <= -6.0) ok = ok && e > s && e > l;
      pass = pass && ok;
      detail += Fmt("\n      %-10s %4.0f dB: noisy %6.2f evwf %6.2f ss %6.2f lmmse %6.2f%s",
                    NoiseLabelName(label).c_str(), snr, n, e, s, l, ok ? "" : "  <-- fails");
    }
  }
  return {pass, "mean seg-SNR over 20 utterances; evwf(ideal) >= noisy + 3 dB at every SNR, "
                "> ss and lmmse at -12/-6 dB" + detail};
}

// --- 6 ----------------------------------------------------------------------

template <RegressionNetwork Net>
double GradientError(Net& net, const Matrix& x, const Matrix& y) {
  Vector grad;
  net.LossAndGradient(x, y, 0.0, nullptr, &grad);
  const double h = 1e-6;
  const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double up = net.LossAndGradient(x, y, 0.0, nullptr, nullptr);
    net.params()[i] = keep - h;
    const double down = net.LossAndGradient(x, y, 0.0, nullptr, nullptr);
    net.params()[i] = keep;
    worst = std::max(worst, std::abs((up - down) / (2 * h) - grad[i]) / scale);
  }
  return worst;
}

Outcome GradientChecks() {
  double lstm = 0.0, mlp = 0.0;
  auto random = [](Eigen::Index r, Eigen::Index c, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
  };
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    LstmNetwork l(LstmArchitecture{3, 4, 5, 2, 2});
    l.InitializeRandom(rng);
    lstm = std::max(lstm, GradientError(l, random(4, 9, rng), random(4, 2, rng)));
    MlpArchitecture a;
    a.input_dim = 3;
    a.context = 2;
    a.output_dim = 2;
    a.hidden = seed % 2 ? std::vector<int>{12, 10} : std::vector<int>{11};
    a.activation = seed % 3 ? Activation::kTanh : Activation::kSigmoid;
    MlpNetwork m(a);
    m.InitializeRandom(rng);
    mlp = std::max(mlp, GradientError(m, random(5, 9, rng), random(5, 2, rng)));
  }
  return {lstm <= 1e-5 && mlp <= 1e-5,
          Fmt("max relative error over 20 seeds: LSTM %.3g, MLP %.3g (<= 1e-5)", lstm, mlp)};
}

// --- 7 ----------------------------------------------------------------------

Outcome RmsPropStep() {
  RmsProp opt(1, 1e-3, 0.9, 0.0);
  Vector p = Vector::Zero(1);
  opt.Step(p, Vector::Ones(1));
  const double expect = -1e-3 / std::sqrt(0.1);
  const double err = std::abs(p[0] - expect);
  return {err < 1e-12, Fmt("first step %.15g vs %.15g, |diff| %.3g (< 1e-12)", p[0], expect, err)};
}

// --- 8 ----------------------------------------------------------------------

Outcome ContextTrend() {
  SynthCorpusConfig cfg;
  cfg.num_utterances = 200;
  std::vector<AlignedUtterance> train, val, test;
  std::vector<AlignedUtterance> all;
  std::vector<std::string> speakers;
  for (int i = 0; i < cfg.num_utterances; ++i) {
    const SynthUtterance u = SynthesizeUtterance(cfg, i);
    all.push_back(AlignUtterance(u, Fb(), cfg.stft));
    speakers.push_back(u.speaker);
  }
  const auto labels = SplitDataset(speakers, SplitRatios::TableLayout(), cfg.seed);
  for (size_t i = 0; i < all.size(); ++i) {
    (labels[i] == SplitLabel::kTrain ? train : labels[i] == SplitLabel::kVal ? val : test)
        .push_back(all[i]);
  }
  TrainConfig tc;
  tc.lr = 2e-3;
  tc.epochs = 20;
  tc.rng_seed = 1;
  auto fit = [&](LipReadingSpec spec, TrainConfig c) {
    // Every model is scored on the same frames, t >= 8.
    return TrainLipReading(spec, train, val, c).model.EvaluateMse(test, 8);
  };
  LipReadingSpec lstm;
  lstm.context = 1;
  const double k1 = fit(lstm, tc);
  lstm.context = 8;
  const double k8 = fit(lstm, tc);

  TrainConfig mc = tc;
  mc.dropout_rate = 0.0;
  double best_mlp = INFINITY;
  std::string best_name;
  for (const auto& hidden : std::vector<std::vector<int>>{{50}, {150}, {100, 50}}) {
    for (auto act : {Activation::kTanh, Activation::kSigmoid}) {
      LipReadingSpec spec;
      spec.kind = ModelKind::kMlp;
      spec.context = 8;
      spec.mlp_hidden = hidden;
      spec.mlp_activation = act;
      const double m = fit(spec, mc);
      if (m < best_mlp) {
        best_mlp = m;
        best_name = (hidden.size() == 1 ? std::to_string(hidden[0])
                                        : std::to_string(hidden[0]) + "-" + std::to_string(hidden[1])) +
                    (act == Activation::kTanh ? " tanh" : " sigmoid");
      }
    }
  }
  const double gain = (k1 - k8) / k1;
  return {gain >= 0.10 && k8 < best_mlp,
          Fmt("%zu/%zu/%zu utterances; test MSE on frames t >= 8; LSTM k=1 %.4f, k=8 %.4f (%.1f%% lower, need >= "
              "10%%); best MLP k=8 (%s) %.4f",
              train.size(), val.size(), test.size(), k1, k8, 100 * gain, best_name.c_str(),
              best_mlp)};
}

// --- 9 ----------------------------------------------------------------------

Outcome MixingExactness() {
  const SynthUtterance u = SynthesizeUtterance(SynthCorpusConfig{}, 0);
  double worst = 0.0;
  for (auto label : {NoiseLabel::kWhite, NoiseLabel::kCafe, NoiseLabel::kStreet,
                     NoiseLabel::kBus, NoiseLabel::kPedestrian}) {
    const AudioBuffer noise = GenerateNoise(label, u.clean.size(), kDefaultSampleRate, 9);
    for (double snr : {-12.0, -6.0, -3.0, 0.0, 3.0, 6.0, 12.0}) {
      worst = std::max(worst, std::abs(MeasureSnrDb(u.clean, MixAtSnr(u.clean, noise, {snr, label})) - snr));
    }
  }
  return {worst < 0.01, Fmt("worst |measured - target| %.3g dB over 5 noises x 7 SNRs (< 0.01)", worst)};
}

// --- 10 ---------------------------------------------------------------------

// Exact two-sided permutation p-value of Welch's |t| over every split of the
// pooled sample into groups of the original sizes.
double PermutationP(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  const int n = static_cast<int>(pool.size()), na = static_cast<int>(a.size());
  const double observed = std::abs(TwoSampleTTest(a, b).t_stat);
  long extreme = 0, total = 0;
  std::vector<double> x, y;
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != na) continue;
    x.clear();
    y.clear();
    for (int i = 0; i < n; ++i) ((mask >> i) & 1 ? x : y).push_back(pool[i]);
    if (std::abs(TwoSampleTTest(x, y).t_stat) >= observed * (1 - 1e-12)) ++extreme;
    ++total;
  }
  return static_cast<double>(extreme) / total;
}

Outcome TTestValidity() {
  struct Fixture { double shift, sd_b; uint64_t seed; };
  const std::vector<Fixture> fixtures = {
      {0.0, 1.0, 1}, {0.5, 1.0, 2}, {1.0, 1.0, 3}, {1.5, 1.0, 4}, {0.8, 1.5, 5}};
  double worst = 0.0;
  std::string detail;
  for (const auto& f : fixtures) {
    const auto a = Gaussian(10, 100 + f.seed, 1.0, f.shift);
    const auto b = Gaussian(10, 200 + f.seed, f.sd_b, 0.0);
    const double p = TwoSampleTTest(a, b).p_value;
    const double perm = PermutationP(a, b);
    worst = std::max(worst, std::abs(p - perm));
    detail += Fmt(" %.3f/%.3f", p, perm);
  }
  const auto a = Gaussian(10, 7);
  const double same = TwoSampleTTest(a, a).p_value;
  TTestResult r = TwoSampleTTest(Gaussian(10, 8, 1.0, 2.0), a);
  const std::string csv = RenderTTestCsv({{-6.0, r}});
  const bool format = csv.rfind("snr_db,p_value,reject_h0\n-6,", 0) == 0 &&
                      csv.ends_with(r.reject_at_0_05 ? ",true\n" : ",false\n");
  return {worst < 0.02 && same == 1.0 && format,
          Fmt("welch/permutation p (n=10+10, exhaustive):%s; worst gap %.4f (< 0.02); "
              "identical samples p = %g; csv header %s",
              detail.c_str(), worst, same, format ? "ok" : "wrong")};
}

// --- 11 ---------------------------------------------------------------------

Outcome SplitCountsCriterion() {
  const auto c = SplitCounts(989, SplitRatios::TableLayout());
  return {c == std::vector<int>{692, 99, 198}, Fmt("989 items -> %d/%d/%d (want 692/99/198)", c[0], c[1], c[2])};
}

// --- 12 ---------------------------------------------------------------------

Outcome ExpIntegral() {
  // E1(1) = int_0^inf exp(-e^s) ds, composite Simpson in long double.
  const int n = 400000;
  const long double upper = std::log(61.0L) + 1.0L, h = upper / n;
  long double acc = 0.0L;
  for (int i = 0; i <= n; ++i) {
    acc += std::exp(-std::exp(i * h)) * ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2));
  }
  const double oracle = static_cast<double>(acc * h / 3);
  const double err = std::abs(ExpIntegralE1(1.0) - oracle);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double g = LogMmseGain(std::pow(10.0, u(rng) / 10), std::pow(10.0, u(rng) / 10));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return {err < 1e-8 && lo > 0.0 && hi <= 1.0,
          Fmt("E1(1) = %.12f, |diff| vs quadrature %.3g (< 1e-8); 1e5 fuzzed gains in [%.3g, %.3g]",
              ExpIntegralE1(1.0), err, lo, hi)};
}

// --- 13 ---------------------------------------------------------------------

Outcome Determinism() {
  testing::TempDir dir("acceptance");
  testing::WriteFileText(dir.path() / "cfg.json", R"({
    "corpus": {"utterances": 30, "speakers": 3, "visual_frames": 20},
    "mix": {"snr_db": [-6, 0], "noise": ["white", "cafe"]},
    "train": {"epochs": 3},
    "model": {"kind": "lstm", "context": 2, "hidden1": 16, "hidden2": 16}
  })");
  std::vector<std::string> files = {"report/report.csv", "report/ttest_evwf_model_vs_ss.csv",
                                    "report/ttest_evwf_model_vs_lmmse.csv", "history.csv",
                                    "audio.avfb", "visual.avfb"};
  std::vector<std::string> contents[2];
  for (int run = 0; run < 2; ++run) {
    const auto root = dir.path() / ("run" + std::to_string(run));
    std::filesystem::create_directories(root);
    const auto r = testing::RunPipeline(root, dir / "cfg.json", "11", run == 0 ? "1" : "2");
    if (r.code != 0) return {false, "pipeline failed: " + r.err};
    const auto corpus = root / "corpus";
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"extract", "--audio", (corpus / "clean" / "u0000.wav").string(), "--out",
              (root / "audio.avfb").string()},
             {"extract", "--frames", (corpus / "frames" / "u0000").string(), "--out",
              (root / "visual.avfb").string()}}) {
      const auto e = testing::Cli(args);
      if (e.code != 0) return {false, "extract failed: " + e.err};
    }
    for (const auto& f : files) contents[run].push_back(testing::ReadFileText(root / f));
  }
  bool same = true;
  std::string detail;
  for (size_t i = 0; i < files.size(); ++i) {
    const bool eq = !contents[0][i].empty() && contents[0][i] == contents[1][i];
    same = same && eq;
    detail += " " + files[i] + (eq ? " identical" : " DIFFERS") + ";";
  }
  return {same, "two seeded runs (--jobs 1 and 2):" + detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

int Main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "pseudoinverse identity", PseudoinverseIdentity},
      {2, "filterbank round trip", FilterbankRoundTrip},
      {3, "stft/istft round trip", StftRoundTrip},
      {4, "evwf gain sanity", GainSanity},
      {5, "enhancement efficacy", EnhancementEfficacy},
      {6, "gradient checks", GradientChecks},
      {7, "rmsprop single step", RmsPropStep},
      {8, "context-frame trend", ContextTrend},
      {9, "snr mixing exactness", MixingExactness},
      {10, "t-test validity", TTestValidity},
      {11, "split counts", SplitCountsCriterion},
      {12, "exponential integral and log-mmse gains", ExpIntegral},
      {13, "pipeline determinism", Determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("AC%02d %s  %s [%.1fs]: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace evwf

int main(int argc, char** argv) { return evwf::Main(argc, argv); }
