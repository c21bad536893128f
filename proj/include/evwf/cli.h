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

// Command-line front end: run configuration, worker pool and the `evwf`
// subcommands (synth-corpus, extract, train, enhance, evaluate).

#ifndef EVWF_CLI_H_
#define EVWF_CLI_H_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evwf/avdata.h"
#include "evwf/baselines.h"
#include "evwf/dsp.h"
#include "evwf/enhance.h"
#include "evwf/lipreading.h"
#include "evwf/neural.h"
#include "evwf/synth.h"

namespace evwf {

// Bad flags or configuration; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

struct RunConfig {
  uint64_t seed = 1;
  StftConfig stft;
  EvwfConfig evwf;
  TrainConfig train;
  SsConfig ss;
  LogMmseConfig lmmse;
  SplitRatios split;
  LipReadingSpec model;
  // Corpus synthesis.
  int utterances = 200;
  int speakers = 5;
  int visual_frames = 30;
  int silence_frames = 9;
  double pixel_noise = 0.04;
  // Noisy mixtures written for the test split.
  std::vector<double> snr_db = {-12, -6, -3, 0, 3, 6, 12};
  std::vector<NoiseLabel> noises = {NoiseLabel::kWhite};

  SynthCorpusConfig CorpusConfig() const;
  void Validate() const;
};

// Overlays the JSON document on `base`. Unknown keys and wrong types throw
// UsageError naming the key path (e.g. "train.lr").
RunConfig ParseRunConfig(const std::string& json_text, RunConfig base = {});
RunConfig LoadRunConfig(const std::filesystem::path& path, RunConfig base = {});
std::string RunConfigToJson(const RunConfig& cfg);

// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// by index is rethrown after all workers finish.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn);

// Runs `evwf <args...>` in process and returns the exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evwf

#endif  // EVWF_CLI_H_
