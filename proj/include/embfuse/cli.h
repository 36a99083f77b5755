// Copyright (c) 2026 The embfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMBFUSE_CLI_H_
#define EMBFUSE_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "embfuse/embedding_store.h"
#include "embfuse/metrics.h"
#include "embfuse/synth.h"
#include "embfuse/trainer.h"

namespace embfuse::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

struct TrainConfig : TrainOptions {
  std::string data_path;
  std::string out_model_path;
  std::string log_path;  // optional copy of the epoch log
};

struct EvalConfig {
  std::string model_path;  // required iff fused mode is requested
  std::string data_path;
  std::string trials_path;
  // Empty selects noisy and enhanced, plus fused when a model is given.
  std::vector<ScoreMode> modes;
  std::string out_path;  // optional copy of the report
};

struct SynthCommandConfig {
  SynthCfg synth;
  // Parameters of the default SNR maps:
  //   noise(s) = clip(noise_base * 10^(-s/20), 0, 3)
  //   residual(s) = residual_ratio * noise(s)
  //   distortion(s) = distortion
  double noise_base = 0.05;
  double residual_ratio = 0.25;
  double distortion = 0.4;
  std::string out_path;
  std::string csv_out_path;  // optional CSV copy

  // Installs the SNR maps above into `synth`.
  SynthCfg Resolve() const;
};

struct TrialsConfig {
  std::string data_path;
  std::string out_path;
  std::size_t n_target = 1000;
  std::size_t n_nontarget = 1000;
  std::uint64_t seed = 7;
  // Draw the counts inside every (noise_type, snr_db) condition.
  bool per_condition = false;
};

struct ProjectConfig {
  std::string model_path;
  std::string data_path;
  ScoreMode mode = ScoreMode::kNoisy;
  std::string out_path;
};

// Binary store, or CSV when the path ends in ".csv".
EmbeddingStore load_store(const std::string& path);

void cmd_train(const TrainConfig& cfg, std::ostream& log);
EvalReport cmd_eval(const EvalConfig& cfg, std::ostream& out);
void cmd_synth(const SynthCommandConfig& cfg, std::ostream& log);
void cmd_trials(const TrialsConfig& cfg, std::ostream& log);
void cmd_project(const ProjectConfig& cfg, std::ostream& log);
void cmd_inspect(const std::string& data_path, std::ostream& out);

// argv without the program name, with the entries of a `--config <file>`
// (flat key=value lines, '#' comments, snake_case or kebab-case keys)
// inserted after the subcommand as flags. Keys given on the command line win.
std::vector<std::string> ExpandConfig(int argc, const char* const* argv);

// Parses argv, runs the selected subcommand and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace embfuse::cli

#endif  // EMBFUSE_CLI_H_
