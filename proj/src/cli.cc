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

#include "embfuse/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "embfuse/errors.h"
#include "embfuse/fusion_net.h"
#include "embfuse/pca.h"
#include "embfuse/trials.h"

namespace embfuse::cli {

namespace {

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FormatError("write failed: " + path);
}

std::string G9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<Vec> SelectEmbeddings(const EmbeddingStore& store, ScoreMode mode,
                                  const FusionModel* model) {
  std::vector<Vec> out;
  out.reserve(store.records.size());
  for (const auto& r : store.records) {
    switch (mode) {
      case ScoreMode::kNoisy:
        out.push_back(r.noisy);
        break;
      case ScoreMode::kEnhanced:
        out.push_back(r.enhanced);
        break;
      case ScoreMode::kFused:
        out.push_back(fuse(*model, r.noisy, r.enhanced));
        break;
    }
  }
  return out;
}

const std::set<std::string>& BooleanFlags() {
  static const std::set<std::string> flags = {"normalize-inputs", "per-condition"};
  return flags;
}

bool HasFlag(const std::vector<std::string>& args, std::size_t from, const std::string& key) {
  const std::string flag = "--" + key;
  for (std::size_t i = from; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    if (BooleanFlags().count(key) && a == "--no-" + key) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> ExpandConfig(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::size_t sub = 0;  // index of the subcommand name
  while (sub < args.size() && args[sub].rfind("-", 0) == 0) ++sub;
  for (std::size_t i = sub; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || sub >= args.size()) return args;

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path);
  std::vector<std::string> injected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw FormatError(path + ":" + std::to_string(line_no) + ": empty key");
    if (HasFlag(args, sub + 1, key)) continue;
    if (BooleanFlags().count(key)) {
      if (value == "true" || value == "1" || value == "on") {
        injected.push_back("--" + key);
      } else if (value == "false" || value == "0" || value == "off") {
        injected.push_back("--no-" + key);
      } else {
        throw FormatError(path + ":" + std::to_string(line_no) + ": bad boolean '" + value + "'");
      }
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, injected.begin(),
              injected.end());
  return args;
}

EmbeddingStore load_store(const std::string& path) {
  return EndsWith(path, ".csv") ? read_store_csv(path) : read_store(path);
}

SynthCfg SynthCommandConfig::Resolve() const {
  SynthCfg cfg = synth;
  const double base = noise_base;
  const double ratio = residual_ratio;
  const double dist = distortion;
  cfg.noise_scale_fn = [base](int s) {
    return std::clamp(base * std::pow(10.0, -s / 20.0), 0.0, 3.0);
  };
  cfg.enhance_residual_fn = [base, ratio](int s) {
    return ratio * std::clamp(base * std::pow(10.0, -s / 20.0), 0.0, 3.0);
  };
  cfg.enhance_distortion_fn = [dist](int) { return dist; };
  return cfg;
}

void cmd_train(const TrainConfig& cfg, std::ostream& log) {
  if (cfg.out_model_path.empty()) throw ConfigError("train: --out is required");
  const EmbeddingStore store = load_store(cfg.data_path);
  std::ostringstream text;
  auto emit = [&](const std::string& line) {
    log << line << '\n';
    text << line << '\n';
  };
  emit("train records=" + std::to_string(store.records.size()) +
       " speakers=" + std::to_string(store.speaker_count()) +
       " n_dim=" + std::to_string(store.n_dim));
  const FusionModel model = train_fusion(store, cfg, [&](const EpochStats& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "epoch %zu/%zu mean_loss=%.6f skipped_steps=%zu",
                  s.epoch, cfg.n_epochs, s.mean_loss, s.skipped_steps);
    emit(buf);
  });
  save_model(model, cfg.out_model_path);
  emit("wrote " + cfg.out_model_path);
  if (!cfg.log_path.empty()) WriteText(cfg.log_path, text.str());
}

EvalReport cmd_eval(const EvalConfig& cfg, std::ostream& out) {
  std::vector<ScoreMode> modes = cfg.modes;
  if (modes.empty()) {
    modes = {ScoreMode::kNoisy, ScoreMode::kEnhanced};
    if (!cfg.model_path.empty()) modes.push_back(ScoreMode::kFused);
  }
  const bool want_fused =
      std::find(modes.begin(), modes.end(), ScoreMode::kFused) != modes.end();
  if (want_fused && cfg.model_path.empty()) {
    throw ConfigError("eval: fused mode needs --model");
  }
  const EmbeddingStore store = load_store(cfg.data_path);
  const TrialList trials = read_trials(cfg.trials_path);
  std::optional<FusionModel> model;
  if (want_fused) {
    model = load_model(cfg.model_path);
    if (model->params.n_dim != store.n_dim) {
      throw DimensionError("eval: model n_dim " + std::to_string(model->params.n_dim) +
                           " does not match store n_dim " + std::to_string(store.n_dim));
    }
  }
  EvalReport report =
      evaluate_conditions(store, trials, model ? &*model : nullptr, modes);
  const std::string text = format_report(report);
  out << text;
  if (!cfg.out_path.empty()) WriteText(cfg.out_path, text);
  return report;
}

void cmd_synth(const SynthCommandConfig& cfg, std::ostream& log) {
  if (cfg.out_path.empty()) throw ConfigError("synth: --out is required");
  const EmbeddingStore store = synth_generate(cfg.Resolve());
  write_store(store, cfg.out_path);
  if (!cfg.csv_out_path.empty()) {
    std::ofstream csv(cfg.csv_out_path, std::ios::trunc);
    if (!csv) throw FormatError("cannot open " + cfg.csv_out_path);
    write_store_csv(store, csv);
  }
  log << "wrote " << cfg.out_path << " records=" << store.records.size()
      << " n_dim=" << store.n_dim << '\n';
}

void cmd_trials(const TrialsConfig& cfg, std::ostream& log) {
  if (cfg.out_path.empty()) throw ConfigError("trials: --out is required");
  const EmbeddingStore store = load_store(cfg.data_path);
  Rng rng(cfg.seed);
  const TrialList list =
      cfg.per_condition ? build_condition_trials(store, cfg.n_target, cfg.n_nontarget, rng)
                        : build_trials(store, cfg.n_target, cfg.n_nontarget, rng);
  write_trials(list, cfg.out_path);
  log << "wrote " << cfg.out_path << " targets=" << list.target_count()
      << " nontargets=" << list.nontarget_count() << '\n';
}

void cmd_project(const ProjectConfig& cfg, std::ostream& log) {
  if (cfg.out_path.empty()) throw ConfigError("project: --out is required");
  if (cfg.mode == ScoreMode::kFused && cfg.model_path.empty()) {
    throw ConfigError("project: fused mode needs --model");
  }
  const EmbeddingStore store = load_store(cfg.data_path);
  std::optional<FusionModel> model;
  if (cfg.mode == ScoreMode::kFused) {
    model = load_model(cfg.model_path);
    if (model->params.n_dim != store.n_dim) {
      throw DimensionError("project: model n_dim does not match store n_dim");
    }
  }
  const Pca2d pca = pca_2d(SelectEmbeddings(store, cfg.mode, model ? &*model : nullptr));
  std::ostringstream text;
  text << "speaker_id\tutterance_id\tx\ty\n";
  for (std::size_t i = 0; i < store.records.size(); ++i) {
    text << store.records[i].speaker_id << '\t' << store.records[i].utterance_id << '\t'
         << G9(pca.x[i]) << '\t' << G9(pca.y[i]) << '\n';
  }
  WriteText(cfg.out_path, text.str());
  log << "wrote " << cfg.out_path << " eigenvalues=" << G9(pca.eigenvalue1) << ','
      << G9(pca.eigenvalue2) << '\n';
}

void cmd_inspect(const std::string& data_path, std::ostream& out) {
  const EmbeddingStore store = load_store(data_path);
  out << "n_dim=" << store.n_dim << '\n'
      << "record_count=" << store.records.size() << '\n'
      << "speakers=" << store.speaker_count() << '\n';
  std::map<std::pair<NoiseType, int>, std::size_t> conditions;
  double noisy_norm = 0.0;
  double enhanced_norm = 0.0;
  for (const auto& r : store.records) {
    ++conditions[{r.noise_type, r.snr_db}];
    noisy_norm += norm2(r.noisy);
    enhanced_norm += norm2(r.enhanced);
  }
  if (!store.records.empty()) {
    const auto n = static_cast<double>(store.records.size());
    out << "mean_norm_noisy=" << G9(noisy_norm / n) << '\n'
        << "mean_norm_enhanced=" << G9(enhanced_norm / n) << '\n';
  }
  for (const auto& [key, count] : conditions) {
    out << "condition noise_type=" << noise_type_name(key.first) << " snr_db=" << key.second
        << " records=" << count << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy/enhanced speaker-embedding fusion: train, evaluate, inspect"};
  std::string config_path;  // consumed by ExpandConfig before parsing
  app.require_subcommand(1);

  TrainConfig train_cfg;
  auto* train = app.add_subcommand("train", "Train the fusion network with triplet loss");
  train->add_option("--config", config_path, "Flat key=value file; flags override it");
  train->add_option("--data", train_cfg.data_path, "Embedding store (.embs or .csv)")
      ->required();
  train->add_option("--out", train_cfg.out_model_path, "Model file to write")->required();
  train->add_option("--log", train_cfg.log_path, "Also write the epoch log here");
  train->add_option("--n-epochs", train_cfg.n_epochs)->capture_default_str();
  train->add_option("--batch-size", train_cfg.batch_size)->capture_default_str();
  train->add_option("--lr", train_cfg.lr)->capture_default_str();
  train->add_option("--margin-alpha", train_cfg.margin_alpha)->capture_default_str();
  train->add_option("--weight-decay", train_cfg.weight_decay)->capture_default_str();
  train->add_option("--seed", train_cfg.seed)->capture_default_str();
  train->add_flag("--normalize-inputs,!--no-normalize-inputs", train_cfg.normalize_inputs,
                  "L2-normalize both embeddings before the MLP (default on)");
  train->add_option("--steps-per-epoch", train_cfg.steps_per_epoch,
                    "0 = ceil(records / batch size)")
      ->capture_default_str();
  train->add_option("--threads", train_cfg.threads,
                    "Parallel batch gradient (not bit-identical to 1 thread)")
      ->capture_default_str();

  EvalConfig eval_cfg;
  std::vector<std::string> eval_modes;
  auto* eval = app.add_subcommand("eval", "EER per noise condition and scoring mode");
  eval->add_option("--config", config_path, "Flat key=value file; flags override it");
  eval->add_option("--model", eval_cfg.model_path, "Model file (needed for fused mode)");
  eval->add_option("--data", eval_cfg.data_path, "Embedding store")->required();
  eval->add_option("--trials", eval_cfg.trials_path, "Trial list")->required();
  eval->add_option("--modes", eval_modes, "noisy,enhanced,fused")
      ->delimiter(',')
      ->check(CLI::IsMember({"noisy", "enhanced", "fused"}));
  eval->add_option("--out", eval_cfg.out_path, "Also write the report here");

  SynthCommandConfig synth_cfg;
  std::vector<int> snr_grid(synth_cfg.synth.snr_grid.begin(), synth_cfg.synth.snr_grid.end());
  std::string synth_noise_type = "synthetic";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic paired-embedding store");
  synth->add_option("--config", config_path, "Flat key=value file; flags override it");
  synth->add_option("--out", synth_cfg.out_path, "Store file to write")->required();
  synth->add_option("--csv-out", synth_cfg.csv_out_path, "Also write CSV here");
  synth->add_option("--n-speakers", synth_cfg.synth.n_speakers)->capture_default_str();
  synth->add_option("--utts-per-speaker", synth_cfg.synth.utts_per_speaker)
      ->capture_default_str();
  synth->add_option("--n-dim", synth_cfg.synth.n_dim)->capture_default_str();
  synth->add_option("--snr-grid", snr_grid, "Comma-separated dB values")
      ->delimiter(',')
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.synth.seed, "Speaker seed")->capture_default_str();
  std::optional<std::uint64_t> utterance_seed;
  synth->add_option("--utterance-seed", utterance_seed,
                    "Separate seed for utterance draws (same speakers, new utterances)");
  synth->add_option("--noise-type", synth_noise_type)
      ->check(CLI::IsMember({"noise", "music", "babble", "synthetic"}))
      ->capture_default_str();
  synth->add_option("--first-speaker-id", synth_cfg.synth.first_speaker_id)
      ->capture_default_str();
  synth->add_option("--clean-spread", synth_cfg.synth.clean_spread)->capture_default_str();
  synth->add_option("--noise-base", synth_cfg.noise_base)->capture_default_str();
  synth->add_option("--residual-ratio", synth_cfg.residual_ratio)->capture_default_str();
  synth->add_option("--distortion", synth_cfg.distortion)->capture_default_str();

  TrialsConfig trials_cfg;
  auto* trials = app.add_subcommand("trials", "Draw a labeled trial list from a store");
  trials->add_option("--config", config_path, "Flat key=value file; flags override it");
  trials->add_option("--data", trials_cfg.data_path, "Embedding store")->required();
  trials->add_option("--out", trials_cfg.out_path, "Trial list to write")->required();
  trials->add_option("--n-target", trials_cfg.n_target)->capture_default_str();
  trials->add_option("--n-nontarget", trials_cfg.n_nontarget)->capture_default_str();
  trials->add_option("--seed", trials_cfg.seed)->capture_default_str();
  trials->add_flag("--per-condition,!--no-per-condition", trials_cfg.per_condition,
                   "Counts apply inside each (noise type, SNR) condition");

  ProjectConfig project_cfg;
  std::string project_mode = "noisy";
  auto* project = app.add_subcommand("project", "2-D PCA projection for plotting");
  project->add_option("--model", project_cfg.model_path, "Model file (fused mode)");
  project->add_option("--data", project_cfg.data_path, "Embedding store")->required();
  project->add_option("--mode", project_mode)
      ->check(CLI::IsMember({"noisy", "enhanced", "fused"}))
      ->capture_default_str();
  project->add_option("--out", project_cfg.out_path, "TSV file to write")->required();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print store header and statistics");
  inspect->add_option("--data", inspect_path, "Embedding store")->required();

  std::vector<std::string> args;
  try {
    args = ExpandConfig(argc, argv);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*train) {
      cmd_train(train_cfg, out);
    } else if (*eval) {
      for (const auto& m : eval_modes) eval_cfg.modes.push_back(*parse_score_mode(m));
      cmd_eval(eval_cfg, out);
    } else if (*synth) {
      synth_cfg.synth.snr_grid.clear();
      for (int s : snr_grid) {
        if (s < kMinSnrDb || s > kMaxSnrDb) {
          throw ConfigError("snr " + std::to_string(s) + " outside [-60, 60]");
        }
        synth_cfg.synth.snr_grid.push_back(static_cast<std::int16_t>(s));
      }
      synth_cfg.synth.noise_type = *parse_noise_type(synth_noise_type);
      synth_cfg.synth.utterance_seed = utterance_seed;
      cmd_synth(synth_cfg, out);
    } else if (*trials) {
      cmd_trials(trials_cfg, out);
    } else if (*project) {
      project_cfg.mode = *parse_score_mode(project_mode);
      cmd_project(project_cfg, out);
    } else if (*inspect) {
      cmd_inspect(inspect_path, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DegenerateInputError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace embfuse::cli
