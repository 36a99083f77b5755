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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "embfuse/binary_io.h"
#include "embfuse/errors.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace embfuse::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "embfuse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

class CliTest : public ::testing::Test {
 protected:
  std::string Path(const std::string& name) {
    const std::string p = testing::TempPath(std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" + name);
    created_.push_back(p);
    return p;
  }
  void TearDown() override {
    for (const auto& p : created_) std::filesystem::remove(p);
  }
  // Small default-shaped store.
  std::string SmallStore() {
    const std::string p = Path("small.embs");
    const Result r = Invoke({"synth", "--out", p, "--n-speakers", "6", "--utts-per-speaker", "4",
                          "--n-dim", "8"});
    EXPECT_EQ(r.code, kOk) << r.err;
    return p;
  }

 private:
  std::vector<std::string> created_;
};

TEST_F(CliTest, SynthHeaderMatchesConfig) {
  const std::string p = Path("s.embs");
  ASSERT_EQ(Invoke({"synth", "--out", p, "--n-speakers", "7", "--utts-per-speaker", "3",
                 "--n-dim", "12", "--snr-grid", "5,0,-5"}).code, kOk);
  const auto bytes = read_file_bytes(p);
  ByteReader r(bytes, "test");
  EXPECT_EQ(r.get_bytes(4), "EMBS");
  EXPECT_EQ(r.get_u32(), 1u);
  EXPECT_EQ(r.get_u32(), 12u);
  EXPECT_EQ(r.get_u64(), 7u * 3 * 3);
}

TEST_F(CliTest, SynthDefaultHeader) {
  const std::string p = Path("default.embs");
  ASSERT_EQ(Invoke({"synth", "--out", p}).code, kOk);
  const EmbeddingStore s = read_store(p);
  EXPECT_EQ(s.n_dim, 64u);
  EXPECT_EQ(s.records.size(), 50u * 20 * 5);
  EXPECT_EQ(s.speaker_count(), 50u);
}

TEST_F(CliTest, SynthIsBitIdenticalForSameSeed) {
  const std::string a = Path("a.embs"), b = Path("b.embs"), c = Path("c.embs");
  ASSERT_EQ(Invoke({"synth", "--out", a, "--n-speakers", "4"}).code, kOk);
  ASSERT_EQ(Invoke({"synth", "--out", b, "--n-speakers", "4"}).code, kOk);
  ASSERT_EQ(Invoke({"synth", "--out", c, "--n-speakers", "4", "--seed", "1"}).code, kOk);
  EXPECT_EQ(Slurp(a), Slurp(b));
  EXPECT_NE(Slurp(a), Slurp(c));
}

TEST_F(CliTest, SynthSnrHistogramMatchesGrid) {
  const std::string p = Path("h.embs");
  ASSERT_EQ(Invoke({"synth", "--out", p, "--n-speakers", "3", "--utts-per-speaker", "7",
                 "--snr-grid", "10,-3,-20,-40"}).code, kOk);
  std::map<int, int> hist;
  for (const auto& r : read_store(p).records) ++hist[r.snr_db];
  const std::map<int, int> want{{10, 21}, {-3, 21}, {-20, 21}, {-40, 21}};
  EXPECT_EQ(hist, want);
}

TEST_F(CliTest, SynthCsvCopyMatchesBinary) {
  const std::string p = Path("x.embs"), csv = Path("x.csv");
  ASSERT_EQ(Invoke({"synth", "--out", p, "--csv-out", csv, "--n-speakers", "2", "--n-dim", "4"}).code,
            kOk);
  EXPECT_EQ(load_store(csv), read_store(p));
}

TEST_F(CliTest, TrainTwiceSameModelBytes) {
  const std::string data = SmallStore();
  const std::string m1 = Path("m1.efus"), m2 = Path("m2.efus");
  ASSERT_EQ(Invoke({"train", "--data", data, "--out", m1, "--n-epochs", "2"}).code, kOk);
  ASSERT_EQ(Invoke({"train", "--data", data, "--out", m2, "--n-epochs", "2"}).code, kOk);
  EXPECT_EQ(Slurp(m1), Slurp(m2));
}

TEST_F(CliTest, TrainLogsOneLinePerEpoch) {
  const std::string data = SmallStore();
  const std::string m = Path("m.efus"), log = Path("train.log");
  const Result r = Invoke({"train", "--data", data, "--out", m, "--n-epochs", "3", "--log", log});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(Slurp(log), r.out);
  EXPECT_NE(r.out.find("epoch 3/3 mean_loss="), std::string::npos);
  EXPECT_EQ(r.out.find("epoch 4/"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndOverrides) {
  const std::string data = SmallStore();
  const std::string cfg = Path("train.cfg");
  std::ofstream(cfg) << "# training config\n"
                     << "data = " << data << "\n"
                     << "n_epochs = 2\n"
                     << "batch-size = 8\n"
                     << "seed = 5\n"
                     << "normalize_inputs = false\n";
  const std::string from_file = Path("f.efus"), from_flags = Path("g.efus"),
                    overridden = Path("o.efus");
  ASSERT_EQ(Invoke({"train", "--config", cfg, "--out", from_file}).code, kOk);
  ASSERT_EQ(Invoke({"train", "--data", data, "--out", from_flags, "--n-epochs", "2",
                 "--batch-size", "8", "--seed", "5", "--no-normalize-inputs"}).code, kOk);
  EXPECT_EQ(Slurp(from_file), Slurp(from_flags));
  EXPECT_FALSE(load_model(from_file).normalize_inputs);
  // Command-line values win over the file.
  ASSERT_EQ(Invoke({"train", "--config", cfg, "--out", overridden, "--seed", "7"}).code, kOk);
  EXPECT_NE(Slurp(overridden), Slurp(from_file));
  ASSERT_EQ(Invoke({"train", "--data", data, "--out", from_flags, "--n-epochs", "2",
                 "--batch-size", "8", "--seed", "7", "--no-normalize-inputs"}).code, kOk);
  EXPECT_EQ(Slurp(overridden), Slurp(from_flags));
}

TEST_F(CliTest, ConfigFileErrors) {
  const std::string cfg = Path("bad.cfg");
  std::ofstream(cfg) << "n_epochs\n";
  EXPECT_EQ(Invoke({"train", "--config", cfg, "--out", Path("m")}).code, kUsageError);
  EXPECT_EQ(Invoke({"train", "--config", Path("missing.cfg"), "--out", Path("m")}).code,
            kUsageError);
}

// Two speakers with identical embeddings in every utterance: any scoring
// mode separates them perfectly.
std::string WriteSeparableStore(const std::string& path) {
  EmbeddingStore s;
  s.n_dim = 4;
  for (std::uint32_t i = 0; i < 8; ++i) {
    const Vec v = i < 4 ? Vec{1, 0.2, 0, 0} : Vec{0, 0, 1, 0.3};
    s.records.push_back(testing::MakePair(i / 4, i, v, v, static_cast<std::int16_t>(i % 2 ? -5 : 0)));
  }
  write_store(s, path);
  return path;
}

TEST_F(CliTest, EvalSeparableStoreGivesZeroEer) {
  const std::string data = WriteSeparableStore(Path("sep.embs"));
  const std::string trials = Path("sep.trials"), model = Path("sep.efus");
  ASSERT_EQ(Invoke({"trials", "--data", data, "--out", trials, "--n-target", "12",
                 "--n-nontarget", "16"}).code, kOk);
  ASSERT_EQ(Invoke({"train", "--data", data, "--out", model, "--n-epochs", "1"}).code, kOk);
  std::ostringstream sink;
  const EvalReport report = cmd_eval({model, data, trials, {}, ""}, sink);
  EXPECT_EQ(report.modes.size(), 3u);
  ASSERT_FALSE(report.rows.empty());
  for (const ConditionEer& row : report.rows) EXPECT_EQ(row.eer, 0.0);
  EXPECT_NE(sink.str().find("eer_percent=0.0000"), std::string::npos);
}

TEST_F(CliTest, EvalNoisyNeedsNoModelAndMatchesLibrary) {
  const std::string data = SmallStore();
  const std::string trials = Path("t.trials"), report_path = Path("report.txt");
  ASSERT_EQ(Invoke({"trials", "--data", data, "--out", trials, "--n-target", "20",
                 "--n-nontarget", "60", "--per-condition"}).code, kOk);
  const Result r = Invoke({"eval", "--data", data, "--trials", trials, "--modes", "noisy",
                        "--out", report_path});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(Slurp(report_path), r.out);

  const EmbeddingStore store = read_store(data);
  const TrialList list = read_trials(trials);
  const ScoreSet all = score_trials(store, list, nullptr, ScoreMode::kNoisy);
  std::map<int, ScoreSet> by_snr;
  for (std::size_t i = 0; i < list.trials.size(); ++i) {
    by_snr[store.records[list.trials[i].test_utterance].snr_db].push_back(all.scores[i],
                                                                          all.labels[i]);
  }
  ASSERT_EQ(by_snr.size(), 5u);
  for (const auto& [snr, set] : by_snr) {
    char line[128];
    std::snprintf(line, sizeof(line), "snr_db=%d mode=noisy eer_percent=%.4f", snr,
                  100.0 * compute_eer(set).eer);
    EXPECT_NE(r.out.find(line), std::string::npos) << line;
  }
}

TEST_F(CliTest, ProjectWritesTable) {
  const std::string data = SmallStore();
  const std::string out = Path("proj.tsv");
  ASSERT_EQ(Invoke({"project", "--data", data, "--mode", "enhanced", "--out", out}).code, kOk);
  std::istringstream in(Slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "speaker_id\tutterance_id\tx\ty");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6 * 4 * 5);
}

TEST_F(CliTest, InspectPrintsHeader) {
  const std::string data = SmallStore();
  const Result r = Invoke({"inspect", "--data", data});
  ASSERT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("n_dim=8\nrecord_count=120\nspeakers=6\n"), std::string::npos);
  EXPECT_NE(r.out.find("condition noise_type=synthetic snr_db=-20 records=24"),
            std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Invoke({}).code, kUsageError);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kUsageError);
  EXPECT_EQ(Invoke({"synth"}).code, kUsageError);  // missing --out
  EXPECT_EQ(Invoke({"synth", "--out", Path("x"), "--n-speakers", "0"}).code, kUsageError);
  EXPECT_EQ(Invoke({"--help"}).code, kOk);

  // Data errors: missing or corrupted store.
  EXPECT_EQ(Invoke({"inspect", "--data", Path("nope.embs")}).code, kDataError);
  const std::string data = SmallStore();
  auto bytes = read_file_bytes(data);
  bytes[30] ^= 0xff;
  const std::string broken = Path("broken.embs");
  write_file_bytes(broken, bytes);
  const Result r = Invoke({"inspect", "--data", broken});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("checksum"), std::string::npos) << r.err;

  // Fused mode without a model is a usage error.
  const std::string trials = Path("t.trials");
  ASSERT_EQ(Invoke({"trials", "--data", data, "--out", trials, "--n-target", "5",
                 "--n-nontarget", "5"}).code, kOk);
  EXPECT_EQ(Invoke({"eval", "--data", data, "--trials", trials, "--modes", "fused"}).code,
            kUsageError);

  // Numerical failure: an all-zero model fuses every utterance to zero.
  const std::string zero = Path("zero.efus");
  save_model(FusionModel{FusionParams::Zeros(8), true}, zero);
  EXPECT_EQ(Invoke({"eval", "--data", data, "--trials", trials, "--model", zero}).code,
            kNumericalError);

  // Model/store dimension clash.
  const std::string other = Path("other.efus");
  Rng rng(1);
  save_model(FusionModel{init_params(5, rng), true}, other);
  EXPECT_EQ(Invoke({"eval", "--data", data, "--trials", trials, "--model", other}).code,
            kDataError);
}

}  // namespace
}  // namespace embfuse::cli
