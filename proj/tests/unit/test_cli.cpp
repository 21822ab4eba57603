#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int drowsyctl(const std::string& args) {
  const std::string cmd = std::string(DROWSYCTL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("drowsyctl_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string d(const std::string& sub) const { return (dir_ / sub).string(); }
  fs::path dir_;
};

TEST_F(Cli, SimulateIsByteIdenticalForSameSeed) {
  const std::string args = "simulate --scenario alert:20000,drowsy:20000";
  ASSERT_EQ(drowsyctl("--seed 7 --out-dir " + d("a") + " " + args), 0);
  ASSERT_EQ(drowsyctl("--seed 7 --out-dir " + d("b") + " " + args), 0);
  ASSERT_EQ(drowsyctl("--seed 8 --out-dir " + d("c") + " " + args), 0);
  EXPECT_EQ(slurp(d("a/detections.jsonl")), slurp(d("b/detections.jsonl")));
  EXPECT_EQ(slurp(d("a/ground_truth.txt")), slurp(d("b/ground_truth.txt")));
  EXPECT_NE(slurp(d("a/detections.jsonl")), slurp(d("c/detections.jsonl")));
  EXPECT_TRUE(fs::exists(d("a/manifest_simulate.json")));
}

TEST_F(Cli, TrainOnSimulatedOutput) {
  ASSERT_EQ(drowsyctl("--seed 3 --out-dir " + d("sim") + " simulate --scenario alert:60000,drowsy:60000"), 0);
  ASSERT_EQ(drowsyctl("--seed 3 --out-dir " + d("model") + " train --epochs 8 --window-stride 5 --detections " +
                      d("sim/detections.jsonl") + " --labels " + d("sim/ground_truth.txt")),
            0);
  EXPECT_TRUE(fs::exists(d("model/model.ckpt")));
  std::istringstream trace(slurp(d("model/loss_trace.tsv")));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "epoch\ttrain_loss\tvalidation_loss\tvalidation_accuracy");
  std::vector<double> losses;
  while (std::getline(trace, line)) {
    std::istringstream row(line);
    std::size_t epoch;
    double loss;
    row >> epoch >> loss;
    losses.push_back(loss);
  }
  ASSERT_EQ(losses.size(), 8u);
  // Downward trend: the second half averages below the first epoch.
  double tail = 0;
  for (std::size_t i = 4; i < 8; ++i) tail += losses[i] / 4;
  EXPECT_LT(tail, losses.front());

  // The checkpoint drives run, eval and compare.
  ASSERT_EQ(drowsyctl("--out-dir " + d("run") + " run --checkpoint " + d("model/model.ckpt") + " --input " +
                      d("sim/detections.jsonl")),
            0);
  std::istringstream events(slurp(d("run/events.jsonl")));
  std::size_t n = 0;
  while (std::getline(events, line)) ++n;
  EXPECT_EQ(n, 1200u);
  EXPECT_NE(slurp(d("run/summary.json")).find("\"drops\":0"), std::string::npos);
  EXPECT_EQ(drowsyctl("--out-dir " + d("eval") + " eval --checkpoint " + d("model/model.ckpt") + " --detections " +
                      d("sim/detections.jsonl") + " --labels " + d("sim/ground_truth.txt")),
            0);
  EXPECT_NE(slurp(d("eval/report.txt")).find("lstm.accuracy"), std::string::npos);
  EXPECT_EQ(drowsyctl("--out-dir " + d("cmp") + " compare --checkpoint " + d("model/model.ckpt") + " --detections " +
                      d("sim/detections.jsonl")),
            0);
  EXPECT_TRUE(fs::exists(d("cmp/trace.tsv")));
}

TEST_F(Cli, ExtractWritesSeries) {
  ASSERT_EQ(drowsyctl("--out-dir " + d("sim") + " simulate --scenario alert:6000"), 0);
  ASSERT_EQ(drowsyctl("--out-dir " + d("x") + " extract --input " + d("sim/detections.jsonl")), 0);
  std::istringstream series(slurp(d("x/series.txt")));
  std::string line;
  std::size_t n = 0;
  while (std::getline(series, line)) ++n;
  EXPECT_EQ(n, 60u);
}

TEST_F(Cli, ConfigFileSuppliesDefaults) {
  std::ofstream(d("cfg.ini")) << "seed=7\n[simulate]\nscenario=\"alert:6000\"\n";
  ASSERT_EQ(drowsyctl("--config " + d("cfg.ini") + " --out-dir " + d("a") + " simulate"), 0);
  ASSERT_EQ(drowsyctl("--seed 7 --out-dir " + d("b") + " simulate --scenario alert:6000"), 0);
  EXPECT_EQ(slurp(d("a/detections.jsonl")), slurp(d("b/detections.jsonl")));
  // Command line wins over the file.
  ASSERT_EQ(drowsyctl("--config " + d("cfg.ini") + " --seed 9 --out-dir " + d("c") + " simulate"), 0);
  EXPECT_NE(slurp(d("a/detections.jsonl")), slurp(d("c/detections.jsonl")));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(drowsyctl("run --input x.jsonl"), 1);  // missing --checkpoint
  EXPECT_EQ(drowsyctl("bogus"), 1);
  EXPECT_EQ(drowsyctl("--help"), 0);
  std::ofstream(d("bad.ckpt")) << "not a checkpoint";
  EXPECT_EQ(drowsyctl("--out-dir " + d("o") + " run --checkpoint " + d("bad.ckpt")), 2);
  EXPECT_EQ(drowsyctl("--out-dir " + d("o") + " simulate --scenario sleepy:100"), 2);
}

}  // namespace
