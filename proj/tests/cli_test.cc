// Copyright 2026 The ppriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "ppriv_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout captured to a file; returns the exit code.
  int run(const std::string& args, const std::string& out_name = "out.txt") {
    const std::string cmd = std::string(PPRIV_CLI_PATH) + " " + args + " >" +
                            (dir_ / out_name).string() + " 2>" + (dir_ / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string slurp(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path couplet_graph() {
    return write("graph.json", R"({
      "epsilon": 0.6931471805599453,
      "profiles": [{"id": "a", "dist": [0.8, 0.2]}, {"id": "b", "dist": [0.2, 0.8]}],
      "edges": [["a", "b"]]
    })");
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthesizeThenVerifyPasses) {
  const auto graph = couplet_graph();
  const auto mech = (dir_ / "mech.json").string();
  ASSERT_EQ(run("synthesize --graph " + graph.string() + " --algorithm smooth-onebit --output " + mech), 0);
  EXPECT_TRUE(fs::exists(mech));
  EXPECT_EQ(run("verify --graph " + graph.string() + " --mechanism " + mech), 0);
  const std::string report = slurp("out.txt");
  EXPECT_NE(report.find("\"pass\": true"), std::string::npos);
}

TEST_F(CliTest, EveryAlgorithmSynthesizesAndVerifies) {
  const auto graph = couplet_graph();
  for (const std::string algo : {"cluster", "smooth-onebit", "ldp"}) {
    const std::string mech = (dir_ / (algo + ".json")).string();
    ASSERT_EQ(run("synthesize --graph " + graph.string() + " --algorithm " + algo +
                  " --output " + mech),
              0)
        << algo;
    EXPECT_EQ(run("verify --graph " + graph.string() + " --mechanism " + mech), 0) << algo;
  }
}

TEST_F(CliTest, VerifyFailsOnLeakyMechanism) {
  // Identity matrices over a nontrivial edge at eps=0.1 leak everything.
  const auto graph = write("g.json", R"({
    "epsilon": 0.1,
    "profiles": [{"id": "a", "dist": [1.0, 0.0]}, {"id": "b", "dist": [0.0, 1.0]}],
    "edges": [["a", "b"]]
  })");
  const auto mech = write("identity.json",
                          R"({"epsilon": 0.1, "graph_hash": "0", "matrices": [[1,0,0,1], [1,0,0,1]]})");
  EXPECT_EQ(run("verify --graph " + graph.string() + " --mechanism " + mech.string()), 1);
}

TEST_F(CliTest, VerifyCsvFormat) {
  const auto graph = couplet_graph();
  const auto mech = (dir_ / "mech.json").string();
  ASSERT_EQ(run("synthesize --graph " + graph.string() + " --algorithm cluster --output " + mech), 0);
  ASSERT_EQ(run("verify --graph " + graph.string() + " --mechanism " + mech + " --format csv"), 0);
  const std::string csv = slurp("out.txt");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "profile_a,profile_b,worst_output,max_abs_log_ratio,infinite");
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("frobnicate"), 2);                       // unknown subcommand
  EXPECT_EQ(run("synthesize --graph missing.json"), 2);  // missing required flags
  const auto graph = couplet_graph();
  EXPECT_EQ(run("synthesize --graph " + graph.string() + " --algorithm nope --output x.json"), 2);
  EXPECT_EQ(run("synthesize --graph " + (dir_ / "absent.json").string() +
                " --algorithm cluster --output x.json"),
            2);
  EXPECT_EQ(run(""), 2);  // a subcommand is required
}

TEST_F(CliTest, SampleIsSeedReproducible) {
  const auto graph = couplet_graph();
  const auto mech = (dir_ / "mech.json").string();
  ASSERT_EQ(run("synthesize --graph " + graph.string() + " --algorithm smooth-onebit --output " + mech), 0);
  const std::string cmd = "sample --graph " + graph.string() + " --mechanism " + mech +
                          " --profile a --value 1 --seed 42";
  ASSERT_EQ(run(cmd, "s1.txt"), 0);
  ASSERT_EQ(run(cmd, "s2.txt"), 0);
  EXPECT_EQ(slurp("s1.txt"), slurp("s2.txt"));
  const std::string v = slurp("s1.txt");
  EXPECT_TRUE(v == "0\n" || v == "1\n");
}

TEST_F(CliTest, SampleRejectsForeignMechanismAndBadInputs) {
  const auto graph = couplet_graph();
  const auto mech = (dir_ / "mech.json").string();
  ASSERT_EQ(run("synthesize --graph " + graph.string() + " --algorithm cluster --output " + mech), 0);
  // A graph with different epsilon hashes differently.
  const auto other = write("other.json", R"({
    "epsilon": 1.0,
    "profiles": [{"id": "a", "dist": [0.8, 0.2]}, {"id": "b", "dist": [0.2, 0.8]}],
    "edges": [["a", "b"]]
  })");
  EXPECT_EQ(run("sample --graph " + other.string() + " --mechanism " + mech +
                " --profile a --value 1 --seed 1"),
            2);
  EXPECT_EQ(run("sample --graph " + graph.string() + " --mechanism " + mech +
                " --profile zz --value 1 --seed 1"),
            2);
  EXPECT_EQ(run("sample --graph " + graph.string() + " --mechanism " + mech +
                " --profile a --value 9 --seed 1"),
            2);
}

TEST_F(CliTest, ExperimentWritesParsableCsv) {
  const auto out = (dir_ / "couplet.csv").string();
  ASSERT_EQ(run("experiment --name bernoulli-couplet --output " + out +
                " --epsilons 0.5,1.0 --p-grid 0,0.5,1"),
            0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "epsilon,p_i,p_j,alpha_ours,alpha_ldp");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 2 * 6);  // 2 epsilons x 6 unordered pairs
}

TEST_F(CliTest, ExperimentRunsAreByteIdentical) {
  const auto a = (dir_ / "a.csv").string();
  const auto b = (dir_ / "b.csv").string();
  const std::string flags = "experiment --name categorical-chain --epsilons 0.3,0.8,2.0 --output ";
  ASSERT_EQ(run(flags + a), 0);
  ASSERT_EQ(run(flags + b), 0);
  std::ifstream fa(a), fb(b);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_FALSE(sa.str().empty());
}

TEST_F(CliTest, UnknownExperimentIsUsageError) {
  EXPECT_EQ(run("experiment --name nope --output x.csv"), 2);
}

}  // namespace
