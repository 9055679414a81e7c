// Copyright 2026 The cgain Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cgain_test_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(CGAIN_CLI_PATH) + " " + args + " >" + path("stdout.txt") + " 2>" +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

TEST_F(Cli, EndToEndPipeline) {
  ASSERT_EQ(run("generate-data --out " + path("d") + " --n-samples 120 --n-features 4 --tied-features 1 --seed 3"), 0);
  ASSERT_EQ(run("mask --in " + path("d") + " --out " + path("m") + " --rate 0.3 --seed 4"), 0);
  EXPECT_NE(read("stdout.txt").find("x0"), std::string::npos);
  write("cfg.txt", "[classifier_gain]\nepochs = 2\nbatch_size = 32\n[gain]\nepochs = 2\n");
  for (const char* method : {"simple", "mice", "gain"})
    EXPECT_EQ(run("impute --in " + path("m") + " --out " + path(std::string(method) + ".csv") + " --method " +
                  method + " --config " + path("cfg.txt")),
              0)
        << read("stderr.txt");
  ASSERT_EQ(run("train --in " + path("m") + " --out " + path("model.txt") + " --config " + path("cfg.txt") +
                " --history " + path("hist.csv")),
            0)
      << read("stderr.txt");
  EXPECT_EQ(read("hist.csv").substr(0, 5), "epoch");
  ASSERT_EQ(run("predict --model " + path("model.txt") + " --in " + path("m") + " --out " + path("pred.csv") +
                " --draws 2"),
            0)
      << read("stderr.txt");
  EXPECT_NE(read("pred.csv").find("y_hat"), std::string::npos);
  ASSERT_EQ(run("export-density --in " + path("d") + " --feature x1 --out " + path("dens.csv")), 0);
  EXPECT_NE(read("dens.csv").find("density,x1,0"), std::string::npos);
}

TEST_F(Cli, SweepAndReportAreReproducible) {
  write("cfg.txt",
        "[data]\nn_samples = 120\nn_features = 3\n[sweep]\nmissing_rates = 0.2\nseeds = 1, 2\n"
        "methods = simple, mice, upper_bound\n[classifier]\nepochs = 2\n");
  ASSERT_EQ(run("sweep --config " + path("cfg.txt") + " --out " + path("a") + " --workers 2"), 0) << read("stderr.txt");
  ASSERT_EQ(run("sweep --config " + path("cfg.txt") + " --out " + path("b") + " --workers 1"), 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
  EXPECT_EQ(read("a.md"), read("b.md"));
  ASSERT_EQ(run("report --in " + path("a.json") + " --out " + path("c")), 0);
  EXPECT_EQ(read("c.md"), read("a.md"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("sweep"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("sweep --config " + path("missing.txt") + " --out " + path("x")), 2);
  write("bad.txt", "[gain]\nalpah = 1\n");
  EXPECT_EQ(run("sweep --config " + path("bad.txt") + " --out " + path("x")), 2);
  EXPECT_NE(read("stderr.txt").find("alpah"), std::string::npos);
  write("bad.csv", "a,b,label\n1,2,0\n1,zz,1\n");
  EXPECT_EQ(run("generate-data --csv " + path("bad.csv") + " --out " + path("x")), 3);
  EXPECT_EQ(run("mask --in " + path("nothing") + " --out " + path("x") + " --rate 0.2"), 3);
  ASSERT_EQ(run("generate-data --out " + path("d") + " --n-samples 40 --n-features 2"), 0);
  EXPECT_EQ(run("export-density --in " + path("d") + " --feature nope --out " + path("x.csv")), 2);
  write("huge.csv", "a,b,label\n1e308,1,0\n-1e308,2,1\n0,3,0\n5,4,1\n");
  ASSERT_EQ(run("generate-data --csv " + path("huge.csv") + " --out " + path("h")), 0) << read("stderr.txt");
  EXPECT_EQ(run("impute --in " + path("h") + " --out " + path("h.csv") + " --method gain"), 4) << read("stderr.txt");
}

TEST_F(Cli, WorkerEnvironmentVariableIsValidated) {
  write("cfg.txt", "[data]\nn_samples = 60\nn_features = 2\n[sweep]\nmissing_rates = 0.2\nseeds = 1\n"
                   "methods = simple\n[classifier]\nepochs = 1\n");
  EXPECT_EQ(run("sweep --config " + path("cfg.txt") + " --out " + path("a")), 0);
  ::setenv("CGAIN_WORKERS", "lots", 1);
  EXPECT_EQ(run("sweep --config " + path("cfg.txt") + " --out " + path("a")), 2);
  ::unsetenv("CGAIN_WORKERS");
}

}  // namespace
