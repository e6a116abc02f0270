#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BGSDC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bgsdc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_cfg(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kWorkTable = "experiment = work-table\n[field]\ntype = mirror\n[run]\nn_steps_ladder = 1, 3\n";

}  // namespace

TEST_F(CliTest, SuccessWritesCsvAndResolvedConfig) {
  const fs::path cfg = write_cfg("w.cfg", kWorkTable);
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run("work-table --config " + cfg.string() + " --out " + out.string()), 0);
  const std::string csv = read(out / "work-table.csv");
  EXPECT_EQ(csv.rfind("method,M,K_gmres,K_picard,n_steps,predicted_serial,predicted_parallel,measured_f_evals\n", 0),
            0u);
  EXPECT_TRUE(fs::exists(out / "work-table.resolved.cfg"));

  // Feeding the resolved file back reproduces the output byte for byte.
  const fs::path out2 = dir_ / "out2";
  ASSERT_EQ(run("work-table --config " + (out / "work-table.resolved.cfg").string() + " --out " + out2.string()), 0);
  EXPECT_EQ(read(out2 / "work-table.csv"), csv);
  EXPECT_EQ(read(out2 / "work-table.resolved.cfg"), read(out / "work-table.resolved.cfg"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  const fs::path bad = write_cfg("bad.cfg", "experiment = work-table\n[run]\nunknown_key = 1\n");
  EXPECT_EQ(run("work-table --config " + bad.string() + " --out " + dir_.string()), 2);
  EXPECT_EQ(run("work-table --config " + (dir_ / "missing.cfg").string()), 2);
  EXPECT_EQ(run("work-table"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("not-a-command --config x.cfg"), 2);
}

TEST_F(CliTest, NumericalAbortExitsThree) {
  const fs::path cfg = write_cfg("nan.cfg",
                                 "experiment = trajectory\n[field]\ntype = mirror\n"
                                 "[particle]\nx = 1, 0, 0\nv = 1e200, 0, 1e200\n[run]\nt_end = 1\nn_steps = 10\n");
  EXPECT_EQ(run("trajectory --config " + cfg.string() + " --out " + dir_.string()), 3);
}

TEST_F(CliTest, RetainNodesWritesNodeTable) {
  const fs::path cfg = write_cfg("t.cfg",
                                 "experiment = trajectory\n[run]\nt_end = 0.01\nn_steps = 5\n");
  ASSERT_EQ(run("trajectory --config " + cfg.string() + " --out " + dir_.string() + " --retain-nodes"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "trajectory.nodes.csv"));
}
