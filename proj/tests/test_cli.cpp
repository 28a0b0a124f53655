#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kCli = GPSPLIT_CLI;
const std::string kConfigs = GPSPLIT_CONFIGS;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gpsplit_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = "'" + kCli + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return "'" + kConfigs + "/" + name + "'"; }

TEST(Cli, SuccessfulEvolveWritesArtifacts) {
  const fs::path out = scratch("ok");
  EXPECT_EQ(run("evolve --config " + config("evolve_linear_1d.yaml") + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "diagnostics.csv"));
  EXPECT_TRUE(fs::exists(out / "final.gpss"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(Cli, ExperimentSubcommand) {
  const fs::path out = scratch("experiment");
  EXPECT_EQ(run("experiment --config " + config("order_sweep_1d.yaml") + " --out " + out.string() +
                " --workers 2 --override 'run.taus=[0.125, 0.0625]' --override grid.points=128"),
            0);
  EXPECT_TRUE(fs::exists(out / "order_slopes.csv"));
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "bad.yaml") << "problem: {alpha: -0.5, betta: 0.5}\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run("evolve --config " + (dir / "bad.yaml").string() + out), 2);
  EXPECT_EQ(run("evolve --config " + config("evolve_linear_1d.yaml") + " --override run.bogus=1" + out), 2);
  EXPECT_EQ(run("experiment --config " + config("evolve_linear_1d.yaml") + out), 2);
  EXPECT_EQ(run("evolve" + out), 2);
  EXPECT_EQ(run("launch --config " + config("evolve_linear_1d.yaml")), 2);
  EXPECT_EQ(run("evolve --config " + config("evolve_linear_1d.yaml") + " --workers 0" + out), 2);
}

TEST(Cli, DivergenceExitsWithThree) {
  const fs::path out = scratch("diverge");
  EXPECT_EQ(run("groundstate --config " + config("groundstate_nonlinear_1d.yaml") + " --out " +
                out.string() + " --override run.adaptive=false --override run.method=blanes_moan4"),
            3);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(Cli, IoErrorsExitWithFour) {
  const fs::path dir = scratch("io");
  EXPECT_EQ(run("evolve --config " + (dir / "missing.yaml").string()), 4);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("evolve --config " + config("evolve_linear_1d.yaml") + " --out " +
                (dir / "file" / "sub").string()),
            4);
}

}  // namespace
