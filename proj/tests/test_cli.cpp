#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracvolt/cli.hpp"
#include "fracvolt/fracops.hpp"
#include "fracvolt/report.hpp"

using namespace fracvolt;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fracvolt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string example(const char* name) { return std::string(FRACVOLT_EXAMPLES_DIR) + "/" + name; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fracvolt_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

Json strip_timestamp(Json j) {
  j.erase("generated_at");
  return j;
}

}  // namespace

TEST_F(CliTest, ZeroDataRunWritesZeros) {
  const CliResult r = cli({"run", "--config", example("zero_data.toml"), "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const TraceTable t = read_trace_csv_file((dir_ / "trace.csv").string());
  EXPECT_EQ(t.values.rows(), 8);
  EXPECT_EQ(t.values.cols(), 65);
  EXPECT_EQ(t.values.cwiseAbs().maxCoeff(), 0.0);
  std::ifstream js(dir_ / "summary.json");
  const Json summary = Json::parse(js);
  for (const char* key : {"residual_max", "wall_seconds", "flops", "diagnostics", "generated_at"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
}

TEST_F(CliTest, SubdiffusionMatchesMittagLeffler) {
  const CliResult r = cli({"run", "--config", example("subdiffusion.toml"), "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const TraceTable t = read_trace_csv_file((dir_ / "trace.csv").string());
  Scalar err = 0.0;
  for (std::size_t n = 0; n < t.times.size(); ++n) {
    const Scalar e = mittag_leffler(0.5, -M_PI * M_PI * std::sqrt(t.times[n]));
    err = std::max(err, std::abs(t.values(0, static_cast<Index>(n)) - e));
  }
  EXPECT_LE(err, 1e-3);
}

TEST_F(CliTest, RescaledRunSucceeds) {
  const CliResult r =
      cli({"run", "--config", example("advection_reaction.toml"), "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream js(dir_ / "summary.json");
  const Json summary = Json::parse(js);
  EXPECT_LT(summary["time_rescale_factor"].get<double>(), 1.0);
}

TEST_F(CliTest, InvalidAlphaIsUsageError) {
  const std::string cfg = write("bad.toml", "alpha = 1.5\n");
  const CliResult r = cli({"run", "--config", cfg, "--out", dir_.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("alpha"), std::string::npos);
  EXPECT_NE(r.err.find("(0, 1]"), std::string::npos);
}

TEST_F(CliTest, UnknownKeyIsUsageError) {
  const std::string cfg = write("bad.toml", "[source]\nu_0 = \"0\"\n");
  const CliResult r = cli({"run", "--config", cfg});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("source.u_0"), std::string::npos);
}

TEST_F(CliTest, IoFailures) {
  EXPECT_EQ(cli({"run", "--config", (dir_ / "missing.toml").string()}).code, kExitIo);
  const std::string blocker = write("blocker", "x");
  EXPECT_EQ(cli({"run", "--config", example("zero_data.toml"), "--out", blocker + "/sub"}).code,
            kExitIo);
}

TEST_F(CliTest, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"verify", "everything"}).code, kExitUsage);
  EXPECT_EQ(cli({"verify", "lemmas", "--alpha", "1.5"}).code, kExitUsage);
  EXPECT_EQ(cli({"run"}).code, kExitUsage);
}

TEST_F(CliTest, DumpConfigRoundTrip) {
  const CliResult r = cli({"run", "--config", example("advection_reaction.toml"), "--dump-config"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(parse_run_config(r.out), load_run_config(example("advection_reaction.toml")));
}

TEST_F(CliTest, VerifyLemmasPassesAndIsDeterministic) {
  const CliResult a = cli({"verify", "lemmas", "--seed", "42", "--alpha", "0.5"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const CliResult b = cli({"verify", "lemmas", "--seed", "42", "--alpha", "0.5"});
  EXPECT_EQ(strip_timestamp(Json::parse(a.out)).dump(), strip_timestamp(Json::parse(b.out)).dump());
  const CliResult c = cli({"verify", "lemmas", "--seed", "43", "--alpha", "0.5", "--draws", "5"});
  EXPECT_EQ(c.code, kExitOk);
  EXPECT_NE(strip_timestamp(Json::parse(a.out)).dump(), strip_timestamp(Json::parse(c.out)).dump());
}

TEST_F(CliTest, VerifyReportFile) {
  const std::string path = (dir_ / "report.json").string();
  const CliResult r = cli({"verify", "oracle", "--alpha", "0.5", "--report", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const Json j = Json::parse(in);
  EXPECT_EQ(j["suite"], "oracle");
  EXPECT_FALSE(j["checks"].empty());
}

TEST_F(CliTest, VerifySolverPasses) {
  const CliResult r = cli({"verify", "solver", "--alpha", "0.5"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  std::vector<std::string> names;
  for (const auto& c : j["checks"]) names.push_back(c["name"]);
  for (const char* key : {"zero_data", "mode_decoupling", "scheme_equivalence"}) {
    bool found = false;
    for (const auto& n : names) found = found || n.find(key) != std::string::npos;
    EXPECT_TRUE(found) << key;
  }
}

TEST_F(CliTest, ConvergenceSubdiffusion) {
  const std::string csv = (dir_ / "conv.csv").string();
  const CliResult r = cli({"convergence", "--config", example("subdiffusion.toml"), "--grid",
                           "128,256,512,1024", "--out", csv});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,error,order");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (rows > 1) {
      const Scalar order = std::stod(line.substr(line.rfind(',') + 1));
      EXPECT_GE(order, 1.0);
    }
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(CliTest, ConvergenceOrderTwoAtAlphaOne) {
  const std::string cfg = write(
      "heat.toml",
      "alpha = 1.0\ngrading = 1\n[source]\nu0 = \"1.4142135623730951*sin(3.141592653589793*x)\"\n");
  const CliResult r = cli({"convergence", "--config", cfg, "--grid", "64,128,256,512"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  while (std::getline(in, line)) {
    EXPECT_NEAR(std::stod(line.substr(line.rfind(',') + 1)), 2.0, 0.1);
  }
}

TEST_F(CliTest, ConvergenceGridErrors) {
  EXPECT_EQ(cli({"convergence", "--config", example("subdiffusion.toml"), "--grid", "128"}).code,
            kExitUsage);
  EXPECT_EQ(
      cli({"convergence", "--config", example("subdiffusion.toml"), "--grid", "256,128,512"}).code,
      kExitUsage);
}
