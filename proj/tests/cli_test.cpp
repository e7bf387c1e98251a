#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fchq/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fchq_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct RunOutput {
  int code = -1;
  std::string output;
};

RunOutput run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / ("fchq_cli_test_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" FCHQ_BIN "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunOutput r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::vector<std::string> head;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) head.push_back(c);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(f, line)) {
    std::map<std::string, std::string> row;
    std::stringstream ls(line);
    std::string c;
    for (std::size_t i = 0; i < head.size() && std::getline(ls, c, ','); ++i) row[head[i]] = c;
    rows.push_back(row);
  }
  return rows;
}

const std::string kDefaultConfig = FCHQ_CONFIG_DIR "/default.ini";

// the default run is shared by the solve and verify tests
const fs::path& default_run() {
  static const fs::path dir = [] {
    const fs::path d = scratch("default");
    const RunOutput r = run("solve --config \"" + kDefaultConfig + "\" --out \"" + d.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.output;
    return d;
  }();
  return dir;
}

}  // namespace

TEST(CliSolve, DefaultConfigWritesAllOutputs) {
  const fs::path& d = default_run();
  for (const char* f : {"result.json", "solution.fchq", "radial_profile.csv", "pohozaev.json", "pohozaev.fchq",
                        "fixedpoint.json", "fixedpoint.fchq"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  const std::string csv = slurp(d / "radial_profile.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "r,shell_mean_u,shell_min,shell_max");
  const auto j = fchq::Json::parse(slurp(d / "result.json"));
  EXPECT_GT(j["p_mu_estimate"].get<double>(), 0.0);
}

TEST(CliSolve, AlphaAtLeastDimensionIsAConfigError) {
  const fs::path d = scratch("alpha");
  const RunOutput r = run("solve --config \"" + write_config(d, "[problem]\nalpha = 2\n").string() + "\" --out \"" +
                    d.string() + "\" --grid-n 32");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("alpha"), std::string::npos) << r.output;
}

TEST(CliSolve, MaxItersOneReportsNonConvergenceAndWritesPartialResult) {
  const fs::path d = scratch("maxit");
  const RunOutput r = run("solve --config \"" + write_config(d, "[solver]\nmax_iters = 1\n").string() + "\" --out \"" +
                    d.string() + "\" --grid-n 64");
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_TRUE(fs::exists(d / "result.json"));
  EXPECT_TRUE(fs::exists(d / "solution.fchq"));
  const auto j = fchq::Json::parse(slurp(d / "result.json"));
  EXPECT_FALSE(j["converged"].get<bool>());
}

TEST(CliSolve, UnknownFlagIsAConfigError) {
  EXPECT_EQ(run("solve --frobnicate").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("solve --config /nonexistent.ini").code, 2);
}

TEST(CliVerify, DefaultSolutionPasses) {
  const fs::path& d = default_run();
  const fs::path out = scratch("verify");
  const RunOutput r = run("verify \"" + (d / "solution.fchq").string() + "\" --out \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.output;
  const auto j = fchq::Json::parse(slurp(out / "verification.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(CliVerify, ZeroSnapshotFails) {
  const fs::path d = scratch("zeros");
  fchq::write_snapshot((d / "zero.fchq").string(), fchq::Field::zeros(fchq::make_grid(2, 16.0, 64)));
  const RunOutput r = run("verify \"" + (d / "zero.fchq").string() + "\" --out \"" + d.string() + "\"");
  EXPECT_EQ(r.code, 1) << r.output;
  const auto j = fchq::Json::parse(slurp(d / "verification.json"));
  EXPECT_FALSE(j["pohozaev_residual"]["pass"].get<bool>());
  EXPECT_TRUE(j["pohozaev_residual"].contains("note"));
}

TEST(CliVerify, CorruptAndMismatchedSnapshots) {
  const fs::path d = scratch("corrupt");
  const std::string good = fchq::encode_snapshot(fchq::Field::zeros(fchq::make_grid(2, 16.0, 16)));
  std::ofstream(d / "cut.fchq", std::ios::binary) << good.substr(0, good.size() - 5);
  EXPECT_EQ(run("verify \"" + (d / "cut.fchq").string() + "\" --out \"" + d.string() + "\"").code, 2);
  EXPECT_EQ(run("verify \"" + (d / "missing.fchq").string() + "\"").code, 2);
  std::ofstream(d / "ok.fchq", std::ios::binary) << good;
  const fs::path cfg = write_config(d, "[problem]\ndim = 1\nalpha = 0.5\ns = 0.25\n");
  EXPECT_EQ(run("verify \"" + (d / "ok.fchq").string() + "\" --config \"" + cfg.string() + "\" --out \"" +
                d.string() + "\"")
                .code,
            2);
}

TEST(CliSweep, EmptyValuesAndBadAxis) {
  const fs::path d = scratch("sweep_err");
  const fs::path cfg = write_config(d, "[sweep]\naxis = mu\nvalues =\n");
  EXPECT_EQ(run("sweep --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"").code, 2);
  EXPECT_EQ(run("sweep --axis gamma --values 1,2 --out \"" + d.string() + "\"").code, 2);
}

TEST(CliSweep, MuSweepReportsIncreasingLevels) {
  const fs::path d = scratch("sweep_mu");
  const RunOutput r = run("sweep --axis mu --values 0.5,1,2 --grid-n 128 --out \"" + d.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.output;
  const auto rows = read_csv(d / "sweep_summary.csv");
  ASSERT_EQ(rows.size(), 3u);
  std::vector<double> mu, p;
  for (const auto& row : rows) {
    mu.push_back(std::stod(row.at("mu")));
    p.push_back(std::stod(row.at("p_mu_estimate")));
  }
  EXPECT_EQ(mu, (std::vector<double>{0.5, 1.0, 2.0}));
  // recorded, not a property of the method
  RecordProperty("p_mu", std::to_string(p[0]) + " " + std::to_string(p[1]) + " " + std::to_string(p[2]));
  std::printf("p(mu) at mu = 0.5, 1, 2: %.8g %.8g %.8g\n", p[0], p[1], p[2]);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(fs::exists(d / ("mu_" + std::to_string(i)) / "result.json"));
}

// the r^-2s correction to the tail is slow at s = 0.4; L = 32 does not reach it
TEST(CliSweep, DecaySlopesTrackTheExpectedExponent) {
  const fs::path d = scratch("sweep_s");
  const RunOutput r = run("sweep --axis s --values 0.4,0.5,0.6 --box-L 64 --grid-n 1024 --out \"" +
                    d.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.output;
  const auto rows = read_csv(d / "sweep_summary.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    const double s = std::stod(row.at("s"));
    ASSERT_FALSE(row.at("decay_slope").empty()) << row.at("error");
    EXPECT_NEAR(std::stod(row.at("decay_slope")), -(2.0 + 2.0 * s), 0.3) << "s = " << s;
  }
}

TEST(CliSweep, OutputIsDeterministicAcrossWorkerCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  const std::string args = "sweep --axis mu --values 0.5,1,2 --grid-n 64 --solver both --out ";
  ASSERT_EQ(run(args + "\"" + a.string() + "\"", "FCHQ_THREADS=1").code, 0);
  ASSERT_EQ(run(args + "\"" + b.string() + "\"", "FCHQ_THREADS=3").code, 0);
  ASSERT_EQ(run(args + "\"" + c.string() + "\"", "FCHQ_THREADS=3").code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(c / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 1u + 3u * 3u);
  EXPECT_EQ(run(args + "\"" + a.string() + "\"", "FCHQ_THREADS=zero").code, 2);
}

TEST(CliIneq, SmallBatteryPasses) {
  const fs::path d = scratch("ineq");
  const RunOutput r = run("ineq --trials 10000 --out \"" + d.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.output;
  for (const char* f : {"truncation_lemma", "trunc_h_bounds", "jensen_bound", "modulus_contraction", "hls", "sobolev"})
    EXPECT_TRUE(fs::exists(d / "ineq" / (std::string(f) + ".json"))) << f;
}

TEST(CliDecay, RunsOnAnOverriddenGrid) {
  const fs::path d = scratch("decay");
  const RunOutput r = run("decay --box-L 16 --grid-n 128 --out \"" + d.string() + "\"");
  EXPECT_TRUE(r.code == 0 || r.code == 1) << r.output;
  EXPECT_TRUE(fs::exists(d / "decay.json"));
  const auto j = fchq::Json::parse(slurp(d / "decay.json"));
  EXPECT_LT(j["slope"].get<double>(), 0.0);
}
