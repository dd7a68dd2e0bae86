#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PBSIM_CLI_PATH;
const std::string kConfigs = std::string(PBSIM_SOURCE_DIR) + "/configs/";

int run(const std::string& args, const std::string& out_file = "") {
  std::string cmd = kCli + " " + args;
  cmd += out_file.empty() ? " >/dev/null 2>&1" : " >" + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pbsim_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

const char* kSmallCoGate = R"(
scenario = "phase-gate-co"
[physics]
omega1_mhz = 5.0
g_p_mhz = 20000.0
gamma_mhz = 3.0
[geometry]
sigma_um = 6.51
dk_sigma = 13.2
t_eval_sigma = 1.09
[grid]
n = 64
domain_sigmas = 10
[solver]
samples = 8
convergence = false
)";

}  // namespace

TEST(Cli, ListScenarios) {
  const auto dir = scratch("list");
  EXPECT_EQ(run("list-scenarios", (dir / "out.txt").string()), 0);
  const auto text = slurp(dir / "out.txt");
  for (const char* id : {"entangle", "switch", "phase-gate-co", "tradeoff-sweep", "switch-frequency-domain"})
    EXPECT_NE(text.find(id), std::string::npos) << id;
}

TEST(Cli, ConfigErrorsExitWithOne) {
  const auto dir = scratch("config_errors");
  const auto empty = write_file(dir, "empty.toml", "");
  EXPECT_EQ(run("run " + empty.string() + " -o " + (dir / "o").string(), (dir / "err.txt").string()), 1);
  EXPECT_NE(slurp(dir / "err.txt").find("physics.omega1_mhz"), std::string::npos);
  const auto unknown = write_file(dir, "unknown.toml", "scenario = \"entangle\"\nomega3 = 1\n");
  EXPECT_EQ(run("run " + unknown.string() + " -o " + (dir / "o").string(), (dir / "err2.txt").string()), 1);
  EXPECT_NE(slurp(dir / "err2.txt").find("omega3"), std::string::npos);
  EXPECT_EQ(run("run"), 1);
}

TEST(Cli, UnwritableOutputExitsWithThree) {
  EXPECT_EQ(run("run " + kConfigs + "dispersion-scan.toml -o /proc/pbsim_forbidden"), 3);
  EXPECT_EQ(run("run /nonexistent.toml -o /tmp/x"), 3);
}

TEST(Cli, DryRunWritesManifestOnly) {
  const auto dir = scratch("dry");
  ASSERT_EQ(run("run " + kConfigs + "entangle.toml -o " + dir.string() + " --dry-run"), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_FALSE(fs::exists(dir / "observables.csv"));
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_TRUE(m["dry_run"].get<bool>());
  EXPECT_EQ(m["config"]["scenario"], "entangle");
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, RunIsDeterministicAndManifestListsEveryFile) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run("run " + kConfigs + "dispersion-scan.toml -o " + a.string()), 0);
  ASSERT_EQ(run("run " + kConfigs + "dispersion-scan.toml -o " + b.string()), 0);
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  EXPECT_EQ(m["config_hash"], mb["config_hash"]);
  std::size_t listed = 0;
  for (const auto& f : m["files"]) {
    const std::string name = f.get<std::string>();
    EXPECT_TRUE(fs::exists(a / name)) << name;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    ++listed;
  }
  EXPECT_EQ(listed, static_cast<std::size_t>(std::distance(fs::directory_iterator(a), fs::directory_iterator())));
  for (const char* f : {"observables.csv", "convergence.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(a / f)) << f;
}

TEST(Cli, FailedConvergenceExitsWithTwo) {
  const auto dir = scratch("strict");
  const auto cfg = write_file(dir, "strict.toml", slurp(kConfigs + "switch-frequency-domain.toml") +
                                                      "\n[solver]\ndt_tol = 1e-300\n");
  EXPECT_EQ(run("run " + cfg.string() + " -o " + (dir / "o").string()), 2);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
  EXPECT_EQ(m["status"], "not_converged");
}

TEST(Cli, SweepIsIndependentOfWorkerCount) {
  const auto one = scratch("sweep_1"), many = scratch("sweep_n");
  const std::string base = "sweep " + kConfigs + "switch-frequency-domain.toml --axis sweep.d_b_values=15,25,38.46 ";
  ASSERT_EQ(run(base + "-j 1 -o " + one.string()), 0);
  ASSERT_EQ(run(base + "-j 3 -o " + many.string()), 0);
  for (const char* f : {"observables.csv", "summary.csv", "convergence.csv", "table_transfer.csv"})
    EXPECT_EQ(slurp(one / f), slurp(many / f)) << f;
  for (const char* p : {"point_000", "point_001", "point_002"}) EXPECT_TRUE(fs::exists(one / p / "manifest.json"));
  EXPECT_NE(slurp(one / "summary.csv").find("\n2,38.460000000000001,ok,"), std::string::npos);
}

TEST(Cli, SinglePointSweepMatchesRun) {
  const auto sw = scratch("single_sweep"), rn = scratch("single_run");
  ASSERT_EQ(run("sweep " + kConfigs + "switch-frequency-domain.toml --axis solver.samples=64 -o " + sw.string()), 0);
  ASSERT_EQ(run("run " + kConfigs + "switch-frequency-domain.toml -o " + rn.string()), 0);
  for (const char* f : {"observables.csv", "summary.csv", "convergence.csv", "table_transfer.csv"})
    EXPECT_EQ(slurp(sw / "point_000" / f), slurp(rn / f)) << f;
  const auto a = nlohmann::json::parse(slurp(sw / "point_000" / "manifest.json"));
  const auto b = nlohmann::json::parse(slurp(rn / "manifest.json"));
  EXPECT_EQ(a["config_hash"], b["config_hash"]);
}

TEST(Cli, SweepRecordsFailedPointsAndContinues) {
  const auto dir = scratch("sweep_fail");
  const int rc = run("sweep " + kConfigs + "switch-frequency-domain.toml --axis sweep.d_b_values=15,-1,38.46 -o " +
                     dir.string());
  EXPECT_NE(rc, 0);
  const auto idx = nlohmann::json::parse(slurp(dir / "sweep.json"));
  ASSERT_EQ(idx["points"].size(), 3u);
  EXPECT_EQ(idx["points"][0]["status"], "ok");
  EXPECT_NE(idx["points"][1]["status"], "ok");
  EXPECT_EQ(idx["points"][2]["status"], "ok");
  EXPECT_TRUE(fs::exists(dir / "point_002" / "summary.csv"));
  EXPECT_EQ(run("sweep " + kConfigs + "switch-frequency-domain.toml --axis sweep.nope=1 -o " + dir.string()), 1);
}

TEST(Cli, AnalyzeReadsSnapshotsWithManifestGeometry) {
  const auto dir = scratch("analyze");
  const auto cfg = write_file(dir, "co.toml", kSmallCoGate);
  ASSERT_EQ(run("run " + cfg.string() + " -o " + (dir / "o").string() + " --snapshots"), 0);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
  ASSERT_EQ(m["snapshots"].size(), 2u);
  const std::string snap = (dir / "o" / m["snapshots"][0]["file"].get<std::string>()).string();
  ASSERT_EQ(run("analyze " + snap + " --observable norm", (dir / "norm.txt").string()), 0);
  const auto text = slurp(dir / "norm.txt");
  ASSERT_EQ(text.rfind("observable,value\nnorm,", 0), 0u) << text;
  const double norm = std::stod(text.substr(text.find("norm,") + 5));
  EXPECT_GT(norm, 0.5);
  EXPECT_LE(norm, 1.0 + 1e-9);
  EXPECT_EQ(run("analyze " + snap + " --observable centroid"), 0);
  EXPECT_EQ(run("analyze " + snap + " --observable component-norms"), 0);
  EXPECT_EQ(run("analyze " + snap + " --observable bogus"), 1);
}
