#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pbsim/config.hpp"
#include "pbsim/io.hpp"

using namespace pbsim;

namespace {

const char* kMinimal = R"(
scenario = "entangle"
[physics]
omega1_mhz = 5.0
g_p_mhz = 20000.0
gamma_mhz = 3.0
)";

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pbsim_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Config, ShippedEntangleConfigHasReferenceParameters) {
  const auto c = parse_config(std::string(PBSIM_SOURCE_DIR) + "/configs/entangle.toml");
  EXPECT_EQ(c.scenario, "entangle");
  EXPECT_NEAR(c.params.omega1, 2.0 * kPi * 5.0, 1e-12);
  EXPECT_NEAR(c.params.g_p, 2.0 * kPi * 20000.0, 1e-9);
  EXPECT_NEAR(c.params.gamma, 2.0 * kPi * 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.z_b, 13.8);
  EXPECT_DOUBLE_EQ(c.r_b, 16.5);
  EXPECT_NEAR(c.pulse_sigma(), 5.5, 1e-12);
  EXPECT_EQ(c.grid.n, 512u);
}

TEST(Config, EveryShippedConfigParses) {
  for (const auto& s : scenario_catalog()) {
    const auto path = std::string(PBSIM_SOURCE_DIR) + "/configs/" + s.id + ".toml";
    ASSERT_TRUE(fs::exists(path)) << path;
    EXPECT_EQ(parse_config(path).scenario, s.id);
  }
}

TEST(Config, EmptyFileListsRequiredKeys) {
  const auto msg = message_of("");
  for (const char* k : {"scenario", "physics.omega1_mhz", "physics.g_p_mhz", "physics.gamma_mhz"})
    EXPECT_NE(msg.find(k), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsNamed) {
  const auto msg = message_of(std::string(kMinimal) + "omega3 = 1.0\n");
  EXPECT_NE(msg.find("omega3"), std::string::npos) << msg;
  EXPECT_NE(message_of(std::string(kMinimal) + "[extras]\nx = 1\n").find("extras"), std::string::npos);
}

TEST(Config, MissingUnitSuffixIsReported) {
  const auto msg = message_of(std::string(kMinimal) + "[geometry]\nsigma = 5.0\n");
  EXPECT_NE(msg.find("unit suffix"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sigma_um"), std::string::npos) << msg;
}

TEST(Config, ParseErrorCarriesLineNumber) {
  const auto msg = message_of("scenario = \"entangle\"\n[physics]\nomega1_mhz = \n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_THROW(parse_config_text(std::string(kMinimal) + "[grid]\nn = \"big\"\n"), ConfigError);
  EXPECT_THROW(parse_config_text(std::string(kMinimal) + "[grid]\nn = 100\n"), ConfigError);
  EXPECT_THROW(parse_config_text(std::string(kMinimal) + "[geometry]\ng_ratio = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text(std::string(kMinimal) + "[physics]\nneglect_b_loss = false\n"), ConfigError);
  EXPECT_THROW(parse_config_text("scenario = \"nope\"\n[physics]\nomega1_mhz = 5.0\ng_p_mhz = 1.0\ngamma_mhz = 3.0\n"),
               ConfigError);
  EXPECT_THROW(parse_config("/nonexistent/pbsim.toml"), IoError);
}

TEST(Config, UnspecifiedKeysKeepScenarioDefaults) {
  const auto c = parse_config_text(R"(
scenario = "switch"
[physics]
omega1_mhz = 6.0
g_p_mhz = 20000.0
gamma_mhz = 3.0
)");
  EXPECT_NEAR(c.params.omega2 / c.params.omega1, 0.9, 1e-12);
  EXPECT_EQ(c.pulse_sigmas().size(), 2u);
  const auto d = parse_config_text(std::string(kMinimal) + "[solver]\ndt_us = 1e-4\nconvergence = false\n");
  EXPECT_DOUBLE_EQ(d.solver.dt, 1e-4);
  EXPECT_FALSE(d.solver.convergence);
}

TEST(Config, OmegaListConvertsToAngularUnits) {
  const auto c = parse_config_text(R"(
scenario = "switch-frequency-domain"
[physics]
omega1_mhz = 5.0
g_p_mhz = 20000.0
gamma_mhz = 3.0
[sweep]
d_b_values = [15.0]
omega_values_mhz = [-1.0, 0.0, 0.5]
)");
  ASSERT_EQ(c.omega_values.size(), 3u);
  EXPECT_NEAR(c.omega_values[0], -2.0 * kPi, 1e-12);
  EXPECT_NEAR(c.omega_values[2], kPi, 1e-12);
}

TEST(Override, ScalarListAndIntegerKeys) {
  auto t = parse_toml(kMinimal);
  set_override(t, "geometry.sigma_um", 4.0);
  set_override(t, "grid.n", 64);
  set_override(t, "sweep.xi_values", 0.05);
  const auto c = config_from_table(t);
  EXPECT_DOUBLE_EQ(c.sigma, 4.0);
  EXPECT_EQ(c.grid.n, 64u);
  ASSERT_EQ(c.xi_values.size(), 1u);
  EXPECT_DOUBLE_EQ(c.xi_values[0], 0.05);
}

TEST(Override, RejectsUnknownOrNonNumericKeys) {
  auto t = parse_toml(kMinimal);
  EXPECT_THROW(set_override(t, "geometry.sigma", 1.0), ConfigError);
  EXPECT_THROW(set_override(t, "sigma_um", 1.0), ConfigError);
  EXPECT_THROW(set_override(t, "solver.convergence", 1.0), ConfigError);
  EXPECT_THROW(set_override(t, "grid.n", 64.5), ConfigError);
}

TEST(Io, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 0.97263412345678901, -2.5e-300, 6.02214076e23}) {
    const std::string s = num17(x);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), x) << s;
  }
  EXPECT_EQ(num17(std::nan("")), "nan");
}

TEST(Io, ConfigHashFollowsValuesNotFormatting) {
  const auto a = parse_config_text(kMinimal);
  const auto b = parse_config_text(
      "scenario=\"entangle\"\n\n[physics]\ngamma_mhz=3\ng_p_mhz=2e4\nomega1_mhz=5\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  auto c = a;
  c.solver.dt *= 2.0;
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Io, WriteResultsProducesLongFormatAndSnapshotIndex) {
  ScenarioResult r;
  r.scenario = "entangle";
  r.series = {{0.0, "F_s", 0.0}, {0.5, "F_s", 0.9726}};
  r.summary = {{"F_s_peak", 0.9726}};
  r.tables = {{"demo", {"x", "y"}, {{1.0, 2.0}}}};
  r.convergence = {{"F_s_peak", "base", 64, 2e-4, 0.9726, 0.0, 0.0, true}};
  const Grid1D g = Grid1D::centered(8, 16.0);
  TwoPhotonState st({"EE", "SS"}, g, g);
  st["EE"][3] = cd(0.5, -0.25);
  st.time = 0.125;
  r.snapshots.emplace_back("t=0.125", st);

  const auto dir = scratch_dir("io");
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  const auto files = write_results(dir, r, true, &index);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(slurp(dir / "observables.csv"), "time,observable,value\n0,F_s,0\n0.5,F_s,0.97260000000000002\n");
  EXPECT_NE(slurp(dir / "table_demo.csv").find("x,y\n1,2\n"), std::string::npos);
  EXPECT_NE(slurp(dir / "convergence.csv").find("F_s_peak,base,64,"), std::string::npos);
  ASSERT_EQ(index.size(), 1u);

  RunManifest m = begin_manifest(parse_config_text(kMinimal));
  m.snapshots = index;
  m.files = files;
  write_json(dir / "manifest.json", m.to_json());
  Grid1D g1, g2;
  ASSERT_TRUE(snapshot_grids(dir / index[0]["file"].get<std::string>(), g1, g2));
  EXPECT_TRUE(g1 == g);
  const auto back = read_snapshot((dir / index[0]["file"].get<std::string>()).string(), &g1, &g2);
  EXPECT_EQ(back["EE"][3], cd(0.5, -0.25));
  EXPECT_DOUBLE_EQ(back.grid1.origin, -8.0);
}
