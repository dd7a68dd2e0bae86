// io.hpp - result files: long-format CSV, convergence table, snapshots and
// the run manifest.

#pragma once

#include <nlohmann/json.hpp>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pbsim/scenarios.hpp"
#include "pbsim/state.hpp"

#ifndef PBSIM_VERSION
#define PBSIM_VERSION "dev"
#endif

namespace pbsim {

namespace fs = std::filesystem;

/// 17 significant digits: exact round trip for binary64.
inline std::string num17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::ordered_json grid_json(const Grid1D& g) {
  return {{"n", g.n}, {"length_um", g.length}, {"origin_um", g.origin}};
}

inline Grid1D grid_from_json(const nlohmann::json& j) {
  return Grid1D(j.at("n").get<std::size_t>(), j.at("length_um").get<double>(), j.at("origin_um").get<double>());
}

/// Every field of the config after unit conversion, in a fixed order.
inline nlohmann::ordered_json config_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = c.scenario;
  const PhysicsParams p = c.physics();
  j["physics"] = {{"g_p", p.g_p},     {"omega1", p.omega1}, {"omega2", p.omega2},
                  {"gamma", p.gamma}, {"gamma_r", p.gamma_r}, {"delta", p.delta},
                  {"c", p.c},         {"c6", p.c6},           {"neglect_b_loss", c.neglect_b_loss}};
  j["geometry"] = {{"z_b_um", c.z_b},           {"r_b_um", c.r_b},
                   {"sigma_um", c.sigma},       {"sigmas_um", c.sigmas},
                   {"separation_um", c.separation}, {"g_ratio", c.g_ratio},
                   {"dk_sigma", c.dk_sigma},    {"t_eval_sigma", c.t_eval_sigma},
                   {"dv_um_per_us", c.dv}};
  j["sweep"] = {{"xi_values", c.xi_values},         {"d_b_values", c.d_b_values},
                {"eta", c.eta},                     {"dv_over_gsigma", c.dv_over_gsigma},
                {"nbar_values", c.nbar_values},     {"omega_values", c.omega_values},
                {"r_over_rb", c.r_over_rb},         {"veff_over_g", c.veff_over_g},
                {"k_max_sigma", c.k_max_sigma},     {"n_k", c.n_k}};
  j["grid"] = {{"n", c.grid.n}, {"n_gate", c.grid.n_gate}, {"domain_sigmas", c.grid.domain_sigmas}};
  j["solver"] = {{"dt_us", c.solver.dt},         {"samples", c.solver.samples},
                 {"convergence", c.solver.convergence}, {"dt_tol", c.solver.dt_tol},
                 {"grid_tol", c.solver.grid_tol}, {"boundary_tol", c.solver.boundary_tol}};
  j["output"] = {{"snapshots", c.snapshots}};
  return j;
}

/// Hash of the canonical config text; doubles print with 17 digits, so two
/// configs that parse to the same values share a hash.
inline std::string config_hash(const ScenarioConfig& c) {
  return hex64(fnv1a64(config_json(c).dump()));
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : path_(path), os_(path, std::ios::trunc) {
    if (!os_) throw IoError("cannot open '" + path.string() + "' for writing");
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  void close() {
    os_.close();
    if (!os_) throw IoError("failed writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream os_;
};

inline std::string snapshot_file_name(std::size_t i, const std::string& label) {
  std::string s;
  for (char ch : label) s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') ? ch : '_';
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return std::string("snapshot_") + buf + "_" + s + ".pbsim";
}

struct RunManifest {
  std::string config_hash;
  std::string version = PBSIM_VERSION;
  std::string started;
  std::string finished;
  std::string status = "ok";
  std::string error;
  bool dry_run = false;
  nlohmann::ordered_json config;
  nlohmann::ordered_json solver;
  nlohmann::ordered_json snapshots = nlohmann::ordered_json::array();
  std::vector<std::string> files;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    j["dry_run"] = dry_run;
    j["config"] = config;
    j["solver"] = solver;
    j["snapshots"] = snapshots;
    j["files"] = files;
    return j;
  }
};

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline RunManifest begin_manifest(const ScenarioConfig& cfg) {
  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.started = utc_now();
  m.config = config_json(cfg);
  m.solver = m.config["solver"];
  m.solver["grid"] = m.config["grid"];
  return m;
}

/// Writes observables.csv, summary.csv, one CSV per table, convergence.csv
/// and (optionally) snapshots; returns the file names written.
inline std::vector<std::string> write_results(const fs::path& dir, const ScenarioResult& r, bool snapshots,
                                              nlohmann::ordered_json* snapshot_index = nullptr) {
  std::vector<std::string> files;
  {
    CsvWriter w(dir / "observables.csv");
    w.row({"time", "observable", "value"});
    for (const auto& s : r.series) w.row({num17(s.time), s.name, num17(s.value)});
    w.close();
    files.push_back("observables.csv");
  }
  {
    CsvWriter w(dir / "summary.csv");
    w.row({"observable", "value"});
    for (const auto& [k, v] : r.summary) w.row({k, num17(v)});
    w.row({"norm_monotone", r.norm_monotone ? "1" : "0"});
    w.row({"boundary_ratio", num17(r.boundary_ratio)});
    w.row({"edge_ratio_interacting", num17(r.edge_ratio_interacting)});
    w.close();
    files.push_back("summary.csv");
  }
  for (const auto& t : r.tables) {
    const std::string name = "table_" + t.name + ".csv";
    CsvWriter w(dir / name);
    w.row(t.columns);
    for (const auto& row : t.rows) {
      std::vector<std::string> cells;
      for (double x : row) cells.push_back(num17(x));
      w.row(cells);
    }
    w.close();
    files.push_back(name);
  }
  {
    CsvWriter w(dir / "convergence.csv");
    w.row({"quantity", "variant", "n", "dt_us", "value", "delta", "tol", "pass"});
    for (const auto& c : r.convergence)
      w.row({c.quantity, c.variant, std::to_string(c.n), num17(c.dt), num17(c.value), num17(c.delta),
             num17(c.tol), c.pass ? "1" : "0"});
    w.close();
    files.push_back("convergence.csv");
  }
  if (snapshots) {
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
      const auto& [label, st] = r.snapshots[i];
      const std::string name = snapshot_file_name(i, label);
      write_snapshot((dir / name).string(), st);
      files.push_back(name);
      if (snapshot_index)
        snapshot_index->push_back({{"file", name},
                                   {"label", label},
                                   {"time_us", st.time},
                                   {"components", st.labels},
                                   {"grid1", grid_json(st.grid1)},
                                   {"grid2", grid_json(st.grid2)}});
    }
  }
  return files;
}

/// Grid geometry recorded for a snapshot file in the manifest next to it.
inline bool snapshot_grids(const fs::path& snapshot, Grid1D& g1, Grid1D& g2) {
  const fs::path manifest = snapshot.parent_path() / "manifest.json";
  std::ifstream is(manifest);
  if (!is) return false;
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("unreadable manifest '" + manifest.string() + "': " + e.what());
  }
  if (!j.contains("snapshots")) return false;
  for (const auto& s : j["snapshots"])
    if (s.value("file", "") == snapshot.filename().string()) {
      g1 = grid_from_json(s.at("grid1"));
      g2 = grid_from_json(s.at("grid2"));
      return true;
    }
  return false;
}

}  // namespace pbsim
