// config.hpp - TOML scenario configuration with mandatory unit suffixes.
//
//   scenario = "entangle"
//   [physics]  omega1_mhz, omega2_mhz, g_p_mhz, gamma_mhz, gamma_r_mhz, delta_mhz, neglect_b_loss
//   [geometry] z_b_um, r_b_um, sigma_um, sigmas_um, separation_um, g_ratio, dk_sigma,
//              t_eval_sigma, dv_um_per_us
//   [sweep]    xi_values, d_b_values, eta, dv_over_gsigma, nbar_values, omega_values_mhz,
//              r_over_rb, veff_over_g, k_max_sigma, n_k
//   [grid]     n, n_gate, domain_sigmas
//   [solver]   dt_us, samples, convergence, dt_tol, grid_tol, boundary_tol
//   [output]   snapshots
//
// Frequencies are given in MHz and converted to rad/us on load. Keys left out
// keep the scenario defaults.

#pragma once

#include <tomlplusplus/toml.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pbsim/scenarios.hpp"

namespace pbsim {

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"", {"scenario"}},
      {"physics", {"omega1_mhz", "omega2_mhz", "g_p_mhz", "gamma_mhz", "gamma_r_mhz", "delta_mhz",
                   "neglect_b_loss"}},
      {"geometry", {"z_b_um", "r_b_um", "sigma_um", "sigmas_um", "separation_um", "g_ratio",
                    "dk_sigma", "t_eval_sigma", "dv_um_per_us"}},
      {"sweep", {"xi_values", "d_b_values", "eta", "dv_over_gsigma", "nbar_values",
                 "omega_values_mhz", "r_over_rb", "veff_over_g", "k_max_sigma", "n_k"}},
      {"grid", {"n", "n_gate", "domain_sigmas"}},
      {"solver", {"dt_us", "samples", "convergence", "dt_tol", "grid_tol", "boundary_tol"}},
      {"output", {"snapshots"}},
  };
  return schema;
}

inline const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = {"scenario", "physics.omega1_mhz", "physics.g_p_mhz",
                                                "physics.gamma_mhz"};
  return keys;
}

inline std::string where(const toml::node& n) {
  const auto& s = n.source();
  return "line " + std::to_string(s.begin.line);
}

inline std::string qualified(const std::string& table, const std::string& key) {
  return table.empty() ? key : table + "." + key;
}

/// Rejects unknown keys; a key that only lacks a unit suffix gets a hint.
inline void check_keys(const toml::table& root) {
  const auto& schema = config_schema();
  static const std::vector<std::string> suffixes = {"_mhz", "_um", "_us", "_um_per_us"};
  for (const auto& [k, node] : root) {
    const std::string key(k.str());
    if (node.is_table()) {
      auto it = schema.find(key);
      if (it == schema.end() || key.empty())
        throw ConfigError("unknown table [" + key + "] at " + where(node));
      for (const auto& [sk, sn] : *node.as_table()) {
        const std::string sub(sk.str());
        if (it->second.count(sub)) continue;
        for (const auto& suf : suffixes)
          if (it->second.count(sub + suf))
            throw ConfigError("key '" + qualified(key, sub) + "' at " + where(sn) +
                              " is missing its unit suffix; use '" + qualified(key, sub + suf) + "'");
        throw ConfigError("unknown key '" + qualified(key, sub) + "' at " + where(sn));
      }
    } else if (!schema.at("").count(key)) {
      throw ConfigError("unknown key '" + key + "' at " + where(node));
    }
  }
}

inline double number(const toml::node& n, const std::string& name) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError("'" + name + "' at " + where(n) + " must be a number");
}

inline std::vector<double> numbers(const toml::node& n, const std::string& name) {
  const toml::array* a = n.as_array();
  if (!a) throw ConfigError("'" + name + "' at " + where(n) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *a) out.push_back(number(e, name));
  return out;
}

inline bool boolean(const toml::node& n, const std::string& name) {
  if (auto v = n.value<bool>()) return *v;
  throw ConfigError("'" + name + "' at " + where(n) + " must be true or false");
}

inline std::size_t count(const toml::node& n, const std::string& name) {
  auto v = n.value<std::int64_t>();
  if (!v || *v < 0) throw ConfigError("'" + name + "' at " + where(n) + " must be a non-negative integer");
  return static_cast<std::size_t>(*v);
}

}  // namespace detail

/// Parses TOML text; syntax errors carry the line number.
inline toml::table parse_toml(const std::string& text, const std::string& origin = "<config>") {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw ConfigError(origin + ": parse error at line " + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
}

/// Builds a validated ScenarioConfig from a parsed TOML document.
inline ScenarioConfig config_from_table(const toml::table& root, const std::string& origin = "<config>") {
  detail::check_keys(root);
  std::vector<std::string> missing;
  for (const auto& k : detail::required_keys())
    if (!root.at_path(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string msg = origin + ": missing required keys:";
    for (const auto& k : missing) msg += " " + k;
    throw ConfigError(msg);
  }

  const auto scenario = root["scenario"].value<std::string>();
  if (!scenario) throw ConfigError("'scenario' must be a string");
  ScenarioConfig c = default_config(*scenario);

  auto get = [&](const std::string& path) -> const toml::node* { return root.at_path(path).node(); };
  auto num = [&](const std::string& path, double& dst, double scale = 1.0) {
    if (auto n = get(path)) dst = scale * detail::number(*n, path);
  };
  auto arr = [&](const std::string& path, std::vector<double>& dst, double scale = 1.0) {
    if (auto n = get(path)) {
      dst = detail::numbers(*n, path);
      for (auto& x : dst) x *= scale;
    }
  };
  auto flag = [&](const std::string& path, bool& dst) {
    if (auto n = get(path)) dst = detail::boolean(*n, path);
  };
  auto cnt = [&](const std::string& path, std::size_t& dst) {
    if (auto n = get(path)) dst = detail::count(*n, path);
  };

  const bool omega2_given = get("physics.omega2_mhz") != nullptr;
  const double omega2_ratio = c.params.omega2 / c.params.omega1;
  num("physics.omega1_mhz", c.params.omega1, kTwoPi);
  num("physics.omega2_mhz", c.params.omega2, kTwoPi);
  if (!omega2_given) c.params.omega2 = omega2_ratio * c.params.omega1;
  num("physics.g_p_mhz", c.params.g_p, kTwoPi);
  num("physics.gamma_mhz", c.params.gamma, kTwoPi);
  num("physics.gamma_r_mhz", c.params.gamma_r, kTwoPi);
  num("physics.delta_mhz", c.params.delta, kTwoPi);
  flag("physics.neglect_b_loss", c.neglect_b_loss);

  num("geometry.z_b_um", c.z_b);
  num("geometry.r_b_um", c.r_b);
  num("geometry.sigma_um", c.sigma);
  arr("geometry.sigmas_um", c.sigmas);
  num("geometry.separation_um", c.separation);
  num("geometry.g_ratio", c.g_ratio);
  num("geometry.dk_sigma", c.dk_sigma);
  num("geometry.t_eval_sigma", c.t_eval_sigma);
  num("geometry.dv_um_per_us", c.dv);

  arr("sweep.xi_values", c.xi_values);
  arr("sweep.d_b_values", c.d_b_values);
  num("sweep.eta", c.eta);
  arr("sweep.dv_over_gsigma", c.dv_over_gsigma);
  arr("sweep.nbar_values", c.nbar_values);
  arr("sweep.omega_values_mhz", c.omega_values, kTwoPi);
  arr("sweep.r_over_rb", c.r_over_rb);
  arr("sweep.veff_over_g", c.veff_over_g);
  num("sweep.k_max_sigma", c.k_max_sigma);
  if (auto n = get("sweep.n_k")) c.n_k = static_cast<int>(detail::count(*n, "sweep.n_k"));

  cnt("grid.n", c.grid.n);
  cnt("grid.n_gate", c.grid.n_gate);
  num("grid.domain_sigmas", c.grid.domain_sigmas);

  num("solver.dt_us", c.solver.dt);
  if (auto n = get("solver.samples")) c.solver.samples = static_cast<int>(detail::count(*n, "solver.samples"));
  flag("solver.convergence", c.solver.convergence);
  num("solver.dt_tol", c.solver.dt_tol);
  num("solver.grid_tol", c.solver.grid_tol);
  num("solver.boundary_tol", c.solver.boundary_tol);

  flag("output.snapshots", c.snapshots);

  c.validate();
  return c;
}

inline ScenarioConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  return config_from_table(parse_toml(text, origin), origin);
}

inline ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

inline bool is_list_key(const std::string& key) {
  static const std::set<std::string> lists = {"sigmas_um",      "xi_values", "d_b_values",
                                              "dv_over_gsigma", "nbar_values", "omega_values_mhz",
                                              "r_over_rb",      "veff_over_g"};
  return lists.count(key) > 0;
}

/// Sets one numeric key given as "table.key" (the sweep axis syntax). A list
/// key receives a one-element list.
inline void set_override(toml::table& root, const std::string& path, double value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("axis key must be 'table.key', got '" + path + "'");
  const std::string table = path.substr(0, dot), key = path.substr(dot + 1);
  const auto& schema = detail::config_schema();
  auto it = schema.find(table);
  if (table.empty() || it == schema.end() || !it->second.count(key))
    throw ConfigError("unknown axis key '" + path + "'");
  if (key == "neglect_b_loss" || key == "convergence" || key == "snapshots")
    throw ConfigError("axis key '" + path + "' is not numeric");
  if (!root.contains(table)) root.insert(table, toml::table{});
  toml::table* t = root[table].as_table();
  if (!t) throw ConfigError("'" + table + "' is not a table");
  const bool integral = key == "n" || key == "n_gate" || key == "samples" || key == "n_k";
  if (integral) {
    if (value != std::floor(value)) throw ConfigError("axis key '" + path + "' needs integer values");
    t->insert_or_assign(key, static_cast<std::int64_t>(value));
  } else if (is_list_key(key)) {
    t->insert_or_assign(key, toml::array{value});
  } else {
    t->insert_or_assign(key, value);
  }
}

}  // namespace pbsim
