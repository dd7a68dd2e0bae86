// pbsim - command-line driver: run, sweep, analyze, list-scenarios.

#include <cli11/CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pbsim/pbsim.hpp"

namespace {

using namespace pbsim;

enum Exit : int { kOk = 0, kConfig = 1, kSolver = 2, kIo = 3 };

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
  if (dynamic_cast<const SolverError*>(&e)) return kSolver;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  return kSolver;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

struct PointOutcome {
  int code = kOk;
  std::string status = "ok";
  std::string error;
  ScenarioResult result;
  bool has_result = false;
};

/// Runs one configuration into `dir` and writes its manifest. Never throws:
/// failures are reported through the outcome (and in the manifest when the
/// directory is writable).
PointOutcome execute(const ScenarioConfig& cfg, const fs::path& dir, bool dry_run) {
  PointOutcome out;
  RunManifest m = begin_manifest(cfg);
  m.dry_run = dry_run;
  try {
    make_dir(dir);
  } catch (const std::exception& e) {
    out.code = kIo;
    out.status = "io_error";
    out.error = e.what();
    return out;
  }
  if (!dry_run) {
    try {
      out.result = run_scenario(cfg);
      out.has_result = true;
      for (const auto& [k, v] : out.result.settings) m.solver["scenario_settings"][k] = v;
      m.files = write_results(dir, out.result, cfg.snapshots, &m.snapshots);
      if (!out.result.norm_monotone) {
        out.code = kSolver;
        out.status = "norm_increase";
        out.error = "norm increased between samples";
      } else if (!out.result.converged()) {
        out.code = kSolver;
        out.status = "not_converged";
        out.error = "convergence check failed (see convergence.csv)";
      }
    } catch (const std::exception& e) {
      out.code = exit_code(e);
      out.status = out.code == kConfig ? "config_error" : out.code == kIo ? "io_error" : "solver_error";
      out.error = e.what();
    }
  }
  m.status = out.status;
  m.error = out.error;
  m.finished = utc_now();
  m.files.push_back("manifest.json");
  try {
    write_json(dir / "manifest.json", m.to_json());
  } catch (const std::exception& e) {
    if (out.code == kOk) {
      out.code = kIo;
      out.status = "io_error";
      out.error = e.what();
    }
  }
  return out;
}

std::size_t thread_cap(std::size_t requested) {
  std::size_t n = std::max<std::size_t>(1, requested);
  if (const char* env = std::getenv("PBSIM_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      throw ConfigError(std::string("PBSIM_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return n;
}

struct Axis {
  std::string key;
  std::vector<double> values;
};

Axis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw ConfigError("axis must look like table.key=v1,v2,...; got '" + spec + "'");
  Axis a;
  a.key = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw ConfigError("axis value '" + tok + "' is not a number");
    a.values.push_back(v);
  }
  return a;
}

int cmd_run(const std::string& config, const std::string& outdir, bool dry_run, bool snapshots) {
  ScenarioConfig cfg;
  try {
    cfg = parse_config(config);
  } catch (const std::exception& e) {
    std::cerr << "pbsim: " << e.what() << '\n';
    return exit_code(e);
  }
  if (snapshots) cfg.snapshots = true;
  const PointOutcome o = execute(cfg, outdir, dry_run);
  if (o.code != kOk) std::cerr << "pbsim: " << o.status << ": " << o.error << '\n';
  else if (!dry_run) std::cout << "wrote " << outdir << '\n';
  return o.code;
}

int cmd_sweep(const std::string& config, const std::string& outdir, const std::vector<std::string>& axes,
              std::size_t jobs, bool snapshots) {
  toml::table base;
  std::vector<Axis> ax;
  std::vector<std::vector<double>> points;  // one value per axis
  try {
    base = parse_toml(read_text(config), config);
    for (const auto& s : axes) ax.push_back(parse_axis(s));
    points.emplace_back();
    for (const auto& a : ax) {
      std::vector<std::vector<double>> next;
      for (const auto& p : points)
        for (double v : a.values) {
          next.push_back(p);
          next.back().push_back(v);
        }
      points = std::move(next);
    }
    config_from_table(base, config);
    make_dir(outdir);
    jobs = thread_cap(jobs);
  } catch (const std::exception& e) {
    std::cerr << "pbsim: " << e.what() << '\n';
    return exit_code(e);
  }

  std::vector<PointOutcome> outcomes(points.size());
  std::vector<std::string> dirs(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      char name[32];
      std::snprintf(name, sizeof name, "point_%03zu", i);
      dirs[i] = name;
      try {
        toml::table t = base;
        for (std::size_t a = 0; a < ax.size(); ++a) set_override(t, ax[a].key, points[i][a]);
        ScenarioConfig cfg = config_from_table(t, config);
        if (snapshots) cfg.snapshots = true;
        outcomes[i] = execute(cfg, fs::path(outdir) / name, false);
      } catch (const std::exception& e) {
        outcomes[i].code = exit_code(e);
        outcomes[i].status = "config_error";
        outcomes[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nthreads = std::min(jobs, points.size());
  for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Single writer, point order: the merged files do not depend on -j.
  int code = kOk;
  try {
    CsvWriter obs(fs::path(outdir) / "observables.csv");
    CsvWriter sum(fs::path(outdir) / "summary.csv");
    CsvWriter conv(fs::path(outdir) / "convergence.csv");
    std::vector<std::string> head = {"point"};
    for (const auto& a : ax) head.push_back(a.key);
    auto with = [&](std::vector<std::string> tail) {
      std::vector<std::string> h = head;
      h.insert(h.end(), tail.begin(), tail.end());
      return h;
    };
    obs.row(with({"time", "observable", "value"}));
    sum.row(with({"status", "observable", "value"}));
    conv.row(with({"quantity", "variant", "n", "dt_us", "value", "delta", "tol", "pass"}));
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& o = outcomes[i];
      std::vector<std::string> pre = {std::to_string(i)};
      for (double v : points[i]) pre.push_back(num17(v));
      auto row = [&](std::vector<std::string> tail) {
        std::vector<std::string> r = pre;
        r.insert(r.end(), tail.begin(), tail.end());
        return r;
      };
      nlohmann::ordered_json entry = {{"point", i}, {"dir", dirs[i]}, {"status", o.status}};
      nlohmann::ordered_json axis_values;
      for (std::size_t a = 0; a < ax.size(); ++a) axis_values[ax[a].key] = points[i][a];
      entry["axis"] = axis_values;
      if (!o.error.empty()) entry["error"] = o.error;
      index.push_back(entry);
      if (o.code != kOk) {
        code = std::max(code, o.code);
        std::cerr << "pbsim: point " << i << " " << o.status << ": " << o.error << '\n';
      }
      if (!o.has_result) {
        sum.row(row({o.status, "", ""}));
        continue;
      }
      const auto& r = o.result;
      for (const auto& s : r.series) obs.row(row({num17(s.time), s.name, num17(s.value)}));
      for (const auto& [k, v] : r.summary) sum.row(row({o.status, k, num17(v)}));
      for (const auto& c : r.convergence)
        conv.row(row({c.quantity, c.variant, std::to_string(c.n), num17(c.dt), num17(c.value),
                      num17(c.delta), num17(c.tol), c.pass ? "1" : "0"}));
    }
    obs.close();
    sum.close();
    conv.close();
    std::vector<std::string> files = {"observables.csv", "summary.csv", "convergence.csv"};
    std::vector<std::string> table_names;
    for (const auto& o : outcomes)
      for (const auto& t : o.result.tables)
        if (std::find(table_names.begin(), table_names.end(), t.name) == table_names.end())
          table_names.push_back(t.name);
    for (const auto& name : table_names) {
      const std::string file = "table_" + name + ".csv";
      CsvWriter w(fs::path(outdir) / file);
      bool header = false;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!outcomes[i].has_result) continue;
        for (const auto& t : outcomes[i].result.tables) {
          if (t.name != name) continue;
          if (!header) {
            w.row(with(t.columns));
            header = true;
          }
          for (const auto& tr : t.rows) {
            std::vector<std::string> cells = {std::to_string(i)};
            for (double v : points[i]) cells.push_back(num17(v));
            for (double x : tr) cells.push_back(num17(x));
            w.row(cells);
          }
        }
      }
      w.close();
      files.push_back(file);
    }
    files.push_back("sweep.json");
    nlohmann::ordered_json m;
    m["version"] = PBSIM_VERSION;
    m["config"] = config;
    m["axes"] = axes;
    m["points"] = index;
    m["files"] = files;
    write_json(fs::path(outdir) / "sweep.json", m);
  } catch (const std::exception& e) {
    std::cerr << "pbsim: " << e.what() << '\n';
    return kIo;
  }
  return code;
}

const std::vector<std::string>& analyze_observables() {
  static const std::vector<std::string> names = {"norm", "component-norms", "edge-density", "centroid"};
  return names;
}

int cmd_analyze(const std::string& snapshot, const std::string& observable) {
  try {
    if (std::find(analyze_observables().begin(), analyze_observables().end(), observable) ==
        analyze_observables().end())
      throw ConfigError("unknown observable '" + observable + "'");
    Grid1D g1, g2;
    const bool located = snapshot_grids(snapshot, g1, g2);
    const TwoPhotonState st = located ? read_snapshot(snapshot, &g1, &g2) : read_snapshot(snapshot);
    if (!located && observable == "centroid")
      throw IoError("centroid needs the grid recorded in manifest.json next to the snapshot");
    std::cout << "observable,value\n";
    if (observable == "norm") {
      std::cout << "norm," << num17(st.norm()) << '\n';
    } else if (observable == "component-norms") {
      for (std::size_t c = 0; c < st.size(); ++c)
        std::cout << "norm_" << st.labels[c] << ',' << num17(st.component_norm(c)) << '\n';
    } else if (observable == "edge-density") {
      std::cout << "edge_density_ratio," << num17(detail::boundary_ratio(st)) << '\n';
    } else {
      double w = 0, z1 = 0, z2 = 0;
      for (std::size_t c = 0; c < st.size(); ++c)
        for (std::size_t i2 = 0; i2 < st.n2(); ++i2)
          for (std::size_t i1 = 0; i1 < st.n1(); ++i1) {
            const double d = std::norm(st.comps[c][i2 * st.n1() + i1]);
            w += d;
            z1 += d * st.grid1.coordinate(i1);
            z2 += d * st.grid2.coordinate(i2);
          }
      if (!(w > 0)) throw SolverError("snapshot has zero norm");
      std::cout << "centroid_z1_um," << num17(z1 / w) << "\ncentroid_z2_um," << num17(z2 / w) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "pbsim: " << e.what() << '\n';
    return exit_code(e);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pbsim: two-photon wavefunction simulator for Rydberg coupling blockade"};
  app.set_version_flag("--version", std::string(PBSIM_VERSION));
  app.require_subcommand(1);

  std::string config, outdir;
  bool dry_run = false, snapshots = false;
  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("config", config, "scenario TOML file")->required();
  run->add_option("-o,--output", outdir, "output directory")->required();
  run->add_flag("--dry-run", dry_run, "write the manifest only");
  run->add_flag("--snapshots", snapshots, "write PBSIM1 wavefunction snapshots");

  std::vector<std::string> axes;
  std::size_t jobs = 1;
  std::string sweep_out = "sweep";
  auto* sweep = app.add_subcommand("sweep", "run a scenario over one or more parameter axes");
  sweep->add_option("config", config, "scenario TOML file")->required();
  sweep->add_option("--axis", axes, "table.key=v1,v2,... (repeat for a grid)")->required();
  sweep->add_option("-j,--jobs", jobs, "parallel workers (capped by PBSIM_THREADS)")->check(CLI::PositiveNumber);
  sweep->add_option("-o,--output", sweep_out, "output directory");
  sweep->add_flag("--snapshots", snapshots, "write snapshots for every point");

  std::string snapshot, observable;
  auto* analyze = app.add_subcommand("analyze", "evaluate an observable on a snapshot");
  analyze->add_option("snapshot", snapshot, "PBSIM1 snapshot file")->required();
  analyze->add_option("--observable", observable, "norm | component-norms | edge-density | centroid")
      ->required();

  auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*run) return cmd_run(config, outdir, dry_run, snapshots);
  if (*sweep) return cmd_sweep(config, sweep_out, axes, jobs, snapshots);
  if (*analyze) return cmd_analyze(snapshot, observable);
  if (*list) {
    for (const auto& s : scenario_catalog()) std::cout << s.id << "\t" << s.description << '\n';
    return kOk;
  }
  return kConfig;
}
