// scenarios.hpp - preconfigured end-to-end experiments: the single-photon
// switch, entangled-pair generation, blockaded beam splitting, the two
// dressed-interaction phase gates, the loss/velocity-mismatch studies, the
// dispersion scan and the stationary switch.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pbsim/core.hpp"
#include "pbsim/evolution.hpp"
#include "pbsim/frequency_domain.hpp"
#include "pbsim/hamiltonians.hpp"
#include "pbsim/observables.hpp"
#include "pbsim/spectra.hpp"
#include "pbsim/state.hpp"

namespace pbsim {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ScenarioInfo {
  std::string id;
  std::string description;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> list = {
      {"switch", "stored-gate single-photon switch and pi-phase gate (atomic scheme)"},
      {"phase-gate-counter", "counterpropagating dressed phase gate, square coupling window"},
      {"entangle", "entangled pair generation from |b+ b-> in the 16-component model"},
      {"beamsplit-g2", "blockaded beam splitter: g2 of the converted pair and P1 table"},
      {"phase-gate-co", "copropagating dressed phase gate, adiabatic tanh ramp"},
      {"tradeoff-sweep", "entanglement fidelity versus linear EIT loss and blockade optical depth"},
      {"mismatch-sweep", "entanglement oscillation visibility versus group-velocity mismatch"},
      {"dispersion-scan", "k-space branches and dark weight of the atomic scheme"},
      {"switch-frequency-domain", "stationary transfer past a stored gate, spatial coupling window"},
  };
  return list;
}

inline bool known_scenario(const std::string& id) {
  for (const auto& s : scenario_catalog())
    if (s.id == id) return true;
  return false;
}

struct GridConfig {
  std::size_t n = 0;          // points per propagation axis; 0 picks the scenario default
  std::size_t n_gate = 4;     // points on the stored-gate axis
  double domain_sigmas = 24;  // domain length in pulse widths before advection headroom
};

struct SolverConfig {
  double dt = 2e-4;               // us
  int samples = 64;
  bool convergence = true;
  double dt_tol = 1e-4;           // allowed headline change under dt halving
  double grid_tol = 1e-3;         // allowed headline change under grid doubling
  double boundary_tol = 1e-8;     // edge density relative to the peak density
};

struct ScenarioConfig {
  std::string scenario = "entangle";
  PhysicsParams params;        // c6 is derived from z_b
  double z_b = 13.8;           // EIT blockade radius (um)
  double r_b = 16.5;           // coupling blockade radius (um), fixes g
  double sigma = 0.0;          // pulse width (um); 0 selects r_b / 3
  std::vector<double> sigmas;  // extra pulse widths for switch / beamsplit-g2
  double separation = -1.0;    // initial centre separation (um); < 0: pulses cross mid-window
  double g_ratio = 1.0;        // g- / g+
  double dk_sigma = 0.0;       // momentum mismatch times sigma
  double t_eval_sigma = 0.0;   // evaluation time in units of sigma / v_g
  double dv = 0.0;             // linear-mode velocity offset (um/us)
  bool neglect_b_loss = true;
  bool snapshots = false;

  double eta = 0.025;
  std::vector<double> xi_values;
  std::vector<double> d_b_values;
  std::vector<double> dv_over_gsigma;
  std::vector<double> nbar_values;
  std::vector<double> omega_values;  // rad/us
  std::vector<double> r_over_rb;
  std::vector<double> veff_over_g;
  double k_max_sigma = 1.0;
  int n_k = 41;

  GridConfig grid;
  SolverConfig solver;

  PhysicsParams physics() const {
    PhysicsParams p = params;
    p.c6 = c6_from_eit_radius(p, z_b);
    return p;
  }
  double coupling() const { return coupling_for_blockade_radius(physics(), r_b); }
  double pulse_sigma() const { return sigma > 0 ? sigma : r_b / 3.0; }
  std::vector<double> pulse_sigmas() const {
    return sigmas.empty() ? std::vector<double>{pulse_sigma()} : sigmas;
  }

  void validate() const {
    if (!known_scenario(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
    params.validate();
    auto positive = [](double x, const char* what) {
      if (!(x > 0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
    };
    positive(z_b, "z_b");
    positive(r_b, "r_b");
    if (sigma < 0) throw ConfigError("sigma must be positive");
    for (double s : sigmas) positive(s, "sigmas entries");
    positive(solver.dt, "dt");
    if (solver.samples < 2) throw ConfigError("samples must be >= 2");
    positive(grid.domain_sigmas, "domain_sigmas");
    if (grid.n != 0 && (grid.n < 8 || (grid.n & (grid.n - 1)) != 0))
      throw ConfigError("grid n must be a power of two >= 8");
    if (grid.n_gate < 2 || (grid.n_gate & (grid.n_gate - 1)) != 0)
      throw ConfigError("n_gate must be a power of two >= 2");
    if (!(g_ratio > 0)) throw ConfigError("g_ratio must be positive");
    if (scenario == "entangle" || scenario == "mismatch-sweep" || scenario == "tradeoff-sweep") {
      if (g_ratio != 1.0) throw ConfigError(scenario + " requires g+ = g- (g_ratio = 1)");
      if (!neglect_b_loss)
        throw ConfigError(scenario + " uses the lossless linear mode of the 16-component model;"
                          " set neglect_b_loss = true");
    }
    if (scenario == "phase-gate-counter" || scenario == "phase-gate-co") {
      positive(dk_sigma, "dk_sigma");
      positive(t_eval_sigma, "t_eval_sigma");
    }
    if (scenario == "tradeoff-sweep") {
      if (xi_values.empty() || d_b_values.empty())
        throw ConfigError("tradeoff-sweep needs xi_values and d_b_values");
      for (double x : xi_values) positive(x, "xi_values entries");
      for (double d : d_b_values) positive(d, "d_b_values entries");
      positive(eta, "eta");
    }
    if (scenario == "mismatch-sweep" && dv_over_gsigma.empty())
      throw ConfigError("mismatch-sweep needs dv_over_gsigma");
    if (scenario == "switch-frequency-domain") {
      if (d_b_values.empty()) throw ConfigError("switch-frequency-domain needs d_b_values");
      for (double d : d_b_values) positive(d, "d_b_values entries");
    }
    if (scenario == "dispersion-scan") {
      if (n_k < 5) throw ConfigError("n_k must be >= 5");
      positive(k_max_sigma, "k_max_sigma");
    }
  }
};

/// Parameter set of the published figures for each scenario.
inline ScenarioConfig default_config(const std::string& id) {
  if (!known_scenario(id)) throw ConfigError("unknown scenario '" + id + "'");
  ScenarioConfig c;
  c.scenario = id;
  if (id == "switch") {
    c.params.omega2 = 0.9 * c.params.omega1;
    c.sigmas = {c.r_b / 3.0, c.r_b};
    c.grid.domain_sigmas = 40;
  } else if (id == "phase-gate-counter") {
    c.dk_sigma = 6.25;
    c.t_eval_sigma = 0.71;
  } else if (id == "phase-gate-co") {
    c.sigma = 6.51;
    c.dk_sigma = 13.20;
    c.t_eval_sigma = 1.09;
  } else if (id == "beamsplit-g2") {
    c.sigmas = {c.r_b / 3.0, c.r_b, 3.0 * c.r_b};
    c.nbar_values = {0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100};
  } else if (id == "tradeoff-sweep") {
    c.xi_values = {0.02, 0.04, 0.06, 0.08, 0.10};
    c.d_b_values = {15.0, 25.0, 38.46};
  } else if (id == "mismatch-sweep") {
    c.dv_over_gsigma = {0.0, 0.05, 0.1, 0.2, 0.4};
    c.grid.n = 128;
  } else if (id == "dispersion-scan") {
    c.r_over_rb = {0.5, 0.8, 1.0, 1.5, 2.0};
    c.veff_over_g = {2, 3, 5, 10, 20, 50, 100};
  } else if (id == "switch-frequency-domain") {
    c.d_b_values = {15.0, 38.46};
    for (int i = -10; i <= 10; ++i) c.omega_values.push_back(mhz(0.2 * i));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct SeriesRow {
  double time;
  std::string name;
  double value;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ConvergenceRow {
  std::string quantity;
  std::string variant;  // base, dt_coarse, grid_coarse, ...
  std::size_t n = 0;
  double dt = 0;
  double value = 0;
  double delta = 0;
  double tol = 0;
  bool pass = true;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<SeriesRow> series;
  std::vector<Table> tables;
  std::vector<ConvergenceRow> convergence;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::pair<std::string, TwoPhotonState>> snapshots;
  bool norm_monotone = true;
  double boundary_ratio = 0.0;     // noninteracting branch, checked against boundary_tol
  double edge_ratio_interacting = 0.0;

  bool converged() const {
    for (const auto& c : convergence)
      if (!c.pass) return false;
    return true;
  }
  double value(const std::string& name) const {
    for (const auto& [k, v] : summary)
      if (k == name) return v;
    throw ConfigError("summary value '" + name + "' not produced");
  }
  bool has(const std::string& name) const {
    for (const auto& kv : summary)
      if (kv.first == name) return true;
    return false;
  }
  const Table& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    throw ConfigError("table '" + name + "' not produced");
  }
  std::vector<double> series_values(const std::string& name) const {
    std::vector<double> out;
    for (const auto& r : series)
      if (r.name == name) out.push_back(r.value);
    return out;
  }
  std::vector<double> series_times(const std::string& name) const {
    std::vector<double> out;
    for (const auto& r : series)
      if (r.name == name) out.push_back(r.time);
    return out;
  }
};

namespace detail {

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline bool non_increasing(const std::vector<double>& v, double tol = 1e-10) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + tol) return false;
  return true;
}

/// Components carrying a photonic (E) or excited-state (P) factor travel at or
/// couple to the vacuum speed of light and wrap the periodic domain.
inline bool slow_component(const std::string& label) {
  return label.find('E') == std::string::npos && label.find('P') == std::string::npos;
}

/// Largest probability density on the domain edges relative to the peak
/// density, over the slow components.
inline double boundary_ratio(const TwoPhotonState& st, bool second_axis = true) {
  double peak = 0.0, edge = 0.0;
  const std::size_t n1 = st.n1(), n2 = st.n2();
  for (std::size_t k = 0; k < st.size(); ++k) {
    if (!slow_component(st.labels[k])) continue;
    const auto& c = st.comps[k];
    for (std::size_t i2 = 0; i2 < n2; ++i2)
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const double a = std::norm(c[i2 * n1 + i1]);
        peak = std::max(peak, a);
        const bool on_edge = i1 == 0 || i1 == n1 - 1 || (second_axis && (i2 == 0 || i2 == n2 - 1));
        if (on_edge) edge = std::max(edge, a);
      }
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

inline void check_boundary(ScenarioResult& r, const TwoPhotonState& st, const SolverConfig& s,
                           bool second_axis = true) {
  const double b = boundary_ratio(st, second_axis);
  r.boundary_ratio = std::max(r.boundary_ratio, b);
  if (b > s.boundary_tol)
    throw SolverError("boundary density " + fmt(b) + " of peak exceeds " + fmt(s.boundary_tol) +
                      "; enlarge domain_sigmas");
}

inline void note_interacting_edge(ScenarioResult& r, const TwoPhotonState& st, bool second_axis = true) {
  r.edge_ratio_interacting = std::max(r.edge_ratio_interacting, boundary_ratio(st, second_axis));
}

inline void add_series(ScenarioResult& r, const Trajectory& tr, const std::string& prefix,
                       const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < tr.size(); ++i)
    for (const auto& n : names) r.series.push_back({tr.times[i], prefix + n, tr.value(i, n)});
}

inline std::size_t nearest_sample(const Trajectory& tr, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < tr.size(); ++i)
    if (std::abs(tr.times[i] - t) < std::abs(tr.times[best] - t)) best = i;
  return best;
}

inline std::vector<double> with_times(std::vector<double> base, std::initializer_list<double> extra) {
  for (double t : extra) base.push_back(t);
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-13; }),
             base.end());
  return base;
}

inline std::vector<double> even_times(double t1, int samples) {
  std::vector<double> out;
  for (int j = 0; j < samples; ++j)
    out.push_back(j + 1 == samples ? t1 : t1 * static_cast<double>(j) / (samples - 1));
  return out;
}

inline std::size_t pick_n(const ScenarioConfig& c, std::size_t fallback) {
  return c.grid.n != 0 ? c.grid.n : fallback;
}

/// Unwraps a phase series so consecutive samples differ by less than pi.
inline std::vector<double> unwrap(const std::vector<double>& phi) {
  std::vector<double> out = phi;
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    d = principal_angle(d);
    out[i] = out[i - 1] + d;
  }
  return out;
}

/// Appends the dt-halving and grid-doubling rows for `headline`. Each
/// comparison pairs the base run with a coarser one (dt doubled, n halved);
/// when the coarse grid cannot resolve the pulse the refined grid is used.
inline void convergence_stanza(ScenarioResult& r, const std::string& quantity,
                               const ScenarioConfig& cfg, std::size_t n_base, double base,
                               const std::function<double(const ScenarioConfig&)>& headline) {
  if (!cfg.solver.convergence) return;
  r.convergence.push_back({quantity, "base", n_base, cfg.solver.dt, base, 0.0, 0.0, true});
  {
    ScenarioConfig c = cfg;
    c.solver.convergence = false;
    c.solver.dt = 2.0 * cfg.solver.dt;
    std::string variant = "dt_coarse";
    double v;
    try {
      v = headline(c);
    } catch (const ConfigError&) {
      c.solver.dt = 0.5 * cfg.solver.dt;
      variant = "dt_fine";
      v = headline(c);
    }
    const double d = std::abs(v - base);
    r.convergence.push_back({quantity, variant, n_base, c.solver.dt, v, d, cfg.solver.dt_tol,
                             d <= cfg.solver.dt_tol});
  }
  {
    ScenarioConfig c = cfg;
    c.solver.convergence = false;
    c.grid.n = n_base / 2;
    std::string variant = "grid_coarse";
    double v;
    try {
      if (c.grid.n < 8) throw ConfigError("grid too small");
      v = headline(c);
    } catch (const ConfigError&) {
      c.grid.n = 2 * n_base;
      variant = "grid_fine";
      v = headline(c);
    }
    const double d = std::abs(v - base);
    r.convergence.push_back({quantity, variant, c.grid.n, cfg.solver.dt, v, d,
                             cfg.solver.grid_tol, d <= cfg.solver.grid_tol});
  }
}

inline double interaction_scale(const PhysicsParams& p) {
  const double s = std::sin(mixing_angle(p.g_p, p.omega1));
  return s * s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entanglement (16-component model)
// ---------------------------------------------------------------------------

struct EntangleGeometry {
  PhysicsParams params;
  double g = 0;
  double sigma = 0;
  double dv = 0;
  double window = 0;  // coupling on over [0, window]
  double t_stop = 0;  // end of the window the domain is sized for
  double t_end = -1;  // evolution end; < 0 runs to t_stop
  double separation = -1;  // < 0: pulses cross at t_cross
  double t_cross = -1;     // < 0: middle of the coupling window
  std::size_t n = 256;
  double domain_sigmas = 24;
  double dt = 2e-4;
  bool interacting = true;
};

struct EntangleRun {
  Trajectory traj;
  TwoPhotonState final_state;
  std::vector<std::pair<std::string, TwoPhotonState>> snapshots;
};

namespace detail {

struct EntangleSetup {
  ModelSpec model;
  TwoPhotonState state;
  std::vector<cd> reference;
  std::vector<MovingTerm> fs_terms;
  std::vector<MovingTerm> bb_terms;
  double v_a = 0, v_b = 0;
};

inline EntangleSetup entangle_setup(const EntangleGeometry& geo) {
  const PhysicsParams& p = geo.params;
  EntangleSetup s;
  s.v_a = dark_group_velocity(p, p.omega1);
  s.v_b = s.v_a + geo.dv;
  if (!(s.v_b > 0)) throw ConfigError("linear-mode velocity must stay positive");
  const double t_cross = geo.t_cross >= 0 ? geo.t_cross : 0.5 * geo.window;
  const double sep = geo.separation >= 0 ? geo.separation : 2.0 * s.v_b * t_cross;
  const double vmax = std::max(s.v_a, s.v_b);
  const double L = geo.domain_sigmas * geo.sigma + sep + 2.0 * vmax * geo.t_stop;
  const Grid1D grid = Grid1D::centered(geo.n, L);
  const auto sched = CouplingSchedule::square_time(geo.g, 0.0, geo.window);
  EitFullConfig fc;
  fc.params = p;
  fc.g_plus = sched;
  fc.g_minus = sched;
  fc.v_b = s.v_b;
  fc.counter = true;
  fc.potential = Potential{geo.interacting ? p.c6 : 0.0, grid.spacing(), 1.0};
  s.model = make_eit_full16(fc);
  s.state = TwoPhotonState(s.model.labels, grid, grid);
  s.state.set_product("BB", gaussian_pulse(grid, {-0.5 * sep, geo.sigma, 0.0}),
                      gaussian_pulse(grid, {0.5 * sep, geo.sigma, 0.0}));
  s.reference = s.state["BB"];
  const double th = mixing_angle(p.g_p, p.omega1);
  const double c = std::cos(th), sn = std::sin(th), r2 = 1.0 / std::sqrt(2.0);
  s.fs_terms = {{ModeProjection{{{"EB", c * r2}, {"SB", -sn * r2}}}, s.v_a, -s.v_b},
                {ModeProjection{{{"BE", c * r2}, {"BS", -sn * r2}}}, s.v_b, -s.v_a}};
  s.bb_terms = {{ModeProjection::component("BB"), s.v_b, -s.v_b}};
  return s;
}

}  // namespace detail

/// Runs the counterpropagating 16-component model from |b+ b-> and samples
/// F_s, F_bb and the F_s phase at `times`.
inline EntangleRun run_entangle_branch(const EntangleGeometry& geo, const std::vector<double>& times,
                                       const std::vector<double>& snapshot_times = {}) {
  auto s = detail::entangle_setup(geo);
  EvolveOptions opt;
  opt.dt = geo.dt;
  opt.sample_times = times;
  opt.record_components = false;
  EntangleRun run;
  run.traj = evolve(s.state, s.model, geo.t_end >= 0 ? geo.t_end : geo.t_stop, opt, [&](const TwoPhotonState& st, ObservableRecord& rec) {
    const auto fs = fidelity_phase(st, s.reference, st.time, s.fs_terms);
    const auto fb = fidelity_phase(st, s.reference, st.time, s.bb_terms);
    rec.emplace_back("F_s", fs.F);
    rec.emplace_back("phi_s", fs.phi);
    rec.emplace_back("F_bb", fb.F);
    for (double ts : snapshot_times)
      if (std::abs(ts - st.time) < 1e-12) run.snapshots.emplace_back("t=" + detail::fmt(st.time), st);
  });
  run.final_state = std::move(s.state);
  return run;
}

inline EntangleGeometry entangle_geometry(const ScenarioConfig& cfg) {
  EntangleGeometry geo;
  geo.params = cfg.physics();
  geo.g = cfg.coupling();
  geo.sigma = cfg.pulse_sigma();
  geo.dv = cfg.dv;
  geo.window = kPi / (std::sqrt(2.0) * geo.g);
  geo.t_stop = geo.window;
  geo.separation = cfg.separation;
  geo.n = detail::pick_n(cfg, 256);
  geo.domain_sigmas = cfg.grid.domain_sigmas;
  geo.dt = cfg.solver.dt;
  return geo;
}

inline ScenarioResult run_entangle(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "entangle";
  EntangleGeometry geo = entangle_geometry(cfg);
  const double g = geo.g;
  const double t_peak = kPi / (2.0 * std::sqrt(2.0) * g);
  const auto times = detail::with_times(detail::even_times(geo.window, cfg.solver.samples), {t_peak});
  const std::vector<double> snaps =
      cfg.snapshots ? std::vector<double>{0.0, t_peak, geo.window} : std::vector<double>{};

  const EntangleRun b = run_entangle_branch(geo, times, snaps);
  detail::note_interacting_edge(r, b.final_state);
  r.norm_monotone = r.norm_monotone && detail::non_increasing(b.traj.series("norm"));
  for (auto& sn : b.snapshots) r.snapshots.emplace_back("blockaded_" + sn.first, sn.second);
  detail::add_series(r, b.traj, "", {"F_s", "F_bb", "phi_s", "norm"});
  double residual = 0.0;
  for (std::size_t i = 0; i < b.traj.size(); ++i) {
    const double t = b.traj.times[i];
    const double s2 = std::pow(std::sin(std::sqrt(2.0) * g * t), 2);
    r.series.push_back({t, "F_s_expected", s2});
    r.series.push_back({t, "F_bb_expected", 1.0 - s2});
    residual = std::max(residual, std::abs(b.traj.value(i, "F_s") - s2));
  }
  const std::size_t ip = detail::nearest_sample(b.traj, t_peak);
  const double f_peak = b.traj.value(ip, "F_s");
  r.series.push_back({t_peak, "F_s_peak", f_peak});
  r.summary.emplace_back("F_s_peak", f_peak);
  r.summary.emplace_back("t_peak_us", t_peak);
  r.summary.emplace_back("F_bb_at_peak", b.traj.value(ip, "F_bb"));
  r.summary.emplace_back("F_s_t0", b.traj.value(0, "F_s"));
  r.summary.emplace_back("F_bb_t0", b.traj.value(0, "F_bb"));
  r.summary.emplace_back("F_s_residual_max", residual);
  r.summary.emplace_back("norm_final", b.traj.value(b.traj.size() - 1, "norm"));

  {
    EntangleGeometry g0 = geo;
    g0.interacting = false;
    const EntangleRun n = run_entangle_branch(g0, times);
    detail::check_boundary(r, n.final_state, cfg.solver);
    r.norm_monotone = r.norm_monotone && detail::non_increasing(n.traj.series("norm"));
    detail::add_series(r, n.traj, "nonint:", {"F_s", "F_bb", "norm"});
    double fmax = 0.0;
    for (double f : n.traj.series("F_s")) fmax = std::max(fmax, f);
    r.summary.emplace_back("F_s_nonint_max", fmax);
    r.summary.emplace_back("pop_aa_nonint_loss", 1.0 - n.traj.value(n.traj.size() - 1, "norm"));
  }

  auto headline = [&](const ScenarioConfig& c) {
    EntangleGeometry gg = entangle_geometry(c);
    gg.t_end = t_peak;
    const EntangleRun run = run_entangle_branch(gg, {t_peak});
    return run.traj.value(run.traj.size() - 1, "F_s");
  };
  detail::convergence_stanza(r, "F_s_peak", cfg, geo.n, f_peak, headline);
  r.settings = {{"model", "eit-full-16"}, {"scheme", to_string(resolve_scheme(SplitScheme::Auto, detail::entangle_setup(geo).model))},
                {"n", std::to_string(geo.n)}, {"dt_us", detail::fmt(geo.dt)},
                {"g_rad_per_us", detail::fmt(g)}, {"sigma_um", detail::fmt(geo.sigma)},
                {"window_us", detail::fmt(geo.window)}};
  return r;
}

// ---------------------------------------------------------------------------
// Trade-off and velocity-mismatch sweeps
// ---------------------------------------------------------------------------

inline ScenarioResult run_tradeoff_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "tradeoff-sweep";
  Table t{"tradeoff", {"d_b", "xi", "eta", "sigma_um", "g_rad_per_us", "r_b_over_sigma", "t_peak_us", "n",
                       "F_s_operation", "F_s_total", "xi_roundtrip_rel"}, {}};
  std::map<std::pair<std::size_t, std::size_t>, double> fs;
  double roundtrip = 0.0, slow_light_dev = 0.0;
  const double g_ref = cfg.coupling();
  double first_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;

  auto point = [&](const ScenarioConfig& c, double d_b, double xi, double* out_sigma, double* out_g,
                   bool interacting = true) {
    ScenarioConfig cc = c;
    PhysicsParams p = c.params;
    cc.z_b = d_b * p.gamma * p.c / (p.g_p * p.g_p);
    p.c6 = c6_from_eit_radius(p, cc.z_b);
    const LossTargets lt = loss_targets(xi, c.eta, p);
    EntangleGeometry geo;
    geo.params = p;
    geo.g = lt.g;
    geo.sigma = lt.sigma;
    geo.window = kPi / (std::sqrt(2.0) * lt.g);
    geo.t_stop = kPi / (2.0 * std::sqrt(2.0) * lt.g);
    geo.separation = c.separation;
    geo.domain_sigmas = c.grid.domain_sigmas;
    const double v = dark_group_velocity(p, p.omega1);
    const double length = geo.domain_sigmas * geo.sigma + 3.0 * v * geo.window;
    geo.n = c.grid.n;
    if (geo.n == 0)
      for (geo.n = 128; length / static_cast<double>(geo.n) > geo.sigma / 8.0;) geo.n *= 2;
    geo.dt = c.solver.dt * std::max(1.0, g_ref / lt.g);
    geo.interacting = interacting;
    if (out_sigma) *out_sigma = lt.sigma;
    if (out_g) *out_g = lt.g;
    return run_entangle_branch(geo, {geo.t_stop});
  };

  for (std::size_t i = 0; i < cfg.d_b_values.size(); ++i)
    for (std::size_t j = 0; j < cfg.xi_values.size(); ++j) {
      const double d_b = cfg.d_b_values[i], xi = cfg.xi_values[j];
      double sigma = 0, g = 0;
      const EntangleRun run = point(cfg, d_b, xi, &sigma, &g);
      PhysicsParams p = cfg.params;
      p.c6 = c6_from_eit_radius(p, d_b * p.gamma * p.c / (p.g_p * p.g_p));
      detail::note_interacting_edge(r, run.final_state);
      r.norm_monotone = r.norm_monotone && detail::non_increasing(run.traj.series("norm"));
      const double f_total = run.traj.value(run.traj.size() - 1, "F_s");
      const double f = f_total / run.traj.value(run.traj.size() - 1, "norm");
      fs[{i, j}] = f;
      if (i == 0 && j == 0) n = run.final_state.n1();
      if (i == 0 && j == 0)
        detail::check_boundary(r, point(cfg, d_b, xi, nullptr, nullptr, false).final_state, cfg.solver);
      if (i == 0 && j == 0) first_value = f;
      const LossBudget lb = loss_budget(sigma, g, p);
      const double rt = std::abs(lb.xi - xi) / xi;
      roundtrip = std::max(roundtrip, rt);
      slow_light_dev = std::max(slow_light_dev, std::abs(sigma_for_xi(xi, p) - sigma) / sigma);
      const double rb = derived_scales(p, g).r_b;
      t.rows.push_back({d_b, xi, cfg.eta, sigma, g, rb / sigma, run.traj.times.back(),
                        static_cast<double>(run.final_state.n1()), f, f_total, rt});
      r.series.push_back({run.traj.times.back(), "F_s[d_b=" + detail::fmt(d_b) + ",xi=" + detail::fmt(xi) + "]", f});
    }
  bool mono_xi = true, mono_db = true;
  for (std::size_t i = 0; i < cfg.d_b_values.size(); ++i)
    for (std::size_t j = 1; j < cfg.xi_values.size(); ++j)
      if ((cfg.xi_values[j] > cfg.xi_values[j - 1]) != (fs[{i, j}] > fs[{i, j - 1}])) mono_xi = false;
  for (std::size_t j = 0; j < cfg.xi_values.size(); ++j)
    for (std::size_t i = 1; i < cfg.d_b_values.size(); ++i)
      if ((cfg.d_b_values[i] > cfg.d_b_values[i - 1]) != (fs[{i, j}] > fs[{i - 1, j}])) mono_db = false;
  r.tables.push_back(std::move(t));
  r.summary.emplace_back("monotone_in_xi", mono_xi ? 1.0 : 0.0);
  r.summary.emplace_back("monotone_in_d_b", mono_db ? 1.0 : 0.0);
  r.summary.emplace_back("xi_roundtrip_max_rel", roundtrip);
  r.summary.emplace_back("sigma_slow_light_formula_rel_dev", slow_light_dev);
  auto headline = [&](const ScenarioConfig& c) {
    const EntangleRun run = point(c, cfg.d_b_values[0], cfg.xi_values[0], nullptr, nullptr);
    return run.traj.value(run.traj.size() - 1, "F_s") / run.traj.value(run.traj.size() - 1, "norm");
  };
  detail::convergence_stanza(r, "F_s_operation[first point]", cfg, n, first_value, headline);
  r.settings = {{"model", "eit-full-16"}, {"n", cfg.grid.n ? std::to_string(n) : "auto (sigma >= 8 cells)"},
                {"dt_us", detail::fmt(cfg.solver.dt) + " x max(1, g_fig / g)"},
                {"eta", detail::fmt(cfg.eta)}};
  return r;
}

/// Oscillation contrast max - min of F_s over sqrt(2) g t in [pi/2, 3 pi/2].
inline double oscillation_visibility(const Trajectory& tr, double g) {
  double hi = -1.0, lo = 2.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double x = std::sqrt(2.0) * g * tr.times[i];
    if (x < 0.5 * kPi - 1e-9 || x > 1.5 * kPi + 1e-9) continue;
    const double f = tr.value(i, "F_s");
    hi = std::max(hi, f);
    lo = std::min(lo, f);
  }
  if (hi < 0) throw ConfigError("no samples inside the visibility window");
  return hi - lo;
}

inline ScenarioResult run_mismatch_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "mismatch-sweep";
  const std::size_t n = detail::pick_n(cfg, 128);
  std::vector<double> dvs = cfg.dv_over_gsigma;
  if (std::find(dvs.begin(), dvs.end(), 0.0) == dvs.end()) dvs.insert(dvs.begin(), 0.0);
  std::sort(dvs.begin(), dvs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  Table t{"mismatch", {"dv_over_gsigma", "dv_um_per_us", "visibility", "degradation", "F_s_peak"}, {}};

  auto run_point = [&](const ScenarioConfig& c, double ratio, bool interacting = true) {
    EntangleGeometry geo = entangle_geometry(c);
    geo.interacting = interacting;
    geo.n = detail::pick_n(c, 128);
    geo.dv = ratio * geo.g * geo.sigma;
    const double t_peak = kPi / (2.0 * std::sqrt(2.0) * geo.g);
    geo.window = 3.0 * t_peak;
    geo.t_stop = geo.window;
    geo.t_cross = t_peak;
    const auto times = detail::with_times(detail::even_times(geo.window, std::max(c.solver.samples, 193)),
                                          {t_peak, 2.0 * t_peak, 3.0 * t_peak});
    return std::make_pair(run_entangle_branch(geo, times), geo);
  };

  double vis0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> vis;
  for (double ratio : dvs) {
    auto [run, geo] = run_point(cfg, ratio);
    detail::note_interacting_edge(r, run.final_state);
    if (ratio == dvs.back()) detail::check_boundary(r, run_point(cfg, ratio, false).first.final_state, cfg.solver);
    r.norm_monotone = r.norm_monotone && detail::non_increasing(run.traj.series("norm"));
    const double v = oscillation_visibility(run.traj, geo.g);
    if (ratio == 0.0) vis0 = v;
    vis.push_back(v);
    const double t_peak = kPi / (2.0 * std::sqrt(2.0) * geo.g);
    const double fpk = run.traj.value(detail::nearest_sample(run.traj, t_peak), "F_s");
    t.rows.push_back({ratio, geo.dv, v, 0.0, fpk});
    detail::add_series(r, run.traj, "dv_over_gsigma=" + detail::fmt(ratio) + ":", {"F_s"});
  }
  bool mono = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    t.rows[i][3] = 1.0 - t.rows[i][2] / vis0;
    if (i > 0 && std::abs(dvs[i]) > std::abs(dvs[i - 1]) && vis[i] > vis[i - 1] + 1e-12) mono = false;
    r.summary.emplace_back("degradation[dv_over_gsigma=" + detail::fmt(dvs[i]) + "]", t.rows[i][3]);
  }
  r.tables.push_back(std::move(t));
  r.summary.emplace_back("visibility_dv0", vis0);
  r.summary.emplace_back("visibility_monotone", mono ? 1.0 : 0.0);
  auto headline = [&](const ScenarioConfig& c) {
    auto pr = run_point(c, 0.0);
    return oscillation_visibility(pr.first.traj, pr.second.g);
  };
  detail::convergence_stanza(r, "visibility_dv0", cfg, n, vis0, headline);
  r.settings = {{"model", "eit-full-16"}, {"n", std::to_string(n)}, {"dt_us", detail::fmt(cfg.solver.dt)}};
  return r;
}

// ---------------------------------------------------------------------------
// Stored-gate switch (atomic scheme, E/P/S for both target modes)
// ---------------------------------------------------------------------------

namespace detail {

struct SwitchSetup {
  ModelSpec model;
  TwoPhotonState state;
  std::vector<cd> reference;
  ModeProjection b_mode, a_mode;
  double v_a = 0, v_b = 0;
};

inline SwitchSetup switch_setup(const ScenarioConfig& cfg, double sigma, double t_cross,
                                double t_stop, bool interacting) {
  const PhysicsParams p = cfg.physics();
  const double g = cfg.coupling();
  SwitchSetup s;
  s.v_a = dark_group_velocity(p, p.omega1);
  s.v_b = dark_group_velocity(p, p.omega2);
  const double start = cfg.separation >= 0 ? -cfg.separation : -s.v_b * t_cross;
  const double L = cfg.grid.domain_sigmas * sigma + std::abs(start) + 2.0 * std::max(s.v_a, s.v_b) * t_stop;
  const Grid1D g1 = Grid1D::centered(pick_n(cfg, 512), L);
  const Grid1D g2 = Grid1D::centered(cfg.grid.n_gate, static_cast<double>(cfg.grid.n_gate) * g1.spacing());
  s.model = make_eit_atomic6(p, CouplingSchedule::square_time(g, 0.0, t_stop),
                             Potential{interacting ? p.c6 : 0.0, g1.spacing(), 1.0});
  s.state = TwoPhotonState(s.model.labels, g1, g2);
  const auto h = gaussian_pulse(g1, {start, sigma, 0.0});
  std::vector<cd> gate(g2.n, cd(0.0, 0.0));
  gate[g2.n / 2] = 1.0 / std::sqrt(g2.spacing());
  const double th1 = mixing_angle(p.g_p, p.omega1), th2 = mixing_angle(p.g_p, p.omega2);
  s.state.set_product("EbS", h, gate, std::cos(th2));
  s.state.set_product("SbS", h, gate, -std::sin(th2));
  TwoPhotonState ref({"x"}, g1, g2);
  ref.set_product("x", h, gate);
  s.reference = ref["x"];
  s.b_mode = ModeProjection{{{"EbS", std::cos(th2)}, {"SbS", -std::sin(th2)}}};
  s.a_mode = ModeProjection{{{"EaS", std::cos(th1)}, {"SaS", -std::sin(th1)}}};
  return s;
}

}  // namespace detail

inline Trajectory run_switch_branch(const ScenarioConfig& cfg, double sigma, double t_cross,
                                    double t_stop, bool interacting, const std::vector<double>& times,
                                    TwoPhotonState* final_state = nullptr, Table* profile = nullptr,
                                    std::size_t profile_stride = 4, double t_end = -1) {
  auto s = detail::switch_setup(cfg, sigma, t_cross, t_stop, interacting);
  std::size_t sample = 0;
  EvolveOptions opt;
  opt.dt = cfg.solver.dt;
  opt.sample_times = times;
  opt.record_components = false;
  Trajectory tr = evolve(s.state, s.model, t_end >= 0 ? t_end : t_stop, opt, [&](const TwoPhotonState& st, ObservableRecord& rec) {
    const auto fb = fidelity_phase(st, s.reference, st.time, {{s.b_mode, s.v_b, 0.0}});
    const auto fa = fidelity_phase(st, s.reference, st.time, {{s.a_mode, s.v_a, 0.0}});
    rec.emplace_back("F_b", fb.F);
    rec.emplace_back("phi_b", fb.phi);
    rec.emplace_back("F_a", fa.F);
    rec.emplace_back("pop_a", mode_population(st, s.a_mode));
    rec.emplace_back("pop_b", mode_population(st, s.b_mode));
    if (profile && (sample % profile_stride == 0 || sample + 1 == times.size())) {
      const auto pb = project(st, s.b_mode), pa = project(st, s.a_mode);
      const std::size_t i2 = st.n2() / 2, n1 = st.n1();
      const double dz2 = st.grid2.spacing();
      for (std::size_t i1 = 0; i1 < n1; ++i1)
        profile->rows.push_back({st.time, st.grid1.coordinate(i1), std::norm(pb[i2 * n1 + i1]) * dz2,
                                 std::norm(pa[i2 * n1 + i1]) * dz2});
    }
    ++sample;
  });
  if (final_state) *final_state = std::move(s.state);
  return tr;
}

inline ScenarioResult run_switch(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "switch";
  const double g = cfg.coupling();
  const double t_half = kPi / (2.0 * g), t_full = kPi / g;
  const auto times = detail::with_times(detail::even_times(t_full, cfg.solver.samples), {t_half, t_full});
  const auto sigmas = cfg.pulse_sigmas();
  Table profile{"profile", {"time_us", "z_um", "density_b", "density_a"}, {}};
  const std::size_t stride = std::max<std::size_t>(1, times.size() / 16);
  for (double sigma : sigmas) {
    const std::string tag = "[sigma=" + detail::fmt(sigma) + "]";
    TwoPhotonState fin;
    const Trajectory b = run_switch_branch(cfg, sigma, t_half, t_full, true, times, &fin,
                                           sigma == sigmas[0] ? &profile : nullptr, stride);
    if (cfg.snapshots) r.snapshots.emplace_back("blockaded_final" + tag, fin);
    detail::note_interacting_edge(r, fin, false);
    const Trajectory n = run_switch_branch(cfg, sigma, t_half, t_full, false, times, &fin);
    detail::check_boundary(r, fin, cfg.solver, false);
    if (cfg.snapshots) r.snapshots.emplace_back("free_final" + tag, fin);
    r.norm_monotone = r.norm_monotone && detail::non_increasing(b.series("norm")) &&
                      detail::non_increasing(n.series("norm"));
    detail::add_series(r, b, "blockaded" + tag + ":", {"F_b", "phi_b", "pop_a", "pop_b", "norm"});
    detail::add_series(r, n, "nonint" + tag + ":", {"F_b", "phi_b", "F_a", "pop_a", "pop_b", "norm"});
    const std::size_t ih = detail::nearest_sample(b, t_half), ie = b.size() - 1;
    r.summary.emplace_back("F_switch" + tag, b.value(ih, "F_b"));
    r.summary.emplace_back("F_convert_nonint" + tag, n.value(ih, "F_a"));
    const double dphi = principal_angle(n.value(ie, "phi_b") - b.value(ie, "phi_b"));
    r.summary.emplace_back("pi_phase_error" + tag, std::abs(std::abs(dphi) - kPi));
    r.summary.emplace_back("F_b_nonint_full_period" + tag, n.value(ie, "F_b"));
  }
  r.tables.push_back(std::move(profile));
  const double base = r.value("F_switch[sigma=" + detail::fmt(sigmas[0]) + "]");
  auto headline = [&](const ScenarioConfig& c) {
    const Trajectory tr = run_switch_branch(c, sigmas[0], t_half, t_full, true, {t_half}, nullptr, nullptr, 4, t_half);
    return tr.value(tr.size() - 1, "F_b");
  };
  detail::convergence_stanza(r, "F_switch", cfg, detail::pick_n(cfg, 512), base, headline);
  r.settings = {{"model", "eit-atomic-6"}, {"n", std::to_string(detail::pick_n(cfg, 512))},
                {"n_gate", std::to_string(cfg.grid.n_gate)}, {"dt_us", detail::fmt(cfg.solver.dt)},
                {"g_rad_per_us", detail::fmt(g)}};
  return r;
}

// ---------------------------------------------------------------------------
// Beam splitter statistics (copropagating four-mode model)
// ---------------------------------------------------------------------------

namespace detail {

struct BeamsplitRun {
  Trajectory traj;
  TwoPhotonState state;
  std::vector<cd> single;
  double v = 0;
};

inline BeamsplitRun beamsplit_branch(const ScenarioConfig& cfg, double sigma, bool interacting,
                                     const std::vector<double>& times) {
  const PhysicsParams p = cfg.physics();
  const double g = cfg.coupling();
  const double v = dark_group_velocity(p, p.omega1);
  const double t_end = kPi / (2.0 * g);
  const double L = cfg.grid.domain_sigmas * sigma + 2.0 * v * t_end;
  const Grid1D grid = Grid1D::centered(pick_n(cfg, 512), L);
  const ModelSpec m = make_generic_co(CouplingSchedule::square_time(g, 0.0, t_end), v, 0.0,
                                      Potential{interacting ? p.c6 : 0.0, grid.spacing(), interaction_scale(p)});
  BeamsplitRun out;
  out.v = v;
  out.state = TwoPhotonState(m.labels, grid, grid);
  const double z0 = -0.5 * v * t_end;
  const auto h = gaussian_pulse(grid, {z0, sigma, 0.0});
  out.state.set_product("bb", h, h);
  EvolveOptions opt;
  opt.dt = cfg.solver.dt;
  opt.sample_times = times;
  out.traj = evolve(out.state, m, t_end, opt, [&](const TwoPhotonState& st, ObservableRecord& rec) {
    rec.emplace_back("pop_one_a", st.component_norm(st.index_of("ab")) + st.component_norm(st.index_of("ba")));
  });
  // Independently propagated single photon: a pure translation times the Rabi amplitude.
  const auto moved = gaussian_pulse(grid, {z0 + v * t_end, sigma, 0.0});
  out.single.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out.single[i] = cd(0.0, -std::sin(g * t_end)) * moved[i];
  return out;
}

}  // namespace detail

inline ScenarioResult run_beamsplit_g2(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "beamsplit-g2";
  const double g = cfg.coupling();
  const double t_end = kPi / (2.0 * g);
  const auto sigmas = cfg.pulse_sigmas();
  Table prof{"g2", {"sigma_um", "r_um", "tau_us", "g2", "weight"}, {}};
  const auto times = detail::even_times(t_end, cfg.solver.samples);
  double base = 0.0;
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    const double sigma = sigmas[s];
    const std::string tag = "[sigma=" + detail::fmt(sigma) + "]";
    auto run = detail::beamsplit_branch(cfg, sigma, true, times);
    detail::note_interacting_edge(r, run.state);
    if (s == 0) detail::check_boundary(r, detail::beamsplit_branch(cfg, sigma, false, {t_end}).state, cfg.solver);
    r.norm_monotone = r.norm_monotone && detail::non_increasing(run.traj.series("norm"));
    const G2Profile gp = g2_correlation(run.state, run.single, "aa", run.v);
    const std::size_t i0 = run.state.n1() - 1;
    for (std::size_t i = 0; i < gp.r.size(); ++i)
      prof.rows.push_back({sigma, gp.r[i], gp.tau[i], gp.g2[i], gp.weight[i]});
    const double g20 = gp.g2[i0];
    if (s == 0) base = g20;
    r.summary.emplace_back("g2_0" + tag, g20);
    const double cross = g2_crossing(gp, 0.5);
    r.summary.emplace_back("g2_half_crossing_over_r_b" + tag, cross / cfg.r_b);
    double far = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < gp.r.size(); ++i)
      if (!std::isnan(gp.g2[i]) && gp.r[i] >= 3.0 * cfg.r_b) { far = gp.g2[i]; break; }
    r.summary.emplace_back("g2_at_3r_b" + tag, far);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gp.r.size(); ++i)
      if (!std::isnan(gp.g2[i])) {
        num += gp.g2[i] * gp.weight[i];
        den += gp.weight[i];
      }
    r.summary.emplace_back("g2_pulse_averaged" + tag, num / den);
    for (std::size_t i = 0; i < run.traj.size(); ++i) {
      const double t = run.traj.times[i];
      r.series.push_back({t, "pop_one_a" + tag, run.traj.value(i, "pop_one_a")});
      r.series.push_back({t, "pop_one_a_expected" + tag, std::pow(std::sin(std::sqrt(2.0) * g * t), 2)});
      r.series.push_back({t, "norm" + tag, run.traj.value(i, "norm")});
    }
    double dev = 0.0;
    for (std::size_t i = 0; i < run.traj.size(); ++i)
      dev = std::max(dev, std::abs(run.traj.value(i, "pop_one_a") -
                                   std::pow(std::sin(std::sqrt(2.0) * g * run.traj.times[i]), 2)));
    r.summary.emplace_back("pop_one_a_max_dev" + tag, dev);
  }
  r.tables.push_back(std::move(prof));
  Table p1{"p1", {"nbar", "t_us", "P1", "asymptote"}, {}};
  std::vector<double> nbars = cfg.nbar_values;
  if (nbars.empty()) nbars = {1, 20, 100};
  for (double nb : nbars) {
    const double t = kPi / (2.0 * std::sqrt(nb) * g);
    const double v = coherent_p1(nb, g, t);
    p1.rows.push_back({nb, t, v, coherent_p1_asymptote(nb)});
    r.summary.emplace_back("P1[nbar=" + detail::fmt(nb) + "]", v);
  }
  r.tables.push_back(std::move(p1));
  auto headline = [&](const ScenarioConfig& c) {
    auto run = detail::beamsplit_branch(c, sigmas[0], true, {t_end});
    const G2Profile gp = g2_correlation(run.state, run.single, "aa", run.v);
    return gp.g2[run.state.n1() - 1];
  };
  detail::convergence_stanza(r, "g2_0", cfg, detail::pick_n(cfg, 512), base, headline);
  r.settings = {{"model", "generic-co-4"}, {"n", std::to_string(detail::pick_n(cfg, 512))},
                {"dt_us", detail::fmt(cfg.solver.dt)}, {"g_rad_per_us", detail::fmt(g)}};
  return r;
}

// ---------------------------------------------------------------------------
// Dressed-interaction phase gates
// ---------------------------------------------------------------------------

namespace detail {

struct GateRun {
  Trajectory traj;
  TwoPhotonState state;
};

inline GateRun counter_gate_branch(const ScenarioConfig& cfg, bool interacting,
                                   const std::vector<double>& times) {
  const PhysicsParams p = cfg.physics();
  const double g = cfg.coupling();
  const double v = dark_group_velocity(p, p.omega1);
  const double sigma = cfg.pulse_sigma();
  const double dk = cfg.dk_sigma / sigma;
  const double t_g = cfg.t_eval_sigma * sigma / v;
  const double sep = cfg.separation >= 0 ? cfg.separation : v * t_g;
  const double L = cfg.grid.domain_sigmas * sigma + sep + 2.0 * v * t_g;
  const Grid1D grid = Grid1D::centered(pick_n(cfg, 512), L);
  GenericCounterConfig gc;
  gc.g_plus = CouplingSchedule::square_time(g, 0.0, t_g);
  gc.g_minus = CouplingSchedule::square_time(g * cfg.g_ratio, 0.0, t_g);
  gc.v_plus = v;
  gc.v_minus = v;
  gc.dk_plus = dk;
  gc.dk_minus = -dk;
  gc.potential = Potential{interacting ? p.c6 : 0.0, grid.spacing(), interaction_scale(p)};
  const ModelSpec m = make_generic_counter(gc);
  GateRun out;
  out.state = TwoPhotonState(m.labels, grid, grid);
  out.state.set_product("b+b-", gaussian_pulse(grid, {-0.5 * sep, sigma, 0.0}),
                        gaussian_pulse(grid, {0.5 * sep, sigma, 0.0}));
  const std::vector<cd> ref = out.state["b+b-"];
  EvolveOptions opt;
  opt.dt = cfg.solver.dt;
  opt.sample_times = times;
  out.traj = evolve(out.state, m, t_g, opt, [&](const TwoPhotonState& st, ObservableRecord& rec) {
    const auto f = fidelity_phase(st, ref, st.time, ModeProjection::component("b+b-"), v, -v);
    rec.emplace_back("F", f.F);
    rec.emplace_back("phi", f.phi);
  });
  return out;
}

inline GateRun co_gate_branch(const ScenarioConfig& cfg, bool interacting, const std::vector<double>& times) {
  const PhysicsParams p = cfg.physics();
  const double v = dark_group_velocity(p, p.omega1);
  const double sigma = cfg.pulse_sigma();
  const double dk = cfg.dk_sigma / sigma;
  const double t_end = cfg.t_eval_sigma * sigma / v;
  const double L = cfg.grid.domain_sigmas * sigma + 2.0 * v * t_end;
  const Grid1D grid = Grid1D::centered(pick_n(cfg, 512), L);
  const ModelSpec m = make_generic_co(CouplingSchedule::adiabatic_ramp(v, dk, sigma), v, dk,
                                      Potential{interacting ? p.c6 : 0.0, grid.spacing(), interaction_scale(p)});
  GateRun out;
  out.state = TwoPhotonState(m.labels, grid, grid);
  const auto h = gaussian_pulse(grid, {-0.5 * v * t_end, sigma, 0.0});
  const double r2 = 1.0 / std::sqrt(2.0);
  out.state.set_product("ab", h, h, r2);
  out.state.set_product("ba", h, h, r2);
  TwoPhotonState ref({"x"}, grid, grid);
  ref.set_product("x", h, h);
  const std::vector<cd> reference = ref["x"];
  const auto mode = ModeProjection::symmetric(ModeProjection::component("ab"), ModeProjection::component("ba"));
  EvolveOptions opt;
  opt.dt = cfg.solver.dt;
  opt.sample_times = times;
  out.traj = evolve(out.state, m, t_end, opt, [&](const TwoPhotonState& st, ObservableRecord& rec) {
    const auto f = fidelity_phase(st, reference, st.time, mode, v, v);
    rec.emplace_back("F", f.F);
    rec.emplace_back("phi", f.phi);
  });
  return out;
}

inline void gate_rows(ScenarioResult& r, const GateRun& b, const GateRun& n,
                      const std::function<double(double)>& analytic) {
  const auto pb = unwrap(b.traj.series("phi"));
  const auto pn = unwrap(n.traj.series("phi"));
  std::vector<double> dphi(pb.size());
  for (std::size_t i = 0; i < pb.size(); ++i) dphi[i] = pb[i] - pn[i];
  const auto d = unwrap(dphi);
  for (std::size_t i = 0; i < b.traj.size(); ++i) {
    const double t = b.traj.times[i];
    r.series.push_back({t, "F_b", b.traj.value(i, "F")});
    r.series.push_back({t, "F_n", n.traj.value(i, "F")});
    r.series.push_back({t, "phi_b", b.traj.value(i, "phi")});
    r.series.push_back({t, "phi_n", n.traj.value(i, "phi")});
    r.series.push_back({t, "dphi", d[i]});
    r.series.push_back({t, "dphi_analytic", analytic(t)});
    r.series.push_back({t, "norm_b", b.traj.value(i, "norm")});
    r.series.push_back({t, "norm_n", n.traj.value(i, "norm")});
  }
  const std::size_t e = b.traj.size() - 1;
  r.summary.emplace_back("F_n", n.traj.value(e, "F"));
  r.summary.emplace_back("F_b", b.traj.value(e, "F"));
  r.summary.emplace_back("dphi", d[e]);
  r.summary.emplace_back("dphi_analytic", analytic(b.traj.times[e]));
  const double a = analytic(b.traj.times[e]);
  r.summary.emplace_back("dphi_rel_error", a != 0.0 ? std::abs(d[e] - a) / std::abs(a) : std::abs(d[e]));
  r.norm_monotone = r.norm_monotone && non_increasing(b.traj.series("norm")) &&
                    non_increasing(n.traj.series("norm"));
}

}  // namespace detail

inline ScenarioResult run_phase_gate_counter(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "phase-gate-counter";
  const PhysicsParams p = cfg.physics();
  const double g = cfg.coupling();
  const double v = dark_group_velocity(p, p.omega1);
  const double sigma = cfg.pulse_sigma();
  const double vdk = v * cfg.dk_sigma / sigma;
  const double t_g = cfg.t_eval_sigma * sigma / v;
  const auto times = detail::even_times(t_g, cfg.solver.samples);
  const auto b = detail::counter_gate_branch(cfg, true, times);
  detail::note_interacting_edge(r, b.state);
  const auto n = detail::counter_gate_branch(cfg, false, times);
  detail::check_boundary(r, n.state, cfg.solver);
  const double jbb = dressed_jbb(g, vdk);
  detail::gate_rows(r, b, n, [&](double t) { return -jbb * t; });
  if (cfg.snapshots) {
    r.snapshots.emplace_back("blockaded_final", b.state);
    r.snapshots.emplace_back("free_final", n.state);
  }
  auto headline = [&](const ScenarioConfig& c) {
    const auto run = detail::counter_gate_branch(c, true, {t_g});
    return run.traj.value(run.traj.size() - 1, "F");
  };
  detail::convergence_stanza(r, "F_b", cfg, detail::pick_n(cfg, 512), r.value("F_b"), headline);
  r.settings = {{"model", "generic-counter-4"}, {"n", std::to_string(detail::pick_n(cfg, 512))},
                {"dt_us", detail::fmt(cfg.solver.dt)}, {"t_gate_us", detail::fmt(t_g)},
                {"v_dk_rad_per_us", detail::fmt(vdk)}, {"g_rad_per_us", detail::fmt(g)}};
  return r;
}

inline ScenarioResult run_phase_gate_co(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "phase-gate-co";
  const PhysicsParams p = cfg.physics();
  const double v = dark_group_velocity(p, p.omega1);
  const double sigma = cfg.pulse_sigma();
  const double dk = cfg.dk_sigma / sigma;
  const double t_end = cfg.t_eval_sigma * sigma / v;
  const auto sched = CouplingSchedule::adiabatic_ramp(v, dk, sigma);
  const auto times = detail::even_times(t_end, cfg.solver.samples);
  const auto b = detail::co_gate_branch(cfg, true, times);
  detail::note_interacting_edge(r, b.state);
  const auto n = detail::co_gate_branch(cfg, false, times);
  detail::check_boundary(r, n.state, cfg.solver);
  detail::gate_rows(r, b, n, [&](double t) { return dressed_phase(sched, v * dk, 0.0, t, true); });
  r.summary.emplace_back("dphi_closed_path", dressed_phase(sched, v * dk, 0.0, t_end));
  if (cfg.snapshots) {
    r.snapshots.emplace_back("blockaded_final", b.state);
    r.snapshots.emplace_back("free_final", n.state);
  }
  auto headline = [&](const ScenarioConfig& c) {
    const auto run = detail::co_gate_branch(c, true, {t_end});
    return run.traj.value(run.traj.size() - 1, "F");
  };
  detail::convergence_stanza(r, "F_b", cfg, detail::pick_n(cfg, 512), r.value("F_b"), headline);
  r.settings = {{"model", "generic-co-4"}, {"n", std::to_string(detail::pick_n(cfg, 512))},
                {"dt_us", detail::fmt(cfg.solver.dt)}, {"t_end_us", detail::fmt(t_end)},
                {"v_dk_rad_per_us", detail::fmt(v * dk)}, {"g_peak_rad_per_us", detail::fmt(sched.peak())}};
  return r;
}

// ---------------------------------------------------------------------------
// Dispersion scan (k-space eigenstructure)
// ---------------------------------------------------------------------------

inline ScenarioResult run_dispersion_scan(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "dispersion-scan";
  const PhysicsParams p = cfg.physics();
  const double g = cfg.coupling();
  const double sigma = cfg.pulse_sigma();
  const double vb = dark_group_velocity(p, p.omega2);
  std::vector<double> radii = cfg.r_over_rb;
  if (radii.empty()) radii = {0.8};

  auto kgrid = [&](int nk) {
    std::vector<double> ks(static_cast<std::size_t>(nk));
    const double kmax = cfg.k_max_sigma / sigma;
    for (int i = 0; i < nk; ++i) ks[static_cast<std::size_t>(i)] = -kmax + 2.0 * kmax * i / (nk - 1);
    return ks;
  };
  auto slope_at_center = [&](double ratio, int nk, double* imag_max, std::size_t* jumps,
                             EigenBranch* keep) {
    const auto ks = kgrid(nk);
    const std::size_t mid = ks.size() / 2;
    const double V = vdw_potential(ratio * cfg.r_b, p, 0.0);
    const ModeSet m = eigenmodes(p, g, ks[mid], V);
    const EigenBranch br = track_branch(p, g, V, ks, mid, dominant_mode(m, 3), Reduction::Full6, "b-like");
    if (imag_max) {
      *imag_max = 0.0;
      for (const auto& w : br.omega) *imag_max = std::max(*imag_max, std::abs(w.imag()));
    }
    if (jumps) *jumps = br.discontinuities.size();
    const double s = (br.omega[mid + 1].real() - br.omega[mid - 1].real()) / (ks[mid + 1] - ks[mid - 1]);
    if (keep) *keep = br;
    return s;
  };

  Table branches{"branches", {"r_over_rb", "k_per_um", "re_omega", "im_omega", "w_Psi_aS", "w_Psi_bS", "overlap"}, {}};
  for (double ratio : radii) {
    EigenBranch br;
    double im = 0;
    std::size_t jumps = 0;
    const double s = slope_at_center(ratio, cfg.n_k, &im, &jumps, &br);
    for (std::size_t i = 0; i < br.k.size(); ++i)
      branches.rows.push_back({ratio, br.k[i], br.omega[i].real(), br.omega[i].imag(), br.weights[i][0],
                               br.weights[i][3], br.overlap[i]});
    const std::string tag = "[r_over_rb=" + detail::fmt(ratio) + "]";
    r.summary.emplace_back("slope_over_v_b" + tag, s / vb);
    r.summary.emplace_back("max_abs_im_over_g" + tag, im / g);
    r.summary.emplace_back("branch_discontinuities" + tag, static_cast<double>(jumps));
  }
  r.tables.push_back(std::move(branches));

  Table dw{"dark_weight", {"veff_over_g", "V_rad_per_us", "exact", "approx", "abs_diff"}, {}};
  std::vector<double> ratios = cfg.veff_over_g;
  if (ratios.empty()) ratios = {2.0};
  double worst = 0.0;
  const double s2 = detail::interaction_scale(p);
  for (double x : ratios) {
    const double V = x * g / s2;
    const DarkWeight d = dark_weight(p, g, 0.5 / sigma, V);
    dw.rows.push_back({x, V, d.exact, d.approx, std::abs(d.exact - d.approx)});
    worst = std::max(worst, std::abs(d.exact - d.approx));
  }
  r.tables.push_back(std::move(dw));
  r.summary.emplace_back("dark_weight_max_abs_diff", worst);
  r.summary.emplace_back("dark_weight_formula_at_2g", dark_weight_formula(0.5));

  const double ref_ratio = std::find(radii.begin(), radii.end(), 0.8) != radii.end() ? 0.8 : radii[0];
  const double base = slope_at_center(ref_ratio, cfg.n_k, nullptr, nullptr, nullptr) / vb;
  if (cfg.solver.convergence) {
    const int nk2 = 2 * cfg.n_k - 1;
    const double fine = slope_at_center(ref_ratio, nk2, nullptr, nullptr, nullptr) / vb;
    r.convergence.push_back({"slope_over_v_b", "base", static_cast<std::size_t>(cfg.n_k), 0.0, base, 0.0, 0.0, true});
    const double d = std::abs(fine - base);
    r.convergence.push_back({"slope_over_v_b", "k_fine", static_cast<std::size_t>(nk2), 0.0, fine, d,
                             cfg.solver.grid_tol, d <= cfg.solver.grid_tol});
  }
  r.settings = {{"model", "eit-atomic-6 (k-space)"}, {"n_k", std::to_string(cfg.n_k)},
                {"k_max_per_um", detail::fmt(cfg.k_max_sigma / sigma)}, {"g_rad_per_us", detail::fmt(g)}};
  return r;
}

// ---------------------------------------------------------------------------
// Stationary switch (frequency domain)
// ---------------------------------------------------------------------------

inline FrequencyDomainConfig switch_fd_config(const PhysicsParams& base, double d_b, bool interacting) {
  FrequencyDomainConfig fc;
  fc.params = base;
  const double z_b = d_b * base.gamma * base.c / (base.g_p * base.g_p);
  fc.params.c6 = interacting ? c6_from_eit_radius(base, z_b) : 0.0;
  const double v = dark_group_velocity(base, base.omega1);
  const double L = 2.0 * z_b;
  fc.coupling = CouplingSchedule::square_space(kPi * v / (2.0 * L), -z_b, z_b);
  fc.z_gate = 0.0;
  fc.z_start = -z_b;
  fc.z_end = z_b;
  return fc;
}

inline ScenarioResult run_switch_frequency_domain(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult r;
  r.scenario = "switch-frequency-domain";
  std::vector<double> omegas = cfg.omega_values;
  if (std::find(omegas.begin(), omegas.end(), 0.0) == omegas.end()) omegas.push_back(0.0);
  std::sort(omegas.begin(), omegas.end());
  Table t{"transfer", {"d_b", "first_order", "blockaded", "omega_rad_per_us", "T_b", "T_a", "arg_b"}, {}};
  auto t_b0 = [&](const ScenarioConfig& c, double d_b, double rtol, double atol) {
    FrequencyDomainConfig fc = switch_fd_config(c.params, d_b, true);
    fc.rtol = rtol;
    fc.atol = atol;
    return std::norm(propagate_frequency_domain(fc, {0.0})[0].b);
  };
  for (double d_b : cfg.d_b_values) {
    const std::string tag = "[d_b=" + detail::fmt(d_b) + "]";
    for (int fo = 0; fo < 2; ++fo)
      for (int blk = 0; blk < 2; ++blk) {
        FrequencyDomainConfig fc = switch_fd_config(cfg.params, d_b, blk == 1);
        fc.model = fo ? FdModel::FirstOrder : FdModel::Exact;
        const auto amps = propagate_frequency_domain(fc, omegas);
        for (const auto& a : amps) {
          t.rows.push_back({d_b, double(fo), double(blk), a.omega, std::norm(a.b), std::norm(a.a), std::arg(a.b)});
          if (a.omega == 0.0) {
            const std::string m = fo ? "first_order" : "exact";
            if (blk) r.summary.emplace_back("T_b_" + m + tag, std::norm(a.b));
            else r.summary.emplace_back("conversion_V0_" + m + tag, std::norm(a.a));
          }
        }
      }
    const double est = switch_fidelity_estimate(d_b).exact;
    r.summary.emplace_back("estimate" + tag, est);
    r.summary.emplace_back("T_b_minus_estimate" + tag, r.value("T_b_exact" + tag) - est);
  }
  r.tables.push_back(std::move(t));
  if (cfg.solver.convergence) {
    const double d0 = cfg.d_b_values[0];
    const double base = t_b0(cfg, d0, 1e-10, 1e-13);
    r.convergence.push_back({"T_b", "base", 0, 0.0, base, 0.0, 0.0, true});
    const double a = t_b0(cfg, d0, 1e-8, 1e-13), b = t_b0(cfg, d0, 1e-12, 1e-15);
    r.convergence.push_back({"T_b", "rtol_relaxed", 0, 0.0, a, std::abs(a - base), cfg.solver.dt_tol,
                             std::abs(a - base) <= cfg.solver.dt_tol});
    r.convergence.push_back({"T_b", "rtol_tightened", 0, 0.0, b, std::abs(b - base), cfg.solver.dt_tol,
                             std::abs(b - base) <= cfg.solver.dt_tol});
  }
  r.settings = {{"model", "photonic-coupling frequency domain"}, {"integrator", "dopri5"},
                {"rtol", "1e-10"}, {"atol", "1e-13"}};
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const std::string& id = cfg.scenario;
  if (id == "switch") return run_switch(cfg);
  if (id == "phase-gate-counter") return run_phase_gate_counter(cfg);
  if (id == "entangle") return run_entangle(cfg);
  if (id == "beamsplit-g2") return run_beamsplit_g2(cfg);
  if (id == "phase-gate-co") return run_phase_gate_co(cfg);
  if (id == "tradeoff-sweep") return run_tradeoff_sweep(cfg);
  if (id == "mismatch-sweep") return run_mismatch_sweep(cfg);
  if (id == "dispersion-scan") return run_dispersion_scan(cfg);
  if (id == "switch-frequency-domain") return run_switch_frequency_domain(cfg);
  throw ConfigError("unknown scenario '" + id + "'");
}

}  // namespace pbsim
