// evolution.hpp - time-domain propagation of two-photon states.
//
// Two symmetric (second order) splittings are available:
//
//  * AdvectLocal: exact spectral advection of every component alternated
//    with exact per-point exponentials of the local matrix,
//      A(h/2) L(h) A(h/2).
//  * MomentumPotential: the full single-particle generator (couplings plus
//    v*k advection) is exponentiated exactly per wavenumber in k-space and
//    alternated with the interaction phase applied in position space,
//      V(h/2) K(h) V(h/2).
//    This keeps c-speed advection and the GHz-scale probe coupling inside
//    the same exact exponential, which the EIT models need.
//
// Consecutive half steps are merged.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "pbsim/core.hpp"
#include "pbsim/hamiltonians.hpp"
#include "pbsim/linalg.hpp"
#include "pbsim/spectral.hpp"
#include "pbsim/state.hpp"

namespace pbsim {

enum class SplitScheme { Auto, AdvectLocal, MomentumPotential };

inline std::string to_string(SplitScheme s) {
  switch (s) {
    case SplitScheme::Auto: return "auto";
    case SplitScheme::AdvectLocal: return "advect-local";
    case SplitScheme::MomentumPotential: return "momentum-potential";
  }
  return "unknown";
}

inline SplitScheme resolve_scheme(SplitScheme s, const ModelSpec& m) {
  if (s != SplitScheme::Auto) return s;
  switch (m.variant) {
    case Variant::EitPhotonic4:
    case Variant::EitAtomic6:
    case Variant::EitFull16:
      return SplitScheme::MomentumPotential;
    default:
      return SplitScheme::AdvectLocal;
  }
}

using ObservableRecord = std::vector<std::pair<std::string, double>>;
using Sampler = std::function<void(const TwoPhotonState&, ObservableRecord&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<ObservableRecord> records;
  std::vector<TwoPhotonState> snapshots;
  long steps = 0;

  std::size_t size() const { return times.size(); }

  double value(std::size_t sample, const std::string& name) const {
    for (const auto& [k, v] : records.at(sample))
      if (k == name) return v;
    throw ConfigError("observable '" + name + "' not recorded");
  }
  std::vector<double> series(const std::string& name) const {
    std::vector<double> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) out.push_back(value(i, name));
    return out;
  }
};

struct EvolveOptions {
  double dt = 0.0;
  int samples = 64;
  std::vector<double> sample_times;  // explicit sample times override `samples`
  SplitScheme scheme = SplitScheme::Auto;
  bool snapshots = false;
  bool record_components = true;
};

/// Largest interaction phase V dt per momentum-potential step; the
/// potential is capped at this phase over dt.
inline constexpr double kInteractionPhasePerStep = 0.5;

namespace detail {

inline void check_finite_norm(double s, long step) {
  if (!std::isfinite(s)) throw SolverError("non-finite amplitude at step " + std::to_string(step), step);
}

inline std::vector<double> potential_grid(const TwoPhotonState& st, const Potential& pot) {
  std::vector<double> v(st.points());
  for (std::size_t i2 = 0; i2 < st.n2(); ++i2) {
    const double z2 = st.grid2.coordinate(i2);
    for (std::size_t i1 = 0; i1 < st.n1(); ++i1)
      v[i2 * st.n1() + i1] = pot(st.grid1.coordinate(i1) - z2);
  }
  return v;
}

/// Applies an (n x n) matrix to the component vector at one grid point.
inline void apply_point(const MatrixXc& e, std::vector<std::vector<cd>>& comps, std::size_t p) {
  const std::size_t n = comps.size();
  cd x[64];
  for (std::size_t j = 0; j < n; ++j) x[j] = comps[j][p];
  for (std::size_t i = 0; i < n; ++i) {
    cd s(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) s += e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
    comps[i][p] = s;
  }
}

// ---------------------------------------------------------------------------

class AdvectLocalStepper {
 public:
  AdvectLocalStepper(const ModelSpec& model, const TwoPhotonState& st)
      : model_(model), k1_(derivative_wavenumbers(st.grid1)), k2_(derivative_wavenumbers(st.grid2)) {
    interacting_ = model.interacting();
    if (interacting_) {
      equal_spacing_ = st.grid1.spacing() == st.grid2.spacing();
      if (equal_spacing_) {
        const double dz = st.grid1.spacing();
        const double off = st.grid1.origin - st.grid2.origin;
        const long n1 = static_cast<long>(st.n1()), n2 = static_cast<long>(st.n2());
        for (long d = -(n2 - 1); d <= n1 - 1; ++d)
          vdiff_.push_back(model.potential(off + static_cast<double>(d) * dz));
      } else {
        vgrid_ = potential_grid(st, model.potential);
      }
    }
  }

  void advect(TwoPhotonState& st, double tau) {
    std::vector<cd> e1(st.n1()), e2(st.n2());
    for (std::size_t c = 0; c < st.size(); ++c) {
      const double v1 = model_.v1[c], v2 = model_.v2[c];
      if (v1 == 0.0 && v2 == 0.0) continue;
      auto& a = st.comps[c];
      fft2(a, st.n1(), st.n2(), false);
      for (std::size_t i = 0; i < st.n1(); ++i) e1[i] = std::polar(1.0, -k1_[i] * v1 * tau);
      for (std::size_t i = 0; i < st.n2(); ++i) e2[i] = std::polar(1.0, -k2_[i] * v2 * tau);
      for (std::size_t i2 = 0; i2 < st.n2(); ++i2) {
        cd* row = a.data() + i2 * st.n1();
        for (std::size_t i1 = 0; i1 < st.n1(); ++i1) row[i1] *= e1[i1] * e2[i2];
      }
      fft2(a, st.n1(), st.n2(), true);
    }
  }

  void local(TwoPhotonState& st, double h, double t_mid, long step) {
    const MatrixXc c = model_.coupling(t_mid);
    const std::size_t n1 = st.n1(), n2 = st.n2();
    double acc = 0.0;
    if (!interacting_) {
      const MatrixXc e = expm_minus_i(c, h);
      for (std::size_t p = 0; p < st.points(); ++p) apply_point(e, st.comps, p);
    } else if (equal_spacing_) {
      const std::vector<MatrixXc>& table = diff_table(c, h, t_mid);
      for (std::size_t i2 = 0; i2 < n2; ++i2)
        for (std::size_t i1 = 0; i1 < n1; ++i1)
          apply_point(table[i1 + (n2 - 1) - i2], st.comps, i2 * n1 + i1);
    } else {
      for (std::size_t p = 0; p < st.points(); ++p) {
        MatrixXc m = c;
        for (std::size_t k = 0; k < model_.weight.size(); ++k)
          if (model_.weight[k] != 0.0)
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += model_.weight[k] * vgrid_[p];
        apply_point(expm_minus_i(m, h), st.comps, p);
      }
    }
    for (const auto& comp : st.comps)
      for (const auto& v : comp) acc += std::norm(v);
    check_finite_norm(acc, step);
  }

  /// n Strang steps of size h starting at time t0.
  void run(TwoPhotonState& st, double t0, double h, long n, long& step) {
    advect(st, 0.5 * h);
    for (long j = 0; j < n; ++j) {
      local(st, h, t0 + (static_cast<double>(j) + 0.5) * h, step);
      ++step;
      advect(st, j + 1 < n ? h : 0.5 * h);
    }
  }

 private:
  const std::vector<MatrixXc>& diff_table(const MatrixXc& c, double h, double t_mid) {
    const bool cache = !model_.time_dependent();
    if (cache) {
      auto it = tables_.find(h);
      if (it != tables_.end()) return it->second;
    }
    std::vector<MatrixXc> table;
    table.reserve(vdiff_.size());
    for (double v : vdiff_) {
      MatrixXc m = c;
      for (std::size_t k = 0; k < model_.weight.size(); ++k)
        if (model_.weight[k] != 0.0)
          m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += model_.weight[k] * v;
      table.push_back(expm_minus_i(m, h));
    }
    (void)t_mid;
    if (cache) return tables_.emplace(h, std::move(table)).first->second;
    scratch_ = std::move(table);
    return scratch_;
  }

  const ModelSpec& model_;
  std::vector<double> k1_, k2_;
  bool interacting_ = false;
  bool equal_spacing_ = true;
  std::vector<double> vdiff_;
  std::vector<double> vgrid_;
  std::map<double, std::vector<MatrixXc>> tables_;
  std::vector<MatrixXc> scratch_;
};

// ---------------------------------------------------------------------------

class MomentumPotentialStepper {
 public:
  /// `v_cap` bounds the potential so the interaction phase per step stays resolved.
  MomentumPotentialStepper(const ModelSpec& model, const TwoPhotonState& st,
                           double v_cap = std::numeric_limits<double>::infinity())
      : model_(model), k1_(derivative_wavenumbers(st.grid1)), k2_(derivative_wavenumbers(st.grid2)),
        n1_(st.n1()), n2_(st.n2()) {
    if (model.interacting()) {
      vgrid_ = potential_grid(st, model.potential);
      for (double& v : vgrid_) v = std::min(v, v_cap);
    }
    for (std::size_t c = 0; c < model.size(); ++c)
      if (model.weight[c] != 0.0 && model.interacting()) weighted_.push_back(c);
    if (model.factors) same_blocks_ = (*model.factors)[0].same_as((*model.factors)[1]) &&
                                      st.grid1 == st.grid2;
  }

  /// Interaction phase exp(-i w V tau) on the weighted components (k-space in and out).
  void potential(std::vector<std::vector<cd>>& comps, double tau, long step) {
    for (std::size_t c : weighted_) {
      const std::vector<cd>& ph = phase_table(c, tau);
      auto& a = comps[c];
      fft2(a, n1_, n2_, true);
      double acc = 0.0;
      for (std::size_t p = 0; p < a.size(); ++p) {
        a[p] *= ph[p];
        acc += std::norm(a[p]);
      }
      check_finite_norm(acc, step);
      fft2(a, n1_, n2_, false);
    }
  }

  void kinetic(std::vector<std::vector<cd>>& comps, double h, double t_mid, long step) {
    if (model_.factors) {
      kinetic_factorized(comps, h, t_mid);
    } else {
      kinetic_full(comps, h, t_mid);
    }
    if (weighted_.empty()) {
      double acc = 0.0;
      for (const auto& comp : comps)
        for (const auto& v : comp) acc += std::norm(v);
      check_finite_norm(acc, step);
    }
  }

  void run(std::vector<std::vector<cd>>& comps, double t0, double h, long n, long& step) {
    potential(comps, 0.5 * h, step);
    for (long j = 0; j < n; ++j) {
      kinetic(comps, h, t0 + (static_cast<double>(j) + 0.5) * h, step);
      ++step;
      potential(comps, j + 1 < n ? h : 0.5 * h, step);
    }
  }

 private:
  const std::vector<cd>& phase_table(std::size_t c, double tau) {
    auto key = std::make_pair(c, tau);
    auto it = phases_.find(key);
    if (it != phases_.end()) return it->second;
    std::vector<cd> ph(vgrid_.size());
    const double w = model_.weight[c];
    for (std::size_t p = 0; p < ph.size(); ++p) ph[p] = std::polar(1.0, -w * vgrid_[p] * tau);
    return phases_.emplace(key, std::move(ph)).first->second;
  }

  std::vector<MatrixXc> block_exps(const ParticleBlock& b, const std::vector<double>& k,
                                   double h, double t_mid) {
    const MatrixXc m0 = b.at(t_mid);
    std::vector<MatrixXc> out;
    out.reserve(k.size());
    for (double kk : k) {
      MatrixXc m = m0;
      for (std::size_t i = 0; i < b.size(); ++i)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += b.velocity[i] * kk;
      out.push_back(expm_minus_i(m, h));
    }
    return out;
  }

  void kinetic_factorized(std::vector<std::vector<cd>>& comps, double h, double t_mid) {
    const auto& blocks = *model_.factors;
    const bool cache = !model_.time_dependent();
    const std::vector<MatrixXc>* u1 = nullptr;
    const std::vector<MatrixXc>* u2 = nullptr;
    if (cache) {
      auto it = kin_cache_.find(h);
      if (it == kin_cache_.end()) {
        auto a = block_exps(blocks[0], k1_, h, t_mid);
        auto b = same_blocks_ ? a : block_exps(blocks[1], k2_, h, t_mid);
        it = kin_cache_.emplace(h, std::make_pair(std::move(a), std::move(b))).first;
      }
      u1 = &it->second.first;
      u2 = &it->second.second;
    } else {
      scratch1_ = block_exps(blocks[0], k1_, h, t_mid);
      if (same_blocks_) scratch2_ = scratch1_;
      else scratch2_ = block_exps(blocks[1], k2_, h, t_mid);
      u1 = &scratch1_;
      u2 = &scratch2_;
    }
    const std::size_t p1 = blocks[0].size(), p2 = blocks[1].size();
    apply_kron(comps, *u1, *u2, p1, p2);
  }

  void apply_kron(std::vector<std::vector<cd>>& comps, const std::vector<MatrixXc>& u1,
                  const std::vector<MatrixXc>& u2, std::size_t p1, std::size_t p2) {
    // M(a, b) <- sum U1(a, a') M(a', b') U2(b, b') at every (k1, k2).
    std::vector<cd*> ptr(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) ptr[c] = comps[c].data();
    const std::size_t n1 = n1_, n2 = n2_;
    // Copy matrices into flat row-major arrays for the inner loops.
    std::vector<cd> f1(n1 * p1 * p1), f2(n2 * p2 * p2);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t a = 0; a < p1; ++a)
        for (std::size_t b = 0; b < p1; ++b)
          f1[(i * p1 + a) * p1 + b] = u1[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t a = 0; a < p2; ++a)
        for (std::size_t b = 0; b < p2; ++b)
          f2[(i * p2 + a) * p2 + b] = u2[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    for (long li2 = 0; li2 < static_cast<long>(n2); ++li2) {
      const std::size_t i2 = static_cast<std::size_t>(li2);
      cd m[64], t[64];
      const cd* w2 = &f2[i2 * p2 * p2];
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const std::size_t p = i2 * n1 + i1;
        const cd* w1 = &f1[i1 * p1 * p1];
        for (std::size_t c = 0; c < p1 * p2; ++c) m[c] = ptr[c][p];
        // t = U1 * M
        for (std::size_t a = 0; a < p1; ++a)
          for (std::size_t b = 0; b < p2; ++b) {
            cd s(0.0, 0.0);
            for (std::size_t q = 0; q < p1; ++q) s += w1[a * p1 + q] * m[q * p2 + b];
            t[a * p2 + b] = s;
          }
        // M = t * U2^T
        for (std::size_t a = 0; a < p1; ++a)
          for (std::size_t b = 0; b < p2; ++b) {
            cd s(0.0, 0.0);
            for (std::size_t q = 0; q < p2; ++q) s += t[a * p2 + q] * w2[b * p2 + q];
            ptr[a * p2 + b][p] = s;
          }
      }
    }
  }

  void kinetic_full(std::vector<std::vector<cd>>& comps, double h, double t_mid) {
    const bool cache = !model_.time_dependent();
    std::vector<MatrixXc>* table = nullptr;
    if (cache) {
      auto it = full_cache_.find(h);
      if (it != full_cache_.end()) table = &it->second;
    }
    std::vector<MatrixXc> fresh;
    if (!table) {
      const MatrixXc c = model_.coupling(t_mid);
      fresh.reserve(n1_ * n2_);
      for (std::size_t i2 = 0; i2 < n2_; ++i2)
        for (std::size_t i1 = 0; i1 < n1_; ++i1) {
          MatrixXc m = c;
          for (std::size_t q = 0; q < model_.size(); ++q)
            m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) +=
                model_.v1[q] * k1_[i1] + model_.v2[q] * k2_[i2];
          fresh.push_back(expm_minus_i(m, h));
        }
      if (cache) table = &full_cache_.emplace(h, std::move(fresh)).first->second;
      else table = &fresh;
    }
    for (std::size_t p = 0; p < n1_ * n2_; ++p) apply_point((*table)[p], comps, p);
  }

  const ModelSpec& model_;
  std::vector<double> k1_, k2_;
  std::size_t n1_, n2_;
  std::vector<double> vgrid_;
  std::vector<std::size_t> weighted_;
  bool same_blocks_ = false;
  std::map<std::pair<std::size_t, double>, std::vector<cd>> phases_;
  std::map<double, std::pair<std::vector<MatrixXc>, std::vector<MatrixXc>>> kin_cache_;
  std::map<double, std::vector<MatrixXc>> full_cache_;
  std::vector<MatrixXc> scratch1_, scratch2_;
};

inline void validate_evolve(const TwoPhotonState& st, const ModelSpec& model, double t_final,
                            double dt) {
  if (st.labels != model.labels)
    throw ConfigError("state components do not match the model (" + to_string(model.variant) + ")");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_final >= st.time)) throw ConfigError("t_final precedes the state time");
  if (model.spatial())
    throw ConfigError("spatial coupling profiles are handled by the frequency-domain propagator");
  const double feat = model.feature_time();
  if (std::isfinite(feat) && dt > feat / 20.0 * (1.0 + 1e-12))
    throw ConfigError("dt does not resolve the coupling ramp (need dt <= ramp time / 20)");
}

inline std::vector<double> sample_grid(double t0, double t1, const EvolveOptions& opt) {
  std::vector<double> s;
  if (!opt.sample_times.empty()) {
    for (double t : opt.sample_times)
      if (t >= t0 - 1e-15 && t <= t1 + 1e-15) s.push_back(std::clamp(t, t0, t1));
  } else {
    const int n = std::max(2, opt.samples);
    for (int j = 0; j < n; ++j)
      s.push_back(j + 1 == n ? t1 : t0 + (t1 - t0) * static_cast<double>(j) / (n - 1));
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace detail

inline void record_defaults(const TwoPhotonState& st, ObservableRecord& rec, bool components) {
  double total = 0.0;
  for (std::size_t c = 0; c < st.size(); ++c) {
    const double n = st.component_norm(c);
    total += n;
    if (components) rec.emplace_back("pop:" + st.labels[c], n);
  }
  rec.emplace(rec.begin(), "norm", total);
}

/// Propagates `state` (position representation) to t_final in place and
/// returns the sampled trajectory. Sample times and schedule switching
/// times are always hit exactly.
inline Trajectory evolve(TwoPhotonState& state, const ModelSpec& model, double t_final,
                         const EvolveOptions& opt, const Sampler& sampler = {}) {
  detail::validate_evolve(state, model, t_final, opt.dt);
  const double t0 = state.time;
  const std::vector<double> samples = detail::sample_grid(t0, t_final, opt);
  std::vector<double> marks = samples;
  for (double b : model.breakpoints())
    if (b > t0 && b < t_final) marks.push_back(b);
  marks.push_back(t0);
  marks.push_back(t_final);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  Trajectory traj;
  auto take_sample = [&](const TwoPhotonState& s) {
    ObservableRecord rec;
    record_defaults(s, rec, opt.record_components);
    if (sampler) sampler(s, rec);
    for (const auto& [k, v] : rec)
      if (!std::isfinite(v))
        throw SolverError("non-finite observable '" + k + "' at t = " + std::to_string(s.time),
                          traj.steps);
    traj.times.push_back(s.time);
    traj.records.push_back(std::move(rec));
    if (opt.snapshots) traj.snapshots.push_back(s);
  };
  auto is_sample = [&](double t) {
    return std::binary_search(samples.begin(), samples.end(), t);
  };

  const SplitScheme scheme = resolve_scheme(opt.scheme, model);
  long step = 0;
  if (is_sample(t0)) take_sample(state);

  if (scheme == SplitScheme::AdvectLocal) {
    detail::AdvectLocalStepper stepper(model, state);
    for (std::size_t m = 0; m + 1 < marks.size(); ++m) {
      const double a = marks[m], b = marks[m + 1];
      const long n = std::max(1L, static_cast<long>(std::ceil((b - a) / opt.dt - 1e-9)));
      stepper.run(state, a, (b - a) / static_cast<double>(n), n, step);
      state.time = b;
      if (is_sample(b)) take_sample(state);
    }
  } else {
    detail::MomentumPotentialStepper stepper(model, state, kInteractionPhasePerStep / opt.dt);
    std::vector<std::vector<cd>> work = state.comps;
    for (auto& c : work) fft2(c, state.n1(), state.n2(), false);
    for (std::size_t m = 0; m + 1 < marks.size(); ++m) {
      const double a = marks[m], b = marks[m + 1];
      const long n = std::max(1L, static_cast<long>(std::ceil((b - a) / opt.dt - 1e-9)));
      stepper.run(work, a, (b - a) / static_cast<double>(n), n, step);
      state.time = b;
      if (is_sample(b) || m + 2 == marks.size()) {
        for (std::size_t c = 0; c < work.size(); ++c) {
          state.comps[c] = work[c];
          fft2(state.comps[c], state.n1(), state.n2(), true);
        }
        if (is_sample(b)) take_sample(state);
      }
    }
  }
  traj.steps = step;
  return traj;
}

// ---------------------------------------------------------------------------
// Elementary steps (exposed for testing and analysis)
// ---------------------------------------------------------------------------

/// Translates each component by (v1 dt, v2 dt) through its Fourier phases.
inline void advect_step(TwoPhotonState& state, const ModelSpec& model, double dt) {
  if (state.labels != model.labels) throw ConfigError("state components do not match the model");
  detail::AdvectLocalStepper(model, state).advect(state, dt);
}

/// Applies exp(-i M(z1, z2, t_mid) dt) at every grid point.
inline void local_step(TwoPhotonState& state, double dt, double t_mid, const ModelSpec& model) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (state.labels != model.labels) throw ConfigError("state components do not match the model");
  detail::AdvectLocalStepper(model, state).local(state, dt, t_mid, 0);
}

// ---------------------------------------------------------------------------
// Dense oracle
// ---------------------------------------------------------------------------

inline constexpr std::size_t kOracleMaxDimension = 1u << 14;

/// Spectral first-derivative matrix (as multiplication by k) built from
/// explicit DFT sums: D = F^-1 diag(k) F.
inline MatrixXc spectral_k_matrix(const Grid1D& g) {
  const std::size_t n = g.n;
  const std::vector<double> k = derivative_wavenumbers(g);
  MatrixXc d = MatrixXc::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double dz = g.spacing();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      cd s(0.0, 0.0);
      for (std::size_t m = 0; m < n; ++m)
        s += k[m] * std::polar(1.0, k[m] * dz * (static_cast<double>(j) - static_cast<double>(l)));
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = s / static_cast<double>(n);
    }
  return d;
}

/// Full discrete generator G with i d/dt psi = G psi on the flattened state
/// (component-major, then z1-fastest grid index).
inline Eigen::SparseMatrix<cd> dense_generator(const TwoPhotonState& st, const ModelSpec& model) {
  const std::size_t nc = model.size(), n1 = st.n1(), n2 = st.n2(), np = n1 * n2;
  const MatrixXc d1 = spectral_k_matrix(st.grid1);
  const MatrixXc d2 = spectral_k_matrix(st.grid2);
  std::vector<Eigen::Triplet<cd>> trip;
  auto idx = [&](std::size_t c, std::size_t i1, std::size_t i2) {
    return static_cast<int>(c * np + i2 * n1 + i1);
  };
  for (std::size_t c = 0; c < nc; ++c) {
    const double v1 = model.v1[c], v2 = model.v2[c];
    for (std::size_t i2 = 0; i2 < n2; ++i2)
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        if (v1 != 0.0)
          for (std::size_t l1 = 0; l1 < n1; ++l1)
            trip.emplace_back(idx(c, i1, i2), idx(c, l1, i2),
                              v1 * d1(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(l1)));
        if (v2 != 0.0)
          for (std::size_t l2 = 0; l2 < n2; ++l2)
            trip.emplace_back(idx(c, i1, i2), idx(c, i1, l2),
                              v2 * d2(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(l2)));
      }
  }
  for (std::size_t i2 = 0; i2 < n2; ++i2)
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const MatrixXc m = model.local_matrix(st.grid1.coordinate(i1), st.grid2.coordinate(i2), 0.0);
      for (std::size_t a = 0; a < nc; ++a)
        for (std::size_t b = 0; b < nc; ++b) {
          const cd v = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
          if (v != cd(0.0, 0.0)) trip.emplace_back(idx(a, i1, i2), idx(b, i1, i2), v);
        }
    }
  const int dim = static_cast<int>(nc * np);
  Eigen::SparseMatrix<cd> g(dim, dim);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

/// Reference propagation exp(-i G t) psi by a substepped Taylor series on the
/// full generator. Time-independent models and small grids only.
inline TwoPhotonState dense_oracle_evolve(const TwoPhotonState& state, const ModelSpec& model,
                                          double t_final) {
  if (state.labels != model.labels) throw ConfigError("state components do not match the model");
  const std::size_t dim = model.size() * state.points();
  if (dim > kOracleMaxDimension)
    throw ConfigError("oracle dimension " + std::to_string(dim) + " exceeds 2^14");
  if (model.time_dependent() || model.spatial())
    throw ConfigError("dense oracle supports time-independent schedules only");
  const double t = t_final - state.time;
  if (!(t >= 0.0)) throw ConfigError("t_final precedes the state time");

  const Eigen::SparseMatrix<cd> g = dense_generator(state, model);
  double norm1 = 0.0;
  for (int k = 0; k < g.outerSize(); ++k) {
    double s = 0.0;
    for (Eigen::SparseMatrix<cd>::InnerIterator it(g, k); it; ++it) s += std::abs(it.value());
    norm1 = std::max(norm1, s);
  }
  VectorXc psi(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < model.size(); ++c)
    for (std::size_t p = 0; p < state.points(); ++p)
      psi(static_cast<Eigen::Index>(c * state.points() + p)) = state.comps[c][p];

  const long sub = std::max(1L, static_cast<long>(std::ceil(norm1 * t / 2.0)));
  const double h = t / static_cast<double>(sub);
  const cd mih(0.0, -h);
  for (long s = 0; s < sub; ++s) {
    VectorXc term = psi;
    VectorXc acc = psi;
    for (int m = 1; m <= 80; ++m) {
      term = (mih / static_cast<double>(m)) * (g * term);
      acc += term;
      if (term.cwiseAbs().maxCoeff() <= 1e-18 * std::max(1.0, acc.cwiseAbs().maxCoeff())) break;
    }
    psi = acc;
  }
  TwoPhotonState out = state;
  for (std::size_t c = 0; c < model.size(); ++c)
    for (std::size_t p = 0; p < state.points(); ++p)
      out.comps[c][p] = psi(static_cast<Eigen::Index>(c * state.points() + p));
  out.time = t_final;
  return out;
}

}  // namespace pbsim
