// observables.hpp - measurement functionals on two-photon states and the
// closed-form photon statistics / loss-budget formulas.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pbsim/core.hpp"
#include "pbsim/spectral.hpp"
#include "pbsim/state.hpp"

namespace pbsim {

struct FidelityResult {
  double F = 0.0;
  double phi = 0.0;  // in (-pi, pi]
  cd overlap{0.0, 0.0};
};

/// Linear combination of stored components defining a physical two-photon
/// mode amplitude, e.g. cos(theta) EB - sin(theta) SB for |a+ b->.
struct ModeProjection {
  std::vector<std::pair<std::string, cd>> terms;

  static ModeProjection component(const std::string& label) { return {{{label, cd(1.0, 0.0)}}}; }

  ModeProjection scaled(cd s) const {
    ModeProjection out = *this;
    for (auto& t : out.terms) t.second *= s;
    return out;
  }
  ModeProjection operator+(const ModeProjection& o) const {
    ModeProjection out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    return out;
  }
  /// (x + y) / sqrt(2), the symmetric entangled combination.
  static ModeProjection symmetric(const ModeProjection& x, const ModeProjection& y) {
    return (x + y).scaled(1.0 / std::sqrt(2.0));
  }
};

inline double principal_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

inline std::vector<cd> project(const TwoPhotonState& st, const ModeProjection& mode) {
  std::vector<cd> out(st.points(), cd(0.0, 0.0));
  for (const auto& [label, w] : mode.terms) {
    const auto& c = st[label];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * c[i];
  }
  return out;
}

/// Exact periodic translation f(z1 - d1, z2 - d2) through Fourier phases.
inline std::vector<cd> translated(const std::vector<cd>& f, const Grid1D& g1, const Grid1D& g2,
                                  double d1, double d2) {
  std::vector<cd> a = f;
  if (d1 == 0.0 && d2 == 0.0) return a;
  const auto k1 = derivative_wavenumbers(g1);
  const auto k2 = derivative_wavenumbers(g2);
  fft2(a, g1.n, g2.n, false);
  for (std::size_t i2 = 0; i2 < g2.n; ++i2) {
    const cd e2 = std::polar(1.0, -k2[i2] * d2);
    for (std::size_t i1 = 0; i1 < g1.n; ++i1) a[i2 * g1.n + i1] *= std::polar(1.0, -k1[i1] * d1) * e2;
  }
  fft2(a, g1.n, g2.n, true);
  return a;
}

inline cd inner(const std::vector<cd>& ref, const std::vector<cd>& psi, double cell) {
  if (ref.size() != psi.size()) throw ConfigError("mismatched grids");
  cd s(0.0, 0.0);
  for (std::size_t i = 0; i < ref.size(); ++i) s += std::conj(ref[i]) * psi[i];
  return s * cell;
}

/// Overlap of the projected amplitude with the reference initial wavefunction
/// moved freely to time t: sqrt(F) e^{i phi} = <psi0(z1 - v1 t, z2 - v2 t) | mode>.
inline FidelityResult fidelity_phase(const TwoPhotonState& st, const std::vector<cd>& reference,
                                     double t, const ModeProjection& mode, double v1, double v2) {
  if (reference.size() != st.points()) throw ConfigError("mismatched grids");
  const std::vector<cd> ref = translated(reference, st.grid1, st.grid2, v1 * t, v2 * t);
  const cd o = inner(ref, project(st, mode), st.cell());
  FidelityResult r;
  r.overlap = o;
  r.F = std::norm(o);
  r.phi = r.F > 0.0 ? principal_angle(std::arg(o)) : 0.0;
  return r;
}

/// Mode projection whose reference moves with its own velocities.
struct MovingTerm {
  ModeProjection mode;
  double v1 = 0.0;
  double v2 = 0.0;
};

/// fidelity_phase generalized to a sum of terms with individual reference
/// velocities, e.g. (|a+ b-> + |b+ a->)/sqrt(2) with unequal a/b speeds.
inline FidelityResult fidelity_phase(const TwoPhotonState& st, const std::vector<cd>& reference,
                                     double t, const std::vector<MovingTerm>& terms) {
  if (reference.size() != st.points()) throw ConfigError("mismatched grids");
  cd o(0.0, 0.0);
  for (const auto& term : terms) {
    const auto ref = translated(reference, st.grid1, st.grid2, term.v1 * t, term.v2 * t);
    o += inner(ref, project(st, term.mode), st.cell());
  }
  FidelityResult r;
  r.overlap = o;
  r.F = std::norm(o);
  r.phi = r.F > 0.0 ? principal_angle(std::arg(o)) : 0.0;
  return r;
}

/// Grid-integrated probability in the given components.
inline double mode_population(const TwoPhotonState& st, const std::vector<std::string>& labels) {
  double s = 0.0;
  for (const auto& l : labels) s += st.component_norm(st.index_of(l));
  return s;
}

inline double mode_population(const TwoPhotonState& st, const ModeProjection& mode) {
  double s = 0.0;
  for (const auto& v : project(st, mode)) s += std::norm(v);
  return s * st.cell();
}

// ---------------------------------------------------------------------------
// Second-order correlation
// ---------------------------------------------------------------------------

struct G2Profile {
  std::vector<double> r;      // relative coordinate z1 - z2 (um)
  std::vector<double> tau;    // r / v_g (us)
  std::vector<double> g2;     // NaN where masked
  std::vector<double> weight; // summed single-photon product density
};

/// g2(r) = sum_R |Psi(R, r)|^2 / sum_R |psi(z1) psi(z2)|^2 along lines of fixed
/// r = z1 - z2. Relative separations whose denominator falls below 1e-12 of
/// its peak are masked as NaN.
inline G2Profile g2_correlation(const TwoPhotonState& pair, const std::vector<cd>& single,
                                const std::string& component, double v_g) {
  if (!(pair.grid1 == pair.grid2)) throw ConfigError("g2 needs identical grids for both photons");
  if (single.size() != pair.n1()) throw ConfigError("single-photon amplitude does not match the grid");
  const std::size_t n = pair.n1();
  const auto& psi = pair[component];
  const long nn = static_cast<long>(n);
  G2Profile out;
  std::vector<double> num(2 * n - 1, 0.0), den(2 * n - 1, 0.0);
  for (std::size_t i2 = 0; i2 < n; ++i2)
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      const std::size_t d = static_cast<std::size_t>(static_cast<long>(i1) - static_cast<long>(i2) + nn - 1);
      num[d] += std::norm(psi[i2 * n + i1]);
      den[d] += std::norm(single[i1] * single[i2]);
    }
  double peak = 0.0;
  for (double x : den) peak = std::max(peak, x);
  const double dz = pair.grid1.spacing();
  for (std::size_t d = 0; d < num.size(); ++d) {
    const double r = (static_cast<double>(d) - static_cast<double>(n - 1)) * dz;
    out.r.push_back(r);
    out.tau.push_back(v_g > 0 ? r / v_g : std::numeric_limits<double>::quiet_NaN());
    out.weight.push_back(den[d]);
    out.g2.push_back(den[d] > 1e-12 * peak ? num[d] / den[d]
                                           : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

/// Smallest |r| > 0 at which g2 reaches `level` (interpolated), searching
/// outward from r = 0 on the positive side. NaN if never reached.
inline double g2_crossing(const G2Profile& p, double level) {
  std::size_t i0 = 0;
  for (std::size_t i = 0; i < p.r.size(); ++i)
    if (std::abs(p.r[i]) < std::abs(p.r[i0])) i0 = i;
  for (std::size_t i = i0; i + 1 < p.r.size(); ++i) {
    const double a = p.g2[i], b = p.g2[i + 1];
    if (std::isnan(a) || std::isnan(b)) break;
    if (a < level && b >= level) return p.r[i] + (level - a) / (b - a) * (p.r[i + 1] - p.r[i]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Photon statistics of the blockaded beam splitter
// ---------------------------------------------------------------------------

struct BeamsplitProbs {
  double p0 = 1.0;
  double p1 = 0.0;
};

/// n photons in the linear mode, one converted at rate sqrt(n) g.
inline BeamsplitProbs beamsplit_probs(int n, double g, double t) {
  if (n < 1) throw ConfigError("photon number must be >= 1");
  const double x = std::sqrt(static_cast<double>(n)) * g * t;
  const double s = std::sin(x), c = std::cos(x);
  return {c * c, s * s};
}

inline int poisson_cutoff(double nbar) {
  return static_cast<int>(std::ceil(nbar + 12.0 * std::sqrt(nbar) + 20.0));
}

/// P1 = sum_n f_n p_{1,n} for a coherent input with mean photon number nbar.
/// n_max <= 0 selects the default cutoff; the neglected Poisson tail must be
/// below 1e-12.
inline double coherent_p1(double nbar, double g, double t, int n_max = 0) {
  if (!(nbar > 0.0)) throw ConfigError("mean photon number must be positive");
  if (n_max <= 0) n_max = poisson_cutoff(nbar);
  double logf = -nbar;  // log f_0
  double sum = 0.0, mass = std::exp(logf);
  for (int n = 1; n <= n_max; ++n) {
    logf += std::log(nbar) - std::log(static_cast<double>(n));
    const double f = std::exp(logf);
    mass += f;
    sum += f * beamsplit_probs(n, g, t).p1;
  }
  if (1.0 - mass > 1e-12) throw ConfigError("Poisson tail above 1e-12: raise n_max");
  return sum;
}

inline double coherent_p1_asymptote(double nbar) { return 1.0 - kPi * kPi / (16.0 * nbar); }

// ---------------------------------------------------------------------------
// Loss budget
// ---------------------------------------------------------------------------

struct LossBudget {
  double xi = 0;     // conversion loss from the finite EIT window
  double eta = 0;    // loss during the coupling operation
  double ratio = 0;  // r_b / sigma
  double d_b = 0;
  double time = 0;   // sigma / v_g + 1 / g
};

/// Loss budget of a pulse of length sigma with linear coupling g.
inline LossBudget loss_budget(double sigma, double g, const PhysicsParams& p) {
  if (!(sigma > 0) || !(g > 0)) throw ConfigError("sigma and g must be positive");
  const double vg = dark_group_velocity(p, p.omega1);
  const double dw = vg / sigma;
  const double om4 = std::pow(p.omega1, 4);
  LossBudget b;
  b.xi = dw * dw * p.gamma * p.g_p * p.g_p * sigma / (p.c * om4);
  b.eta = dw * dw * p.gamma * p.g_p * p.g_p * vg / (p.c * om4 * g);
  b.d_b = p.c6 > 0 ? derived_scales(p).d_b : 0.0;
  b.ratio = std::pow(b.xi, 2.0 / 3.0) * std::pow(b.eta / 2.0, 1.0 / 6.0) * b.d_b;
  b.time = sigma / vg + 1.0 / g;
  return b;
}

/// Pulse length and coupling that realize prescribed (xi, eta).
struct LossTargets {
  double sigma = 0;
  double g = 0;
  double time = 0;
};

inline LossTargets loss_targets(double xi, double eta, const PhysicsParams& p) {
  if (!(xi > 0) || !(eta > 0)) throw ConfigError("xi and eta must be positive");
  const double vg = dark_group_velocity(p, p.omega1);
  LossTargets t;
  // xi = vg^2 gamma g_p^2 / (c Omega^4 sigma) and vg^2 = c^2 Omega^4 / g_p^4 (slow light)
  t.sigma = vg * vg * p.gamma * p.g_p * p.g_p / (p.c * std::pow(p.omega1, 4) * xi);
  t.g = vg * vg * p.gamma * p.g_p * p.g_p * vg / (p.c * std::pow(p.omega1, 4) * t.sigma * t.sigma * eta);
  t.time = t.sigma / vg + 1.0 / t.g;
  return t;
}

/// Slow-light pulse length gamma c / (g_p^2 xi).
inline double sigma_for_xi(double xi, const PhysicsParams& p) {
  if (!(xi > 0)) throw ConfigError("xi must be positive");
  return p.gamma * p.c / (p.g_p * p.g_p * xi);
}

struct SwitchEstimate {
  double exact = 0;
  double first_order = 0;
};

inline SwitchEstimate switch_fidelity_estimate(double d_b) {
  if (!(d_b > 0)) throw ConfigError("d_b must be positive");
  const double x = kPi * kPi / (4.0 * d_b);
  return {std::exp(-x), 1.0 - x};
}

}  // namespace pbsim
