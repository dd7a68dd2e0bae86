// hamiltonians.hpp - local (derivative-free) Hamiltonian builders for every
// model variant, the ModelSpec description consumed by the solvers, and the
// rotating-frame map of the generic four-mode model.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pbsim/core.hpp"
#include "pbsim/linalg.hpp"
#include "pbsim/state.hpp"

namespace pbsim {

enum class Variant {
  GenericCounter4,
  GenericCo4,
  StoredGate2,
  Symmetric3,
  EitPhotonic4,
  EitAtomic6,
  EitFull16
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::GenericCounter4: return "generic-counter-4";
    case Variant::GenericCo4: return "generic-co-4";
    case Variant::StoredGate2: return "stored-gate-2";
    case Variant::Symmetric3: return "symmetric-3";
    case Variant::EitPhotonic4: return "eit-photonic-4";
    case Variant::EitAtomic6: return "eit-atomic-6";
    case Variant::EitFull16: return "eit-full-16";
  }
  return "unknown";
}

inline Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::GenericCounter4, Variant::GenericCo4, Variant::StoredGate2,
                    Variant::Symmetric3, Variant::EitPhotonic4, Variant::EitAtomic6,
                    Variant::EitFull16})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown model variant '" + s + "'");
}

/// Soft-core van der Waals potential scale * C6 / (r^6 + core^6).
struct Potential {
  double c6 = 0.0;
  double core = 0.0;
  double scale = 1.0;

  double operator()(double r) const {
    if (c6 == 0.0) return 0.0;
    const double r2 = r * r;
    const double a2 = core * core;
    return scale * c6 / (r2 * r2 * r2 + a2 * a2 * a2);
  }
  bool zero() const { return c6 == 0.0 || scale == 0.0; }
  static Potential none() { return {}; }
};

/// g(t) * matrix contribution to a generator.
struct ScheduledTerm {
  CouplingSchedule schedule;
  MatrixXc matrix;
};

inline MatrixXc assemble(const MatrixXc& base, const std::vector<ScheduledTerm>& terms,
                         double t) {
  MatrixXc m = base;
  for (const auto& term : terms) {
    const double g = coupling_at(term.schedule, t, 0.0);
    if (g != 0.0) m += g * term.matrix;
  }
  return m;
}

/// Single-particle factor of a Kronecker-sum model.
struct ParticleBlock {
  std::vector<std::string> labels;
  std::vector<double> velocity;
  MatrixXc base;
  std::vector<ScheduledTerm> terms;

  std::size_t size() const { return labels.size(); }
  MatrixXc at(double t) const { return assemble(base, terms, t); }

  bool same_as(const ParticleBlock& o) const {
    if (velocity != o.velocity || base.rows() != o.base.rows() || base != o.base) return false;
    if (terms.size() != o.terms.size()) return false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& a = terms[i];
      const auto& b = o.terms[i];
      if (a.matrix != b.matrix || a.schedule.kind != b.schedule.kind ||
          a.schedule.amplitude != b.schedule.amplitude || a.schedule.on != b.schedule.on ||
          a.schedule.off != b.schedule.off || a.schedule.rate != b.schedule.rate)
        return false;
    }
    return true;
  }
};

inline MatrixXc kron_sum(const MatrixXc& a, const MatrixXc& b) {
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  MatrixXc out = MatrixXc::Zero(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j)
      if (a(i, j) != cd(0.0, 0.0))
        for (Eigen::Index k = 0; k < nb; ++k) out(i * nb + k, j * nb + k) += a(i, j);
  for (Eigen::Index i = 0; i < na; ++i)
    out.block(i * nb, i * nb, nb, nb) += b;
  return out;
}

/// Complete description of a model: components, per-component advection
/// velocities, the position-independent coupling C(t), and the interaction
/// V(z1 - z2) acting with weight w_c on component c.
struct ModelSpec {
  Variant variant = Variant::StoredGate2;
  std::vector<std::string> labels;
  std::vector<double> v1;
  std::vector<double> v2;
  std::vector<double> weight;
  MatrixXc base;
  std::vector<ScheduledTerm> terms;
  Potential potential;
  std::optional<std::array<ParticleBlock, 2>> factors;

  std::size_t size() const { return labels.size(); }

  MatrixXc coupling(double t) const { return assemble(base, terms, t); }

  /// Local matrix M(z1, z2, t) = C(t) + diag(w) V(z1 - z2).
  MatrixXc local_matrix(double z1, double z2, double t) const {
    MatrixXc m = coupling(t);
    const double v = potential(z1 - z2);
    for (std::size_t c = 0; c < weight.size(); ++c)
      if (weight[c] != 0.0) m(c, c) += weight[c] * v;
    return m;
  }

  bool time_dependent() const {
    for (const auto& t : terms)
      if (t.schedule.time_dependent()) return true;
    return false;
  }
  bool spatial() const {
    for (const auto& t : terms)
      if (t.schedule.spatial()) return true;
    return false;
  }
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& t : terms)
      for (double b : t.schedule.breakpoints()) out.push_back(b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  double feature_time() const {
    double f = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) f = std::min(f, t.schedule.feature_time());
    return f;
  }
  bool interacting() const {
    if (potential.zero()) return false;
    for (double w : weight)
      if (w != 0.0) return true;
    return false;
  }
  bool has_loss() const {
    const MatrixXc c = coupling(0.0);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      if (c(i, i).imag() != 0.0) return true;
    return false;
  }

  ModelSpec with_potential(const Potential& p) const {
    ModelSpec m = *this;
    m.potential = p;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Local matrices of the generic models
// ---------------------------------------------------------------------------

inline MatrixXc generic_counter_matrix(double gp, double gm, double vp, double vm, double dkp,
                                       double dkm, double V) {
  MatrixXc h = MatrixXc::Zero(4, 4);
  h(0, 0) = vp * dkp - vm * dkm + V;
  h(1, 1) = vp * dkp;
  h(2, 2) = -vm * dkm;
  h(0, 1) = h(1, 0) = gm;
  h(0, 2) = h(2, 0) = gp;
  h(1, 3) = h(3, 1) = gp;
  h(2, 3) = h(3, 2) = gm;
  return h;
}

inline MatrixXc generic_co_matrix(double g, double v, double dk, double V) {
  MatrixXc h = MatrixXc::Zero(4, 4);
  h(0, 0) = 2.0 * v * dk + V;
  h(1, 1) = v * dk;
  h(2, 2) = v * dk;
  h(0, 1) = h(1, 0) = g;
  h(0, 2) = h(2, 0) = g;
  h(1, 3) = h(3, 1) = g;
  h(2, 3) = h(3, 2) = g;
  return h;
}

inline MatrixXc stored_gate_matrix(double g, double V) {
  MatrixXc h = MatrixXc::Zero(2, 2);
  h(0, 0) = V;
  h(0, 1) = h(1, 0) = g;
  return h;
}

/// Symmetric counterpropagating reduction in the (aa, s, bb) basis.
/// Rejects parameter sets that are not symmetric (g+ != g- or v+dk+ != -v-dk-).
inline MatrixXc symmetric3_matrix(double g_plus, double g_minus, double vdk_plus,
                                  double vdk_minus, double V) {
  if (g_plus != g_minus)
    throw ConfigError("symmetric model requires g+ == g-");
  if (vdk_plus != -vdk_minus)
    throw ConfigError("symmetric model requires v+dk+ == -v-dk-");
  const double s = std::sqrt(2.0) * g_plus;
  MatrixXc h = MatrixXc::Zero(3, 3);
  h(0, 0) = 2.0 * vdk_plus + V;
  h(1, 1) = vdk_plus;
  h(0, 1) = h(1, 0) = s;
  h(1, 2) = h(2, 1) = s;
  return h;
}

inline MatrixXc symmetric3_matrix(double g, double vdk, double V) {
  return symmetric3_matrix(g, g, vdk, -vdk, V);
}

// ---------------------------------------------------------------------------
// Rydberg EIT blocks
// ---------------------------------------------------------------------------

/// Single-particle (E, P, S, B) block without derivative terms; g' couples S and B.
inline MatrixXc eit_single_block(const PhysicsParams& p, double g_prime) {
  MatrixXc h = MatrixXc::Zero(4, 4);
  h(0, 1) = h(1, 0) = -p.g_p;
  h(1, 1) = cd(0.0, -p.gamma);
  h(1, 2) = h(2, 1) = -p.omega1;
  h(2, 2) = cd(p.delta, -p.gamma_r);
  h(2, 3) = h(3, 2) = g_prime;
  return h;
}

/// 16 x 16 local matrix H1 x I + I x H2 + V SS-projector, with g'_pm = g_pm csc(theta1).
inline MatrixXc eit_full16_matrix(const PhysicsParams& p, double g_plus, double g_minus,
                                  double delta, double V) {
  PhysicsParams q = p;
  q.delta = delta;
  const double csc1 = 1.0 / std::sin(mixing_angle(p.g_p, p.omega1));
  MatrixXc h = kron_sum(eit_single_block(q, g_plus * csc1), eit_single_block(q, g_minus * csc1));
  h(10, 10) += V;
  return h;
}

/// k-space generator of the atomic-coupling scheme in the
/// (Psi_aS, Phi_aS, P_aS, Psi_bS, Phi_bS, P_bS) basis, with constant V.
inline MatrixXc eit_atomic6_matrix(const PhysicsParams& p, double g, double k, double V) {
  const double th1 = mixing_angle(p.g_p, p.omega1);
  const double th2 = mixing_angle(p.g_p, p.omega2);
  const double s1 = std::sin(th1), c1 = std::cos(th1);
  const double s2 = std::sin(th2), c2 = std::cos(th2);
  const double cot1 = c1 / s1, cot2 = c2 / s2;
  const double ck = p.c * k;
  const double r1 = std::sqrt(p.g_p * p.g_p + p.omega1 * p.omega1);
  const double r2 = std::sqrt(p.g_p * p.g_p + p.omega2 * p.omega2);
  MatrixXc h = MatrixXc::Zero(6, 6);
  h(0, 0) = ck * c1 * c1 + V * s1 * s1;
  h(0, 1) = h(1, 0) = s1 * c1 * (ck - V);
  h(0, 3) = h(3, 0) = g;
  h(0, 4) = h(4, 0) = -g * cot2;
  h(1, 1) = ck * s1 * s1 + V * c1 * c1;
  h(1, 2) = h(2, 1) = -r1;
  h(1, 3) = h(3, 1) = -g * cot1;
  h(1, 4) = h(4, 1) = g * cot1 * cot2;
  h(2, 2) = cd(0.0, -p.gamma);
  h(3, 3) = ck * c2 * c2;
  h(3, 4) = h(4, 3) = ck * s2 * c2;
  h(4, 4) = ck * s2 * s2;
  h(4, 5) = h(5, 4) = -r2;
  h(5, 5) = cd(0.0, -p.gamma);
  return h;
}

/// Reduced (Psi_aS, Phi_aS, P_aS, Psi_bS) generator obtained by dropping the
/// b bright polariton and excited state.
inline MatrixXc eit_reduced4_matrix(const PhysicsParams& p, double g, double k, double V) {
  MatrixXc h = eit_atomic6_matrix(p, g, k, V).topLeftCorner(4, 4);
  return h;
}

/// Position-basis (E, P, S) to (DSP, BSP, P) rotation for mixing angle theta.
inline MatrixXc polariton_rotation(double theta) {
  MatrixXc u = MatrixXc::Zero(3, 3);
  const double s = std::sin(theta), c = std::cos(theta);
  u(0, 0) = c;
  u(0, 2) = -s;
  u(1, 0) = s;
  u(1, 2) = c;
  u(2, 1) = 1.0;
  return u;
}

// ---------------------------------------------------------------------------
// Model factories
// ---------------------------------------------------------------------------

namespace detail {

inline MatrixXc sym2(double diag0, double off) {
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = diag0;
  m(0, 1) = m(1, 0) = off;
  return m;
}

inline MatrixXc unit_coupling(std::size_t n, std::size_t i, std::size_t j, double value) {
  MatrixXc m = MatrixXc::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
  m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
  return m;
}

inline std::vector<ScheduledTerm> lift_terms(const std::vector<ScheduledTerm>& terms,
                                             std::size_t other, bool first) {
  std::vector<ScheduledTerm> out;
  const MatrixXc zero = MatrixXc::Zero(static_cast<Eigen::Index>(other),
                                       static_cast<Eigen::Index>(other));
  for (const auto& t : terms) {
    out.push_back({t.schedule, first ? kron_sum(t.matrix, zero) : kron_sum(zero, t.matrix)});
  }
  return out;
}

}  // namespace detail

/// Builds a Kronecker-sum model from two particle blocks. `interacting`
/// lists the combined labels that feel V(z1 - z2).
inline ModelSpec make_factorized(Variant variant, ParticleBlock p1, ParticleBlock p2,
                                 const std::vector<std::string>& interacting,
                                 const Potential& potential) {
  ModelSpec m;
  m.variant = variant;
  const std::size_t n1 = p1.size(), n2 = p2.size();
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      m.labels.push_back(p1.labels[i] + p2.labels[j]);
      m.v1.push_back(p1.velocity[i]);
      m.v2.push_back(p2.velocity[j]);
    }
  m.weight.assign(m.labels.size(), 0.0);
  for (const auto& name : interacting) {
    auto it = std::find(m.labels.begin(), m.labels.end(), name);
    if (it == m.labels.end()) throw ConfigError("unknown interacting component '" + name + "'");
    m.weight[static_cast<std::size_t>(it - m.labels.begin())] = 1.0;
  }
  m.base = kron_sum(p1.base, p2.base);
  m.terms = detail::lift_terms(p1.terms, n2, true);
  for (auto& t : detail::lift_terms(p2.terms, n1, false)) m.terms.push_back(std::move(t));
  m.potential = potential;
  m.factors = std::array<ParticleBlock, 2>{std::move(p1), std::move(p2)};
  return m;
}

struct GenericCounterConfig {
  CouplingSchedule g_plus = CouplingSchedule::constant(0.0);
  CouplingSchedule g_minus = CouplingSchedule::constant(0.0);
  double v_plus = 1.0;
  double v_minus = 1.0;
  double dk_plus = 0.0;
  double dk_minus = 0.0;
  Potential potential;
};

/// Counterpropagating four-mode model; component order (a+a-, a+b-, b+a-, b+b-).
inline ModelSpec make_generic_counter(const GenericCounterConfig& cfg) {
  ParticleBlock p1{{"a+", "b+"}, {cfg.v_plus, cfg.v_plus},
                   detail::sym2(cfg.v_plus * cfg.dk_plus, 0.0),
                   {{cfg.g_plus, detail::unit_coupling(2, 0, 1, 1.0)}}};
  ParticleBlock p2{{"a-", "b-"}, {-cfg.v_minus, -cfg.v_minus},
                   detail::sym2(-cfg.v_minus * cfg.dk_minus, 0.0),
                   {{cfg.g_minus, detail::unit_coupling(2, 0, 1, 1.0)}}};
  return make_factorized(Variant::GenericCounter4, std::move(p1), std::move(p2), {"a+a-"},
                         cfg.potential);
}

/// Copropagating four-mode model; component order (aa, ab, ba, bb).
///
/// Amplitudes are stored scaled by 1/sqrt(2) relative to the symmetric
/// second-quantized wavefunction, so the plain sum of component norms is the
/// physical norm.
inline ModelSpec make_generic_co(const CouplingSchedule& g, double v, double dk,
                                 const Potential& potential) {
  ParticleBlock p{{"a", "b"}, {v, v}, detail::sym2(v * dk, 0.0),
                  {{g, detail::unit_coupling(2, 0, 1, 1.0)}}};
  return make_factorized(Variant::GenericCo4, p, p, {"aa"}, potential);
}

/// Target photon (a+, b+) against a stored, stationary gate excitation s.
inline ModelSpec make_stored_gate(const CouplingSchedule& g, double v, double dk,
                                  const Potential& potential) {
  ParticleBlock p1{{"a+", "b+"}, {v, v}, detail::sym2(v * dk, 0.0),
                   {{g, detail::unit_coupling(2, 0, 1, 1.0)}}};
  ParticleBlock p2{{"s"}, {0.0}, MatrixXc::Zero(1, 1), {}};
  return make_factorized(Variant::StoredGate2, std::move(p1), std::move(p2), {"a+s"},
                         potential);
}

/// Symmetric counterpropagating three-component model (aa, s, bb).
inline ModelSpec make_symmetric3(const CouplingSchedule& g, double v, double dk,
                                 const Potential& potential) {
  ModelSpec m;
  m.variant = Variant::Symmetric3;
  m.labels = {"aa", "s", "bb"};
  m.v1 = {v, v, v};
  m.v2 = {-v, -v, -v};
  m.weight = {1.0, 0.0, 0.0};
  m.base = symmetric3_matrix(0.0, v * dk, 0.0);
  m.terms = {{g, symmetric3_matrix(1.0, 0.0, 0.0)}};
  m.potential = potential;
  return m;
}

/// Photonic-coupling scheme: (E_a, P_a, S_a, E_b) target against a stored
/// Rydberg excitation S, linear coupling g sec(theta) between E_a and E_b.
inline ModelSpec make_eit_photonic4(const PhysicsParams& p, const CouplingSchedule& g,
                                    double v_b, const Potential& potential) {
  const double sec1 = 1.0 / std::cos(mixing_angle(p.g_p, p.omega1));
  MatrixXc b = eit_single_block(p, 0.0);
  ParticleBlock p1{{"Ea", "Pa", "Sa", "Eb"}, {p.c, 0.0, 0.0, v_b}, b,
                   {{g, detail::unit_coupling(4, 0, 3, sec1)}}};
  ParticleBlock p2{{"S"}, {0.0}, MatrixXc::Zero(1, 1), {}};
  return make_factorized(Variant::EitPhotonic4, std::move(p1), std::move(p2), {"SaS"},
                         potential);
}

/// Atomic-coupling scheme with full (E, P, S) dynamics for both target modes.
inline ModelSpec make_eit_atomic6(const PhysicsParams& p, const CouplingSchedule& g,
                                  const Potential& potential) {
  const double th1 = mixing_angle(p.g_p, p.omega1);
  const double th2 = mixing_angle(p.g_p, p.omega2);
  MatrixXc b = MatrixXc::Zero(6, 6);
  b(0, 1) = b(1, 0) = -p.g_p;
  b(1, 1) = cd(0.0, -p.gamma);
  b(1, 2) = b(2, 1) = -p.omega1;
  b(2, 2) = cd(p.delta, -p.gamma_r);
  b(3, 4) = b(4, 3) = -p.g_p;
  b(4, 4) = cd(0.0, -p.gamma);
  b(4, 5) = b(5, 4) = -p.omega2;
  const double gpp = 1.0 / (std::sin(th1) * std::sin(th2));
  ParticleBlock p1{{"Ea", "Pa", "Sa", "Eb", "Pb", "Sb"}, {p.c, 0.0, 0.0, p.c, 0.0, 0.0}, b,
                   {{g, detail::unit_coupling(6, 2, 5, gpp)}}};
  ParticleBlock p2{{"S"}, {0.0}, MatrixXc::Zero(1, 1), {}};
  return make_factorized(Variant::EitAtomic6, std::move(p1), std::move(p2), {"SaS"},
                         potential);
}

struct EitFullConfig {
  PhysicsParams params;
  CouplingSchedule g_plus = CouplingSchedule::constant(0.0);
  CouplingSchedule g_minus = CouplingSchedule::constant(0.0);
  double v_b = 0.0;        // linear-mode group velocity; <= 0 selects c cos^2(theta1)
  bool counter = true;     // counterpropagating (second photon moves with -c, -v)
  double dk_plus = 0.0;    // momentum mismatch of the first photon's interacting mode
  double dk_minus = 0.0;   // same for the second photon
  Potential potential;
};

/// Full 16-component two-photon EIT model, component order
/// EE, EP, ES, EB, PE, PP, PS, PB, SE, SP, SS, SB, BE, BP, BS, BB.
/// Interacting-mode amplitudes are stored in the frame rotating with
/// exp(i dk z); the mismatch then enters as c dk on the E diagonal.
inline ModelSpec make_eit_full16(const EitFullConfig& cfg) {
  const PhysicsParams& p = cfg.params;
  const double csc1 = 1.0 / std::sin(mixing_angle(p.g_p, p.omega1));
  const double vb = cfg.v_b > 0.0 ? cfg.v_b : dark_group_velocity(p, p.omega1);
  const double sgn = cfg.counter ? -1.0 : 1.0;
  MatrixXc b1 = eit_single_block(p, 0.0), b2 = b1;
  b1(0, 0) += p.c * cfg.dk_plus;
  b2(0, 0) += sgn * p.c * cfg.dk_minus;
  ParticleBlock p1{{"E", "P", "S", "B"}, {p.c, 0.0, 0.0, vb}, b1,
                   {{cfg.g_plus, detail::unit_coupling(4, 2, 3, csc1)}}};
  ParticleBlock p2{{"E", "P", "S", "B"}, {sgn * p.c, 0.0, 0.0, sgn * vb}, b2,
                   {{cfg.g_minus, detail::unit_coupling(4, 2, 3, csc1)}}};
  return make_factorized(Variant::EitFull16, std::move(p1), std::move(p2), {"SS"},
                         cfg.potential);
}

// ---------------------------------------------------------------------------
// Rotating frame of the generic counterpropagating model
// ---------------------------------------------------------------------------

enum class FrameDirection { ToRotating, ToLab };

/// Applies the phase factors linking lab-frame amplitudes Psi and rotating
/// amplitudes Psi~: Psi_{a+a-} = Psi~ e^{i(dk+ z1 + dk- z2)}, Psi_{a+b-} =
/// Psi~ e^{i dk+ z1}, Psi_{b+a-} = Psi~ e^{i dk- z2}, Psi_{b+b-} = Psi~.
inline TwoPhotonState rotating_frame(const TwoPhotonState& in, double dk_plus, double dk_minus,
                                     FrameDirection dir) {
  TwoPhotonState out = in;
  const double sign = dir == FrameDirection::ToRotating ? -1.0 : 1.0;
  for (std::size_t c = 0; c < in.size(); ++c) {
    const std::string& name = in.labels[c];
    double w1 = 0.0, w2 = 0.0;
    if (name == "a+a-") { w1 = dk_plus; w2 = dk_minus; }
    else if (name == "a+b-") { w1 = dk_plus; }
    else if (name == "b+a-") { w2 = dk_minus; }
    else if (name == "b+b-") {}
    else throw ConfigError("unknown component '" + name + "' for the four-mode frame map");
    if (w1 == 0.0 && w2 == 0.0) continue;
    for (std::size_t i2 = 0; i2 < in.n2(); ++i2) {
      const double z2 = in.grid2.coordinate(i2);
      for (std::size_t i1 = 0; i1 < in.n1(); ++i1) {
        const double z1 = in.grid1.coordinate(i1);
        out.at(c, i1, i2) *= std::polar(1.0, sign * (w1 * z1 + w2 * z2));
      }
    }
  }
  out.frame = dir == FrameDirection::ToRotating ? Frame::Rotating : Frame::Lab;
  return out;
}

}  // namespace pbsim
