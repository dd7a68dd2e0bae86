// spectra.hpp - k-space eigenstructure of the atomic-coupling scheme, the
// dark-weight formula and the dressed interaction strengths.

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pbsim/core.hpp"
#include "pbsim/hamiltonians.hpp"
#include "pbsim/linalg.hpp"

namespace pbsim {

struct Eigenpair {
  cd omega;
  VectorXc vector;  // unit norm
};

struct ModeSet {
  std::vector<Eigenpair> pairs;  // sorted by Re(omega)
  bool perturbed = false;        // k nudged to escape a defective point
};

enum class Reduction { Full6, Reduced4 };

namespace detail {

inline MatrixXc kspace_matrix(const PhysicsParams& p, double g, double k, double V, Reduction r) {
  return r == Reduction::Full6 ? eit_atomic6_matrix(p, g, k, V) : eit_reduced4_matrix(p, g, k, V);
}

inline bool well_conditioned(const MatrixXc& u) {
  Eigen::JacobiSVD<MatrixXc> svd(u);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 1e-8 * s(0);
}

}  // namespace detail

/// Eigenpairs of the k-space generator. A defective (or nearly defective)
/// matrix is re-solved at k (1 + 1e-9) and the result flagged.
inline ModeSet eigenmodes(const PhysicsParams& p, double g, double k, double V,
                          Reduction r = Reduction::Full6) {
  ModeSet out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double kk = attempt == 0 ? k : (k == 0.0 ? 1e-12 : k * (1.0 + 1e-9));
    Eigen::ComplexEigenSolver<MatrixXc> es(detail::kspace_matrix(p, g, kk, V, r));
    if (es.info() != Eigen::Success) continue;
    if (attempt == 0 && !detail::well_conditioned(es.eigenvectors())) continue;
    out.perturbed = attempt == 1;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      out.pairs.push_back({es.eigenvalues()(i), es.eigenvectors().col(i).normalized()});
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const Eigenpair& a, const Eigenpair& b) { return a.omega.real() < b.omega.real(); });
    return out;
  }
  throw SolverError("eigensolver failed for the k-space generator");
}

struct EigenBranch {
  std::string label;
  std::vector<double> k;
  std::vector<cd> omega;
  std::vector<std::vector<double>> weights;  // |component|^2 per k
  std::vector<double> overlap;               // |<v(k_{i-1})|v(k_i)>| (1 at the first point)
  std::vector<std::size_t> discontinuities;  // indices where overlap < 0.9
};

/// Follows the eigenpair selected at ks[start] by `seed` along the k grid by
/// maximal eigenvector overlap, in both directions.
inline EigenBranch track_branch(const PhysicsParams& p, double g, double V,
                                const std::vector<double>& ks, std::size_t start,
                                std::size_t seed, Reduction r = Reduction::Full6,
                                const std::string& label = "branch") {
  if (ks.empty() || start >= ks.size()) throw ConfigError("invalid k grid for branch tracking");
  const std::size_t n = ks.size();
  std::vector<Eigenpair> chosen(n);
  std::vector<double> ov(n, 1.0);
  const ModeSet m0 = eigenmodes(p, g, ks[start], V, r);
  if (seed >= m0.pairs.size()) throw ConfigError("branch seed out of range");
  chosen[start] = m0.pairs[seed];
  auto follow = [&](long from, long to, long stepdir) {
    for (long i = from + stepdir; stepdir > 0 ? i <= to : i >= to; i += stepdir) {
      const VectorXc& prev = chosen[static_cast<std::size_t>(i - stepdir)].vector;
      const ModeSet m = eigenmodes(p, g, ks[static_cast<std::size_t>(i)], V, r);
      double best = -1.0;
      std::size_t bi = 0;
      for (std::size_t j = 0; j < m.pairs.size(); ++j) {
        const double o = std::abs(prev.dot(m.pairs[j].vector));
        if (o > best) { best = o; bi = j; }
      }
      chosen[static_cast<std::size_t>(i)] = m.pairs[bi];
      ov[static_cast<std::size_t>(stepdir > 0 ? i : i + 1)] = best;
    }
  };
  follow(static_cast<long>(start), static_cast<long>(n) - 1, 1);
  follow(static_cast<long>(start), 0, -1);
  EigenBranch b;
  b.label = label;
  b.k = ks;
  for (std::size_t i = 0; i < n; ++i) {
    b.omega.push_back(chosen[i].omega);
    std::vector<double> w;
    for (Eigen::Index c = 0; c < chosen[i].vector.size(); ++c) w.push_back(std::norm(chosen[i].vector(c)));
    b.weights.push_back(std::move(w));
    b.overlap.push_back(i == 0 ? 1.0 : ov[i]);
    if (i > 0 && ov[i] < 0.9) b.discontinuities.push_back(i);
  }
  return b;
}

/// Index of the eigenpair with the largest weight on `component`.
inline std::size_t dominant_mode(const ModeSet& m, Eigen::Index component) {
  std::size_t best = 0;
  double w = -1.0;
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const double x = std::norm(m.pairs[i].vector(component));
    if (x > w) { w = x; best = i; }
  }
  return best;
}

/// Local slope d Re(omega) / dk of a tracked branch by central differences.
inline std::vector<double> group_velocity(const EigenBranch& b) {
  std::vector<double> v(b.k.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i + 1 < b.k.size(); ++i)
    v[i] = (b.omega[i + 1].real() - b.omega[i - 1].real()) / (b.k[i + 1] - b.k[i - 1]);
  return v;
}

struct DarkWeight {
  double exact = 0;
  double approx = 0;
};

/// Effective interaction felt by the interacting dark polariton.
inline double effective_interaction(const PhysicsParams& p, double V) {
  const double s = std::sin(mixing_angle(p.g_p, p.omega1));
  return V * s * s;
}

/// Closed-form weight sin^2(beta) in terms of x = g / V_eff.
inline double dark_weight_formula(double g_over_v) {
  const double u = 4.0 * g_over_v * g_over_v;
  return 1.0 - 2.0 * g_over_v * g_over_v / (1.0 + u + std::sqrt(1.0 + u));
}

/// sin^2(beta): exact value is the |Psi_bS|^2 weight of the reduced-generator
/// eigenvector dominated by Psi_bS; the approximation uses V_eff = V sin^2(theta1).
inline DarkWeight dark_weight(const PhysicsParams& p, double g, double k, double V) {
  const ModeSet m = eigenmodes(p, g, k, V, Reduction::Reduced4);
  const std::size_t i = dominant_mode(m, 3);
  const double w = std::norm(m.pairs[i].vector(3));
  if (!(w > 0.5)) throw SolverError("no eigenvector with Psi_bS weight above 0.5");
  DarkWeight d;
  d.exact = w;
  const double veff = effective_interaction(p, V);
  d.approx = veff == 0.0 ? (g == 0.0 ? 1.0 : 0.0) : dark_weight_formula(g / veff);
  return d;
}

// ---------------------------------------------------------------------------
// Dressed interactions
// ---------------------------------------------------------------------------

/// Dressed shift with no photon in the interacting mode.
inline double dressed_jbb(double g, double vdk) {
  return -0.5 * vdk + std::sqrt(vdk * vdk + 4.0 * g * g) - 0.5 * std::sqrt(vdk * vdk + 8.0 * g * g);
}

/// Dressed shift with one photon in the interacting mode.
inline double dressed_jab(double g, double vdk) {
  return -0.5 * vdk + 0.5 * std::sqrt(vdk * vdk + 8.0 * g * g);
}

/// Phase -int J_ab(g(t)) dt over [t0, t1]. Unless `open_path` is set, the
/// schedule must (nearly) vanish at both ends: |g| <= 5% of its peak.
inline double dressed_phase(const CouplingSchedule& s, double vdk, double t0, double t1,
                            bool open_path = false) {
  s.validate();
  if (s.spatial()) throw ConfigError("dressed phase needs a temporal schedule");
  if (!(t1 >= t0)) throw ConfigError("dressed phase needs t1 >= t0");
  const double peak = s.peak();
  if (peak == 0.0 || t1 == t0) return 0.0;
  const double g0 = coupling_at(s, t0, 0.0), g1 = coupling_at(s, t1 * (1 - 1e-15), 0.0);
  if (!open_path && (s.kind == ScheduleKind::Constant || g0 > 0.05 * peak || g1 > 0.05 * peak))
    throw ConfigError("open-path schedule: coupling must vanish at both ends");
  std::vector<double> edges = {t0};
  for (double b : s.breakpoints())
    if (b > t0 && b < t1) edges.push_back(b);
  edges.push_back(t1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto f = [&](double t) { return dressed_jab(coupling_at(s, t, 0.0), vdk); };
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, edges[i], edges[i + 1], 15, 1e-12, &err);
  }
  return -total;
}

}  // namespace pbsim
