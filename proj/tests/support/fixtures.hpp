// Shared fixtures: a smooth random state and one small instance of every
// model variant.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pbsim/evolution.hpp"

namespace pbsim::testing {

inline double max_diff(const TwoPhotonState& a, const TwoPhotonState& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t i = 0; i < a.points(); ++i) m = std::max(m, std::abs(a.comps[c][i] - b.comps[c][i]));
  return m;
}

inline PhysicsParams toy_eit() {
  PhysicsParams p;
  p.g_p = 12.0;
  p.omega1 = 5.0;
  p.omega2 = 4.0;
  p.gamma = 1.0;
  p.c = 6.0;
  return p;
}

/// Random smooth state: every component is a product of Gaussians.
inline TwoPhotonState smooth_state(const ModelSpec& m, const Grid1D& g1, const Grid1D& g2) {
  TwoPhotonState st(m.labels, g1, g2);
  const double s1 = std::max(2.0, 4.2 * g1.spacing());
  const double s2 = std::max(2.2, 4.2 * g2.spacing());
  for (std::size_t c = 0; c < m.size(); ++c) {
    const double shift = 0.37 * static_cast<double>(c % 5) - 0.6;
    const auto h1 = gaussian_pulse(g1, {shift, s1, 0.3 * static_cast<double>(c % 3)});
    const auto h2 = gaussian_pulse(g2, {-shift, s2, -0.2});
    st.set_product(m.labels[c], h1, h2, cd(std::cos(0.4 * c), std::sin(0.4 * c)));
  }
  const double n = std::sqrt(st.norm());
  for (auto& c : st.comps)
    for (auto& v : c) v /= n;
  return st;
}

struct VariantCase {
  std::string name;
  ModelSpec model;
};

inline std::vector<VariantCase> all_variants() {
  const double g = 1.0;
  const Potential pot{8.0, 1.0, 1.0};
  const auto cg = CouplingSchedule::constant(g);
  std::vector<VariantCase> out;
  GenericCounterConfig gc;
  gc.g_plus = cg;
  gc.g_minus = CouplingSchedule::constant(0.7 * g);
  gc.v_plus = 1.0;
  gc.v_minus = 0.8;
  gc.dk_plus = 0.3;
  gc.dk_minus = -0.2;
  gc.potential = pot;
  out.push_back({"generic-counter-4", make_generic_counter(gc)});
  out.push_back({"generic-co-4", make_generic_co(cg, 1.0, 0.4, pot)});
  out.push_back({"stored-gate-2", make_stored_gate(cg, 1.0, 0.2, pot)});
  out.push_back({"symmetric-3", make_symmetric3(cg, 1.0, 0.3, pot)});
  const PhysicsParams p = toy_eit();
  out.push_back({"eit-photonic-4", make_eit_photonic4(p, cg, 0.5, pot)});
  out.push_back({"eit-atomic-6", make_eit_atomic6(p, cg, pot)});
  EitFullConfig fc;
  fc.params = p;
  fc.g_plus = cg;
  fc.g_minus = cg;
  fc.potential = pot;
  out.push_back({"eit-full-16", make_eit_full16(fc)});
  return out;
}

}  // namespace pbsim::testing
