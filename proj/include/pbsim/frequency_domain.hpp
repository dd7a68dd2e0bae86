// frequency_domain.hpp - stationary (frequency-domain) transfer of a target
// photon past a stored gate excitation in the photonic-coupling scheme with a
// spatially modulated coupling g(z).
//
// The P and S fields are eliminated exactly at frequency omega, leaving a
// two-component ODE in z1 for the interacting amplitude a = E_aS / cos(theta)
// and the linear amplitude b = E_bS:
//
//   -i da/dz = K(omega, V) a + (g(z)/v) b
//   -i db/dz = (omega/v) b   + (g(z)/v) a
//
// with K the exact susceptibility term. The scaled variable a carries the same
// photon flux normalization as b.

#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pbsim/core.hpp"
#include "pbsim/hamiltonians.hpp"

namespace pbsim {

enum class FdModel { Exact, FirstOrder };

struct FrequencyDomainConfig {
  PhysicsParams params;
  CouplingSchedule coupling = CouplingSchedule::constant(0.0);  // spatial or constant
  double z_gate = 0.0;   // stored excitation position (um)
  double z_start = 0.0;  // input plane (um)
  double z_end = 0.0;    // exit plane (um)
  double core = 0.0;     // soft-core radius of the potential (um)
  FdModel model = FdModel::Exact;
  double rtol = 1e-10;
  double atol = 1e-13;
};

struct TransferAmplitudes {
  double omega = 0;
  cd a{0.0, 0.0};  // interacting mode at the exit plane (flux-normalized)
  cd b{0.0, 0.0};  // linear mode at the exit plane
};

/// Exact diagonal coefficient K(omega, V) of the interacting amplitude.
inline cd fd_exact_coefficient(const PhysicsParams& p, double omega, double V) {
  const cd iw(0.0, omega);
  if (!std::isfinite(V)) return omega / p.c + cd(0.0, p.g_p * p.g_p) / (p.c * (p.gamma - iw));
  const cd num = cd(0.0, p.g_p * p.g_p) * (V - omega);
  const cd den = p.c * ((p.gamma - iw) * (V - omega) - cd(0.0, p.omega1 * p.omega1));
  return omega / p.c + num / den;
}

/// Dissipative interaction V0 = i g_p^2 / (gamma c (1 - i Omega^2 / (gamma V))).
inline cd fd_v0(const PhysicsParams& p, double V) {
  if (!std::isfinite(V)) return cd(0.0, p.g_p * p.g_p / (p.gamma * p.c));
  return cd(0.0, p.g_p * p.g_p) * V / (p.c * (p.gamma * V - cd(0.0, p.omega1 * p.omega1)));
}

/// First-order dispersion correction V1.
inline cd fd_v1(const PhysicsParams& p, double V) {
  const double th = mixing_angle(p.g_p, p.omega1);
  const double c2 = std::cos(th) * std::cos(th);
  const double o2 = p.omega1 * p.omega1;
  if (!std::isfinite(V)) return -p.g_p * p.g_p * (1.0 + p.gamma * p.gamma / o2) * c2 / (p.gamma * p.gamma);
  const cd den = cd(o2, p.gamma * V) * cd(o2, p.gamma * V);
  return p.g_p * p.g_p * V * ((1.0 + p.gamma * p.gamma / o2) * V - cd(0.0, 2.0 * p.gamma)) * c2 / den;
}

/// Lowest-order-in-omega diagonal coefficient V0 + omega (1 + V1) / v.
inline cd fd_first_order_coefficient(const PhysicsParams& p, double omega, double V) {
  const double v = dark_group_velocity(p, p.omega1);
  return fd_v0(p, V) + omega * (1.0 + fd_v1(p, V)) / v;
}

/// Local decay rate of b after adiabatic elimination of a: Re(i g^2 / (v^2 K)).
inline double bs_decay_coefficient(const PhysicsParams& p, double g, double V) {
  const double v = dark_group_velocity(p, p.omega1);
  const cd k = fd_v0(p, V);
  return (cd(0.0, g * g) / (v * v * k)).real();
}

namespace detail {

using FdState = std::array<double, 4>;

}  // namespace detail

/// Integrates the transfer ODE from z_start to z_end for each omega, starting
/// from b = 1, a = 0. Step-size collapse raises SolverError naming the z location.
inline std::vector<TransferAmplitudes> propagate_frequency_domain(
    const FrequencyDomainConfig& cfg, const std::vector<double>& omegas) {
  namespace ode = boost::numeric::odeint;
  const PhysicsParams& p = cfg.params;
  p.validate();
  cfg.coupling.validate();
  if (cfg.coupling.time_dependent())
    throw ConfigError("frequency-domain propagation needs a spatial or constant coupling");
  if (!(cfg.z_end > cfg.z_start)) throw ConfigError("z_end must exceed z_start");
  const double v = dark_group_velocity(p, p.omega1);
  const Potential pot{p.c6, cfg.core, 1.0};

  std::vector<double> edges = {cfg.z_start};
  auto add_edge = [&](double z) {
    if (z > cfg.z_start && z < cfg.z_end) edges.push_back(z);
  };
  if (cfg.coupling.spatial()) {
    add_edge(cfg.coupling.on);
    add_edge(cfg.coupling.off);
  }
  add_edge(cfg.z_gate);
  edges.push_back(cfg.z_end);
  std::sort(edges.begin(), edges.end());

  std::vector<TransferAmplitudes> out;
  for (double w : omegas) {
    double gv = 0.0;
    auto rhs = [&](const detail::FdState& y, detail::FdState& dy, double z) {
      const cd a(y[0], y[1]), b(y[2], y[3]);
      const double V = pot(z - cfg.z_gate);
      const cd k = cfg.model == FdModel::Exact ? fd_exact_coefficient(p, w, V)
                                               : fd_first_order_coefficient(p, w, V);
      const cd i(0.0, 1.0);
      const cd da = i * (k * a + gv * b);
      const cd db = i * (w / v * b + gv * a);
      dy = {da.real(), da.imag(), db.real(), db.imag()};
    };
    auto stepper = ode::make_controlled(cfg.atol, cfg.rtol, ode::runge_kutta_dopri5<detail::FdState>());
    detail::FdState y = {0.0, 0.0, 1.0, 0.0};
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      double z = edges[s];
      const double zb = edges[s + 1];
      gv = coupling_at(cfg.coupling, 0.0, 0.5 * (z + zb)) / v;
      const double span = zb - z;
      double h = std::min(span, 1e-3 * span + 1e-6);
      long guard = 0;
      while (z < zb) {
        if (z + h > zb) h = zb - z;
        const double z_before = z;
        const ode::controlled_step_result res = stepper.try_step(rhs, y, z, h);
        if (res == ode::fail) {
          if (h < 1e-14 * std::max(1.0, std::abs(z)))
            throw SolverError("frequency-domain step size collapsed at z = " + std::to_string(z) +
                              " um (omega = " + std::to_string(w) + ")");
          continue;
        }
        if (z == z_before || ++guard > 5000000)
          throw SolverError("frequency-domain integration stalled at z = " + std::to_string(z) + " um");
        for (double x : y)
          if (!std::isfinite(x))
            throw SolverError("non-finite amplitude at z = " + std::to_string(z) + " um");
      }
    }
    out.push_back({w, cd(y[0], y[1]), cd(y[2], y[3])});
  }
  return out;
}

}  // namespace pbsim
