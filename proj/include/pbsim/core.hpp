// core.hpp - domain types, unit conventions, potentials, pulses and coupling
// schedules shared by every other pbsim module.
//
// Units: frequencies in rad/us, lengths in um, times in us. A frequency quoted
// as "f MHz" enters the code as mhz(f) = 2*pi*f rad/us.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbsim {

using cd = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Vacuum speed of light in um/us (numerically equal to m/s).
inline constexpr double kSpeedOfLight = 299792458.0;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/us.
constexpr double mhz(double f) { return kTwoPi * f; }
constexpr double to_mhz(double w) { return w / kTwoPi; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user-facing configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a run (non-finite values, stiffness, ...).
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, long step = -1)
      : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

struct PhysicsParams {
  double g_p = mhz(20000.0);     // collective atom-photon coupling
  double omega1 = mhz(5.0);      // control Rabi frequency, interacting mode
  double omega2 = mhz(5.0);      // control Rabi frequency, linear mode
  double gamma = mhz(3.0);       // intermediate-state half-linewidth
  double c = kSpeedOfLight;      // um/us
  double c6 = 0.0;               // rad um^6 / us
  double delta = 0.0;            // two-photon detuning
  double gamma_r = 0.0;          // Rydberg decay rate

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!(finite(g_p) && g_p > 0)) throw ConfigError("g_p must be positive");
    if (!(finite(gamma) && gamma > 0)) throw ConfigError("gamma must be positive");
    if (!(finite(c) && c > 0)) throw ConfigError("c must be positive");
    if (!(finite(c6) && c6 >= 0)) throw ConfigError("c6 must be non-negative");
    if (!(finite(gamma_r) && gamma_r >= 0))
      throw ConfigError("gamma_r must be non-negative");
    if (!(finite(omega1) && omega1 > 0)) throw ConfigError("omega1 must be positive");
    if (!(finite(omega2) && omega2 > 0)) throw ConfigError("omega2 must be positive");
    if (!finite(delta)) throw ConfigError("delta must be finite");
  }
};

/// Mixing angle tan(theta) = g_p / omega.
inline double mixing_angle(double g_p, double omega) { return std::atan2(g_p, omega); }

/// Dark-polariton group velocity c * cos^2(theta) = c * omega^2 / (g_p^2 + omega^2).
inline double dark_group_velocity(const PhysicsParams& p, double omega) {
  return p.c * omega * omega / (p.g_p * p.g_p + omega * omega);
}

/// C6 that places the EIT blockade radius at z_b: V(z_b) = omega1^2 / gamma.
inline double c6_from_eit_radius(const PhysicsParams& p, double z_b) {
  return std::pow(z_b, 6) * p.omega1 * p.omega1 / p.gamma;
}

struct DerivedScales {
  double theta1 = 0;
  double theta2 = 0;
  double v_g = 0;   // dark-polariton group velocity of the interacting mode
  double z_b = 0;   // EIT blockade radius
  double r_b = std::numeric_limits<double>::quiet_NaN();  // coupling blockade radius
  double d_b = 0;   // blockade optical depth
};

/// Regularized van der Waals potential C6 / (r^6 + core^6).
inline double vdw_potential(double r, const PhysicsParams& p, double core) {
  const double r2 = r * r;
  const double c2 = core * core;
  return p.c6 / (r2 * r2 * r2 + c2 * c2 * c2);
}

/// Mixing angles, group velocity and blockade radii. g <= 0 leaves r_b as NaN.
inline DerivedScales derived_scales(const PhysicsParams& p, double g = 0.0) {
  if (!(p.c6 > 0)) throw ConfigError("undefined radius: c6 must be positive");
  DerivedScales s;
  s.theta1 = mixing_angle(p.g_p, p.omega1);
  s.theta2 = mixing_angle(p.g_p, p.omega2);
  s.v_g = dark_group_velocity(p, p.omega1);
  s.z_b = std::pow(p.c6 * p.gamma / (p.omega1 * p.omega1), 1.0 / 6.0);
  if (g > 0) {
    const double sin1 = std::sin(s.theta1);
    s.r_b = std::pow(p.c6 * sin1 * sin1 / (2.0 * g), 1.0 / 6.0);
  }
  s.d_b = p.g_p * p.g_p * s.z_b / (p.gamma * p.c);
  return s;
}

/// Coupling strength whose blockade radius is r_b: V(r_b) sin^2(theta1) = 2 g.
inline double coupling_for_blockade_radius(const PhysicsParams& p, double r_b) {
  const double sin1 = std::sin(mixing_angle(p.g_p, p.omega1));
  return vdw_potential(r_b, p, 0.0) * sin1 * sin1 / 2.0;
}

// ---------------------------------------------------------------------------
// Grids and pulses
// ---------------------------------------------------------------------------

struct Grid1D {
  std::size_t n = 0;
  double length = 0;
  double origin = 0;

  Grid1D() = default;
  Grid1D(std::size_t n_, double length_, double origin_)
      : n(n_), length(length_), origin(origin_) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw ConfigError("grid size must be a power of two >= 2, got " + std::to_string(n));
    if (!(length > 0) || !std::isfinite(length) || !std::isfinite(origin))
      throw ConfigError("grid length must be positive and finite");
  }

  /// Grid of n points covering [-length/2, length/2).
  static Grid1D centered(std::size_t n, double length) {
    return Grid1D(n, length, -0.5 * length);
  }

  double spacing() const { return length / static_cast<double>(n); }
  double coordinate(std::size_t i) const { return origin + spacing() * static_cast<double>(i); }

  bool operator==(const Grid1D& o) const {
    return n == o.n && length == o.length && origin == o.origin;
  }
};

struct PulseSpec {
  double center = 0;
  double sigma = 1;
  double dk = 0;  // momentum offset, rad/um
};

/// L2-normalized Gaussian exp(-(z-z0)^2 / 2 sigma^2) exp(i dk z) sampled on the grid.
inline std::vector<cd> gaussian_pulse(const Grid1D& grid, const PulseSpec& spec) {
  if (!(spec.sigma > 0)) throw ConfigError("pulse sigma must be positive");
  if (spec.sigma < 4.0 * grid.spacing())
    throw ConfigError("pulse under-resolved: sigma must be >= 4 grid spacings");
  std::vector<cd> h(grid.n);
  double norm = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double z = grid.coordinate(i);
    const double x = (z - spec.center) / spec.sigma;
    const double amp = std::exp(-0.5 * x * x);
    h[i] = spec.dk == 0.0 ? cd(amp, 0.0) : amp * std::polar(1.0, spec.dk * z);
    norm += amp * amp;
  }
  const double scale = 1.0 / std::sqrt(norm * grid.spacing());
  for (auto& v : h) v *= scale;
  return h;
}

// ---------------------------------------------------------------------------
// Coupling schedules
// ---------------------------------------------------------------------------

enum class ScheduleKind { Constant, SquareTime, TanhTime, SquareSpace };

/// Temporal g(t) or spatial g(z) modulation of the linear coupling.
///
/// The double-tanh profile is
///   g(t) = amplitude * [tanh(rate*t - on) - tanh(rate*t - off)] / 2,
/// so a caption-style "g/X = [tanh(...) - tanh(...)]/4" has amplitude X/2.
struct CouplingSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double amplitude = 0;
  double on = 0;    // window start (us or um); tanh: centre offset of rising edge
  double off = 0;   // window end; tanh: centre offset of falling edge
  double rate = 0;  // tanh steepness (1/us)

  static CouplingSchedule constant(double g) {
    return {ScheduleKind::Constant, g, 0, 0, 0};
  }
  static CouplingSchedule square_time(double g, double t_on, double t_off) {
    CouplingSchedule s{ScheduleKind::SquareTime, g, t_on, t_off, 0};
    s.validate();
    return s;
  }
  static CouplingSchedule square_space(double g, double z_lo, double z_hi) {
    CouplingSchedule s{ScheduleKind::SquareSpace, g, z_lo, z_hi, 0};
    s.validate();
    return s;
  }
  static CouplingSchedule tanh_time(double amplitude, double rate, double on, double off) {
    CouplingSchedule s{ScheduleKind::TanhTime, amplitude, on, off, rate};
    s.validate();
    return s;
  }
  /// Adiabatic ramp g(t)/(v dk) = [tanh(5.78 v t/sigma - 2.2) - tanh(5.78 v t/sigma - 4.1)]/4.
  static CouplingSchedule adiabatic_ramp(double v, double dk, double sigma) {
    return tanh_time(0.5 * v * dk, 5.78 * v / sigma, 2.2, 4.1);
  }

  void validate() const {
    if (!(amplitude >= 0) || !std::isfinite(amplitude))
      throw ConfigError("coupling amplitude must be non-negative");
    if ((kind == ScheduleKind::SquareTime || kind == ScheduleKind::SquareSpace) && !(off > on))
      throw ConfigError("square coupling window needs off > on");
    if (kind == ScheduleKind::TanhTime && !(rate > 0))
      throw ConfigError("tanh coupling needs a positive rate");
  }

  bool time_dependent() const {
    return kind == ScheduleKind::SquareTime || kind == ScheduleKind::TanhTime;
  }
  bool spatial() const { return kind == ScheduleKind::SquareSpace; }
  bool smooth() const { return kind == ScheduleKind::TanhTime; }

  /// Switching times at which a square profile is discontinuous.
  std::vector<double> breakpoints() const {
    if (kind == ScheduleKind::SquareTime) return {on, off};
    return {};
  }

  /// Shortest time scale of the profile (ramp time), infinity if none.
  double feature_time() const {
    if (kind == ScheduleKind::TanhTime) return 1.0 / rate;
    return std::numeric_limits<double>::infinity();
  }

  /// Largest value the profile reaches.
  double peak() const {
    if (kind != ScheduleKind::TanhTime) return amplitude;
    const double half = 0.5 * (off - on);
    return amplitude * std::tanh(half);
  }
};

/// Evaluates the profile at time t and target position z.
inline double coupling_at(const CouplingSchedule& s, double t, double z) {
  switch (s.kind) {
    case ScheduleKind::Constant:
      return s.amplitude;
    case ScheduleKind::SquareTime:
      return (t >= s.on && t < s.off) ? s.amplitude : 0.0;
    case ScheduleKind::SquareSpace:
      return (z >= s.on && z < s.off) ? s.amplitude : 0.0;
    case ScheduleKind::TanhTime: {
      const double x = s.rate * t;
      return 0.5 * s.amplitude * (std::tanh(x - s.on) - std::tanh(x - s.off));
    }
  }
  return 0.0;
}

}  // namespace pbsim
