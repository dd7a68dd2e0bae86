#include <gtest/gtest.h>

#include <cmath>

#include "pbsim/frequency_domain.hpp"

using namespace pbsim;

namespace {

FrequencyDomainConfig gate_config(double d_b, double V_scale = 1.0) {
  FrequencyDomainConfig cfg;
  PhysicsParams& p = cfg.params;
  const double z_b = d_b * p.gamma * p.c / (p.g_p * p.g_p);
  p.c6 = V_scale * c6_from_eit_radius(p, z_b);
  const double v = dark_group_velocity(p, p.omega1);
  const double g = kPi * v / (4.0 * z_b);
  cfg.coupling = CouplingSchedule::square_space(g, -z_b, z_b);
  cfg.z_gate = 0.0;
  cfg.z_start = -z_b;
  cfg.z_end = z_b;
  return cfg;
}

}  // namespace

TEST(FrequencyDomain, FreeConversionIsComplete) {
  auto cfg = gate_config(38.46);
  cfg.params.c6 = 0.0;
  const auto r = propagate_frequency_domain(cfg, {0.0});
  EXPECT_GT(std::norm(r[0].a), 1.0 - 1e-4);
  EXPECT_NEAR(std::norm(r[0].a) + std::norm(r[0].b), 1.0, 1e-8);
}

TEST(FrequencyDomain, BlockadedTransmissionMatchesEstimate) {
  for (double d_b : {15.0, 38.46}) {
    const auto r = propagate_frequency_domain(gate_config(d_b), {0.0});
    const double T = std::norm(r[0].b);
    EXPECT_NEAR(T, std::exp(-kPi * kPi / (4.0 * d_b)), 0.03) << "d_b = " << d_b;
  }
}

TEST(FrequencyDomain, FirstOrderModelAgreesNearResonance) {
  auto exact = gate_config(38.46);
  auto first = exact;
  first.model = FdModel::FirstOrder;
  const std::vector<double> w = {-0.5, 0.0, 0.5};
  const auto a = propagate_frequency_domain(exact, w);
  const auto b = propagate_frequency_domain(first, w);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(std::abs(a[i].b - b[i].b), 0.0, 2e-2);
}

TEST(FrequencyDomain, DecayCoefficientLimit) {
  PhysicsParams p;
  const double v = dark_group_velocity(p, p.omega1);
  const double g = 3.0;
  const double limit = g * g * p.gamma * p.c / (p.g_p * p.g_p * v * v);
  EXPECT_NEAR(bs_decay_coefficient(p, g, 1e12) / limit, 1.0, 1e-6);
  EXPECT_NEAR(bs_decay_coefficient(p, g, std::numeric_limits<double>::infinity()) / limit, 1.0, 1e-12);
}

TEST(FrequencyDomain, CoefficientsAgreeAtZeroFrequency) {
  PhysicsParams p;
  for (double V : {0.5, 10.0, 300.0, 1e6}) {
    const cd e = fd_exact_coefficient(p, 0.0, V);
    const cd f = fd_first_order_coefficient(p, 0.0, V);
    EXPECT_NEAR(std::abs(e - f), 0.0, 1e-12 * std::abs(e) + 1e-15);
  }
  EXPECT_EQ(fd_exact_coefficient(p, 0.0, 0.0), cd(0.0, 0.0));
}

TEST(FrequencyDomain, FirstOrderSlopeMatchesExact) {
  PhysicsParams p;
  const double h = 1e-4;
  for (double V : {0.0, 5.0, 100.0}) {
    const cd de = (fd_exact_coefficient(p, h, V) - fd_exact_coefficient(p, -h, V)) / (2 * h);
    const cd df = (fd_first_order_coefficient(p, h, V) - fd_first_order_coefficient(p, -h, V)) / (2 * h);
    EXPECT_NEAR(std::abs(de - df) / std::abs(de), 0.0, 1e-5) << "V = " << V;
  }
}

TEST(FrequencyDomain, InvalidConfigRejected) {
  auto cfg = gate_config(15.0);
  cfg.z_end = cfg.z_start;
  EXPECT_THROW(propagate_frequency_domain(cfg, {0.0}), ConfigError);
  auto t = gate_config(15.0);
  t.coupling = CouplingSchedule::square_time(1.0, 0.0, 1.0);
  EXPECT_THROW(propagate_frequency_domain(t, {0.0}), ConfigError);
}
