#include <gtest/gtest.h>

#include <random>

#include "pbsim/hamiltonians.hpp"

using namespace pbsim;

namespace {

std::vector<double> sorted_real_eigs(const MatrixXc& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(m);
  std::vector<double> w(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  std::sort(w.begin(), w.end());
  return w;
}

PhysicsParams small_params() {
  PhysicsParams p;
  p.g_p = 30.0;
  p.omega1 = 10.0;
  p.omega2 = 8.0;
  p.gamma = 2.0;
  p.c = 40.0;
  return p;
}

// Checks H = Hermitian - i Gamma with Gamma diagonal and non-negative.
void expect_loss_structure(const MatrixXc& h) {
  const MatrixXc herm = 0.5 * (h + h.adjoint());
  const MatrixXc anti = h - herm;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (i == j) {
        EXPECT_EQ(anti(i, i).real(), 0.0);
        EXPECT_LE(anti(i, i).imag(), 0.0);
      } else {
        EXPECT_EQ(std::abs(anti(i, j)), 0.0);
      }
    }
}

}  // namespace

TEST(GenericCounter, ZeroParametersGiveZeroMatrix) {
  EXPECT_EQ(generic_counter_matrix(0, 0, 1, 1, 0, 0, 0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GenericCounter, SymmetricDiagonal) {
  const double g = 0.7, v = 2.0, dk = 0.3;
  const MatrixXc h = generic_counter_matrix(g, g, v, v, dk, -dk, 0.0);
  EXPECT_DOUBLE_EQ(h(0, 0).real(), 2 * v * dk);
  EXPECT_DOUBLE_EQ(h(1, 1).real(), v * dk);
  EXPECT_DOUBLE_EQ(h(2, 2).real(), v * dk);
  EXPECT_DOUBLE_EQ(h(3, 3).real(), 0.0);
}

TEST(GenericCounter, ResonantEigenvalues) {
  const double g = 1.3;
  const auto w = sorted_real_eigs(generic_counter_matrix(g, g, 1, 1, 0, 0, 0));
  const std::vector<double> expect = {-2 * g, 0, 0, 2 * g};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(w[i], expect[i], 1e-12);
}

TEST(GenericCounter, CouplingPattern) {
  const MatrixXc h = generic_counter_matrix(2.0, 3.0, 1, 1, 0, 0, 5.0);
  EXPECT_EQ(h(0, 1), cd(3.0, 0.0));
  EXPECT_EQ(h(0, 2), cd(2.0, 0.0));
  EXPECT_EQ(h(0, 3), cd(0.0, 0.0));
  EXPECT_EQ(h(1, 3), cd(2.0, 0.0));
  EXPECT_EQ(h(2, 3), cd(3.0, 0.0));
  EXPECT_EQ(h(0, 0), cd(5.0, 0.0));
}

TEST(GenericCounter, AntisymmetricCombinationDecouples) {
  const double g = 0.9, v = 1.5, dk = 0.4;
  const MatrixXc h = generic_counter_matrix(g, g, v, v, dk, -dk, 3.0);
  MatrixXc u = MatrixXc::Zero(4, 4);
  const double r = 1.0 / std::sqrt(2.0);
  u(0, 0) = 1;
  u(1, 1) = r;
  u(1, 2) = r;
  u(2, 1) = r;
  u(2, 2) = -r;
  u(3, 3) = 1;
  const MatrixXc t = u * h * u.adjoint();
  for (int i = 0; i < 4; ++i)
    if (i != 2) {
      EXPECT_LT(std::abs(t(2, i)), 1e-14);
      EXPECT_LT(std::abs(t(i, 2)), 1e-14);
    }
  EXPECT_NEAR(t(2, 2).real(), v * dk, 1e-14);
  const MatrixXc s3 = symmetric3_matrix(g, v * dk, 3.0);
  const int keep[3] = {0, 1, 3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(t(keep[i], keep[j]) - s3(i, j)), 1e-14);
}

TEST(GenericCo, ZeroCouplingIsDiagonal) {
  const MatrixXc h = generic_co_matrix(0.0, 1.0, 0.5, 2.0);
  EXPECT_EQ((h - MatrixXc(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(h(0, 0).real(), 3.0);
}

TEST(GenericCo, ExchangeSymmetry) {
  const MatrixXc h = generic_co_matrix(0.8, 1.1, 0.3, 4.0);
  Eigen::PermutationMatrix<4> p;
  p.indices() << 0, 2, 1, 3;
  const MatrixXc s = p * h * p.transpose();
  EXPECT_EQ((s - h).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GenericCo, BlockadedBranchPerturbative) {
  const double g = 0.1;
  for (double vdk : {10.0 * g, 30.0 * g, 100.0 * g}) {
    const MatrixXc h = generic_co_matrix(g, 1.0, vdk, 0.0).bottomRightCorner(3, 3);
    const auto w = sorted_real_eigs(h);
    const double expect = -2.0 * g * g / vdk;
    EXPECT_NEAR(w[0] / expect, 1.0, 5.0 * std::pow(g / vdk, 2) + 1e-12);
  }
}

TEST(StoredGate, Structure) {
  const MatrixXc h = stored_gate_matrix(0.5, 7.0);
  EXPECT_EQ(h(0, 0), cd(7.0, 0.0));
  EXPECT_EQ(h(0, 1), cd(0.5, 0.0));
  EXPECT_EQ(h(1, 1), cd(0.0, 0.0));
  const MatrixXc z = stored_gate_matrix(0.0, 7.0);
  EXPECT_EQ(z(0, 1), cd(0.0, 0.0));
}

TEST(StoredGate, RabiWithoutInteraction) {
  const double g = 1.7;
  for (double t : {0.1, 0.5, 1.3}) {
    const MatrixXc u = expm_minus_i(stored_gate_matrix(g, 0.0), t);
    EXPECT_NEAR(std::norm(u(1, 1)), std::pow(std::cos(g * t), 2), 1e-13);
    EXPECT_NEAR(std::norm(u(0, 1)), std::pow(std::sin(g * t), 2), 1e-13);
    EXPECT_NEAR(u(0, 1).imag(), -std::sin(g * t), 1e-13);
  }
}

TEST(StoredGate, OffResonantTransferBound) {
  const double g = 1.0, V = 40.0;
  const double bound = 4 * g * g / (V * V + 4 * g * g);
  double mx = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const MatrixXc u = expm_minus_i(stored_gate_matrix(g, V), 0.002 * i);
    mx = std::max(mx, std::norm(u(0, 1)));
  }
  EXPECT_LE(mx, bound * (1 + 1e-9));
  EXPECT_GT(mx, 0.95 * bound);
}

TEST(Symmetric3, BlockadedRabiAtEnhancedRate) {
  const double g = 0.6;
  const MatrixXc h = symmetric3_matrix(g, 0.0, 0.0).bottomRightCorner(2, 2);
  for (double t : {0.2, 0.7, 1.1}) {
    const MatrixXc u = expm_minus_i(h, t);
    EXPECT_NEAR(std::norm(u(0, 1)), std::pow(std::sin(std::sqrt(2.0) * g * t), 2), 1e-13);
  }
}

TEST(Symmetric3, ResonantEigenvalues) {
  const double g = 0.45;
  const auto w = sorted_real_eigs(symmetric3_matrix(g, 0.0, 0.0));
  EXPECT_NEAR(w[0], -2 * g, 1e-13);
  EXPECT_NEAR(w[1], 0.0, 1e-13);
  EXPECT_NEAR(w[2], 2 * g, 1e-13);
}

TEST(Symmetric3, ZeroCouplingDiagonalAndAsymmetryRejected) {
  const MatrixXc h = symmetric3_matrix(0.0, 0.4, 2.0);
  EXPECT_EQ((h - MatrixXc(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(symmetric3_matrix(1.0, 0.9, 0.1, -0.1, 0.0), ConfigError);
  EXPECT_THROW(symmetric3_matrix(1.0, 1.0, 0.1, 0.1, 0.0), ConfigError);
}

TEST(EitFull16, DecoupledDarkStateHasZeroEigenvalue) {
  PhysicsParams p = small_params();
  const MatrixXc h = eit_full16_matrix(p, 0.0, 0.0, 0.0, 0.0);
  const double th = mixing_angle(p.g_p, p.omega1);
  VectorXc d = VectorXc::Zero(4);
  d(0) = std::cos(th);
  d(2) = -std::sin(th);
  const MatrixXc b = eit_single_block(p, 0.0);
  EXPECT_LT((b * d).norm(), 1e-12);
  VectorXc dd(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) dd(4 * i + j) = d(i) * d(j);
  EXPECT_LT((h * dd).norm(), 1e-12);
}

TEST(EitFull16, HermitianWithoutLoss) {
  PhysicsParams p = small_params();
  p.gamma = 0.0;
  const MatrixXc h = eit_full16_matrix(p, 0.3, 0.5, 0.2, 7.0);
  EXPECT_EQ((h - h.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EitFull16, LossOnIntermediateStateComponents) {
  PhysicsParams p = small_params();
  const MatrixXc h = eit_full16_matrix(p, 0.3, 0.5, 0.0, 7.0);
  expect_loss_structure(h);
  const std::vector<int> lossy = {1, 4, 5, 6, 7, 9, 13};
  for (int i = 0; i < 16; ++i) {
    const double im = h(i, i).imag();
    const bool is_lossy = std::find(lossy.begin(), lossy.end(), i) != lossy.end();
    if (!is_lossy) EXPECT_EQ(im, 0.0) << i;
    else if (i == 5) EXPECT_DOUBLE_EQ(im, -2.0 * p.gamma);
    else EXPECT_DOUBLE_EQ(im, -p.gamma) << i;
  }
}

TEST(EitFull16, InteractionOnSSOnly) {
  PhysicsParams p = small_params();
  const MatrixXc d = eit_full16_matrix(p, 0.3, 0.3, 0.0, 5.0) - eit_full16_matrix(p, 0.3, 0.3, 0.0, 0.0);
  EXPECT_EQ(d(10, 10), cd(5.0, 0.0));
  EXPECT_EQ(d.cwiseAbs().sum(), 5.0);
}

TEST(EitFull16, ParticleSwapSymmetry) {
  PhysicsParams p = small_params();
  const MatrixXc h = eit_full16_matrix(p, 0.4, 0.4, 0.1, 0.0);
  Eigen::PermutationMatrix<16> s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s.indices()(4 * i + j) = 4 * j + i;
  EXPECT_LT((s * h * s.transpose() - h).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EitFull16, ModelVelocities) {
  EitFullConfig cfg;
  cfg.params = small_params();
  const ModelSpec m = make_eit_full16(cfg);
  ASSERT_EQ(m.size(), 16u);
  EXPECT_EQ(m.labels[10], "SS");
  const double vb = dark_group_velocity(cfg.params, cfg.params.omega1);
  const double c = cfg.params.c;
  const std::vector<double> v1 = {c, c, c, c, 0, 0, 0, 0, 0, 0, 0, 0, vb, vb, vb, vb};
  const std::vector<double> v2 = {-c, 0, 0, -vb, -c, 0, 0, -vb, -c, 0, 0, -vb, -c, 0, 0, -vb};
  for (int i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(m.v1[i], v1[i]);
    EXPECT_DOUBLE_EQ(m.v2[i], v2[i]);
  }
  EXPECT_EQ(m.weight[10], 1.0);
}

TEST(EitAtomic6, DecoupledDarkStates) {
  PhysicsParams p = small_params();
  const MatrixXc h = eit_atomic6_matrix(p, 0.0, 0.0, 0.0);
  EXPECT_EQ(h.block(0, 3, 3, 3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(std::abs(h(0, 0)), 0.0);
  EXPECT_EQ(std::abs(h(3, 3)), 0.0);
  EXPECT_EQ(h.row(0).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(h.row(3).cwiseAbs().sum(), 0.0);
}

TEST(EitAtomic6, SlowLightEffectiveBlock) {
  PhysicsParams p;
  p.omega2 = 0.9 * p.omega1;
  const double g = mhz(1.4), k = 0.05;
  const MatrixXc h = eit_atomic6_matrix(p, g, k, 0.0);
  const double th1 = mixing_angle(p.g_p, p.omega1), th2 = mixing_angle(p.g_p, p.omega2);
  MatrixXc eff(2, 2);
  eff << p.c * k * std::pow(std::cos(th1), 2), g, g, p.c * k * std::pow(std::cos(th2), 2);
  Eigen::ComplexEigenSolver<MatrixXc> full(h);
  const auto we = sorted_real_eigs(eff);
  for (double target : we) {
    double best = 1e300;
    for (int i = 0; i < 6; ++i) best = std::min(best, std::abs(full.eigenvalues()(i) - target));
    EXPECT_LT(best, 5e-3 * std::max(std::abs(target), g));
  }
}

TEST(EitAtomic6, ReducedIsLeadingBlock) {
  PhysicsParams p = small_params();
  const MatrixXc h = eit_atomic6_matrix(p, 0.2, 0.1, 3.0);
  EXPECT_EQ((eit_reduced4_matrix(p, 0.2, 0.1, 3.0) - h.topLeftCorner(4, 4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Builders, LossStructureOnRandomParameters) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    PhysicsParams p = small_params();
    p.gamma = u(rng);
    p.gamma_r = u(rng) * 0.1;
    p.delta = u(rng) - 1.5;
    expect_loss_structure(eit_full16_matrix(p, u(rng), u(rng), p.delta, u(rng) * 10));
    expect_loss_structure(eit_atomic6_matrix(p, u(rng), u(rng) - 1.5, u(rng) * 10));
    const MatrixXc g4 = generic_counter_matrix(u(rng), u(rng), 1, 1, u(rng), -u(rng), u(rng));
    EXPECT_TRUE(is_hermitian(g4));
    EXPECT_TRUE(is_hermitian(generic_co_matrix(u(rng), 1, u(rng), u(rng))));
  }
}

TEST(Builders, Deterministic) {
  PhysicsParams p = small_params();
  const MatrixXc a = eit_full16_matrix(p, 0.3, 0.2, 0.1, 4.0);
  const MatrixXc b = eit_full16_matrix(p, 0.3, 0.2, 0.1, 4.0);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(cd) * 256), 0);
}

TEST(ModelFactories, FactorizedMatchesDirectMatrix) {
  GenericCounterConfig cfg;
  cfg.g_plus = CouplingSchedule::constant(0.4);
  cfg.g_minus = CouplingSchedule::constant(0.7);
  cfg.v_plus = 1.5;
  cfg.v_minus = 2.5;
  cfg.dk_plus = 0.3;
  cfg.dk_minus = -0.2;
  cfg.potential = {100.0, 1.0, 1.0};
  const ModelSpec m = make_generic_counter(cfg);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"a+a-", "a+b-", "b+a-", "b+b-"}));
  const MatrixXc direct = generic_counter_matrix(0.4, 0.7, 1.5, 2.5, 0.3, -0.2, 100.0 / 2.0);
  EXPECT_LT((m.local_matrix(1.0, 0.0, 0.0) - direct).cwiseAbs().maxCoeff(), 1e-14);

  const ModelSpec co = make_generic_co(CouplingSchedule::constant(0.4), 1.2, 0.5, {});
  EXPECT_LT((co.coupling(0.0) - generic_co_matrix(0.4, 1.2, 0.5, 0.0)).cwiseAbs().maxCoeff(), 1e-14);

  const ModelSpec sg = make_stored_gate(CouplingSchedule::constant(0.4), 1.0, 0.0, {});
  EXPECT_LT((sg.coupling(0.0) - stored_gate_matrix(0.4, 0.0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RotatingFrame, IdentityRoundTripAndModulus) {
  const Grid1D g = Grid1D::centered(16, 8.0);
  TwoPhotonState st({"a+a-", "a+b-", "b+a-", "b+b-"}, g, g);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (auto& c : st.comps)
    for (auto& v : c) v = cd(d(rng), d(rng));
  const TwoPhotonState same = rotating_frame(st, 0.0, 0.0, FrameDirection::ToRotating);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(same.comps[c], st.comps[c]);
  const TwoPhotonState r = rotating_frame(st, 0.7, -1.3, FrameDirection::ToRotating);
  const TwoPhotonState back = rotating_frame(r, 0.7, -1.3, FrameDirection::ToLab);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < st.points(); ++i) {
      EXPECT_LT(std::abs(back.comps[c][i] - st.comps[c][i]), 1e-14 * std::max(1.0, std::abs(st.comps[c][i])) * 4);
      EXPECT_NEAR(std::abs(r.comps[c][i]), std::abs(st.comps[c][i]), 1e-14 * 4);
    }
  TwoPhotonState bad({"EE"}, g, g);
  EXPECT_THROW(rotating_frame(bad, 0.1, 0.1, FrameDirection::ToLab), ConfigError);
}
