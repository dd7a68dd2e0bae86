#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pbsim/spectral.hpp"
#include "pbsim/state.hpp"

using namespace pbsim;

namespace {

TwoPhotonState random_state(std::size_t n1, std::size_t n2, unsigned seed) {
  TwoPhotonState st({"a+a-", "a+b-", "b+a-", "b+b-"}, Grid1D::centered(n1, 10.0),
                    Grid1D::centered(n2, 20.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  for (auto& c : st.comps)
    for (auto& v : c) v = cd(d(rng), d(rng));
  return st;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(TwoPhotonState, LayoutIsZ1Fastest) {
  TwoPhotonState st({"x"}, Grid1D::centered(4, 4.0), Grid1D::centered(8, 8.0));
  st.at(0, 3, 2) = 5.0;
  EXPECT_EQ(st.comps[0][2 * 4 + 3], cd(5.0, 0.0));
  EXPECT_EQ(st.points(), 32u);
}

TEST(TwoPhotonState, NormIncludesCellArea) {
  TwoPhotonState st({"a", "b"}, Grid1D::centered(8, 4.0), Grid1D::centered(8, 2.0));
  st["a"][0] = 2.0;
  st["b"][5] = cd(0.0, 1.0);
  EXPECT_DOUBLE_EQ(st.norm(), 5.0 * 0.5 * 0.25);
  EXPECT_THROW(st.index_of("c"), ConfigError);
}

TEST(TwoPhotonState, ProductStateNorm) {
  const Grid1D g = Grid1D::centered(64, 40.0);
  TwoPhotonState st({"aa"}, g, g);
  const auto h = gaussian_pulse(g, {0.0, 3.0, 0.4});
  st.set_product("aa", h, h);
  EXPECT_NEAR(st.norm(), 1.0, 1e-12);
}

TEST(Snapshot, RoundTripIsBitExact) {
  const TwoPhotonState st = random_state(8, 16, 3);
  const std::string path = temp_path("pbsim_roundtrip.pbsim");
  write_snapshot(path, st);
  const TwoPhotonState back = read_snapshot(path, &st.grid1, &st.grid2);
  EXPECT_EQ(back.labels, st.labels);
  for (std::size_t c = 0; c < st.size(); ++c)
    for (std::size_t i = 0; i < st.points(); ++i) {
      EXPECT_EQ(back.comps[c][i].real(), st.comps[c][i].real());
      EXPECT_EQ(back.comps[c][i].imag(), st.comps[c][i].imag());
    }
  std::remove(path.c_str());
}

TEST(Snapshot, HeaderBytes) {
  TwoPhotonState st({"SS"}, Grid1D::centered(2, 1.0), Grid1D::centered(4, 1.0));
  st.comps[0][1] = cd(1.5, -2.0);
  const std::string path = temp_path("pbsim_header.pbsim");
  write_snapshot(path, st);
  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::vector<unsigned char> head = {'P', 'B', 'S', 'I', 'M', '1', 0,  1, 0, 0, 0,
                                           2,   0,   0,   0,   4,   0,   0,  0, 2, 0, 0,
                                           0,   'S', 'S'};
  ASSERT_EQ(b.size(), head.size() + 8 * 16);
  EXPECT_TRUE(std::equal(head.begin(), head.end(), b.begin()));
  double re, im;
  std::memcpy(&re, &b[head.size() + 16], 8);
  std::memcpy(&im, &b[head.size() + 24], 8);
  EXPECT_EQ(re, 1.5);
  EXPECT_EQ(im, -2.0);
  std::remove(path.c_str());
}

TEST(Snapshot, RejectsForeignFiles) {
  const std::string path = temp_path("pbsim_bad.pbsim");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTASNAPSHOT";
  }
  EXPECT_THROW(read_snapshot(path), IoError);
  EXPECT_THROW(read_snapshot(temp_path("pbsim_missing_file.pbsim")), IoError);
  std::remove(path.c_str());
}

TEST(Spectral, WavenumberOrder) {
  const auto k = wavenumbers(Grid1D::centered(8, kTwoPi));
  const std::vector<double> expect = {0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(k[i], expect[i]);
}

TEST(Spectral, Fft2RoundTrip) {
  TwoPhotonState st = random_state(16, 32, 11);
  auto a = st.comps[0];
  fft2(a, 16, 32, false);
  fft2(a, 16, 32, true);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - st.comps[0][i]), 1e-13);
}

TEST(Spectral, Fft2MatchesDirectSum) {
  const std::size_t n1 = 4, n2 = 8;
  TwoPhotonState st = random_state(n1, n2, 5);
  auto a = st.comps[1];
  fft2(a, n1, n2, false);
  for (std::size_t q2 = 0; q2 < n2; ++q2)
    for (std::size_t q1 = 0; q1 < n1; ++q1) {
      cd s(0.0, 0.0);
      for (std::size_t j2 = 0; j2 < n2; ++j2)
        for (std::size_t j1 = 0; j1 < n1; ++j1)
          s += st.comps[1][j2 * n1 + j1] *
               std::polar(1.0, -kTwoPi * (double(q1 * j1) / n1 + double(q2 * j2) / n2));
      EXPECT_LT(std::abs(a[q2 * n1 + q1] - s), 1e-12);
    }
}

TEST(Spectral, DerivativeWavenumbersDropNyquist) {
  const auto k = derivative_wavenumbers(Grid1D::centered(8, kTwoPi));
  EXPECT_EQ(k[4], 0.0);
  EXPECT_EQ(k[3], 3.0);
  EXPECT_EQ(k[5], -3.0);
}
