// state.hpp - two-photon wavefunction container and the PBSIM1 snapshot format.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pbsim/core.hpp"

namespace pbsim {

enum class Frame { Lab, Rotating };

/// Named complex amplitude grids over (z1, z2), one per wavefunction component.
///
/// Component arrays use the z1-fastest layout: point (i1, i2) lives at
/// index i2 * n1 + i1.
struct TwoPhotonState {
  std::vector<std::string> labels;
  Grid1D grid1;
  Grid1D grid2;
  double time = 0.0;
  Frame frame = Frame::Rotating;
  std::vector<std::vector<cd>> comps;

  TwoPhotonState() = default;
  TwoPhotonState(std::vector<std::string> names, const Grid1D& g1, const Grid1D& g2)
      : labels(std::move(names)), grid1(g1), grid2(g2) {
    comps.assign(labels.size(), std::vector<cd>(g1.n * g2.n, cd(0.0, 0.0)));
  }

  std::size_t n1() const { return grid1.n; }
  std::size_t n2() const { return grid2.n; }
  std::size_t points() const { return grid1.n * grid2.n; }
  std::size_t size() const { return comps.size(); }
  double cell() const { return grid1.spacing() * grid2.spacing(); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ConfigError("unknown component '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  }
  bool has(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
  }

  std::vector<cd>& operator[](const std::string& label) { return comps[index_of(label)]; }
  const std::vector<cd>& operator[](const std::string& label) const {
    return comps[index_of(label)];
  }

  cd& at(std::size_t c, std::size_t i1, std::size_t i2) { return comps[c][i2 * grid1.n + i1]; }
  const cd& at(std::size_t c, std::size_t i1, std::size_t i2) const {
    return comps[c][i2 * grid1.n + i1];
  }

  double component_norm(std::size_t c) const {
    double s = 0.0;
    for (const auto& v : comps[c]) s += std::norm(v);
    return s * cell();
  }

  /// Total probability sum_c sum |psi_c|^2 dz1 dz2.
  double norm() const {
    double s = 0.0;
    for (std::size_t c = 0; c < comps.size(); ++c) s += component_norm(c);
    return s;
  }

  void set_product(const std::string& label, const std::vector<cd>& h1,
                   const std::vector<cd>& h2, cd scale = cd(1.0, 0.0)) {
    if (h1.size() != grid1.n || h2.size() != grid2.n)
      throw ConfigError("product factor does not match the grid");
    auto& c = (*this)[label];
    for (std::size_t i2 = 0; i2 < grid2.n; ++i2)
      for (std::size_t i1 = 0; i1 < grid1.n; ++i1) c[i2 * grid1.n + i1] = scale * h1[i1] * h2[i2];
  }

  void check_compatible(const TwoPhotonState& other) const {
    if (!(grid1 == other.grid1) || !(grid2 == other.grid2))
      throw ConfigError("mismatched grids");
  }
};

// ---------------------------------------------------------------------------
// PBSIM1 snapshots
// ---------------------------------------------------------------------------
//
// Layout (little endian):
//   "PBSIM1\0"                      7 bytes
//   u32 component count, u32 n1, u32 n2
//   per component: u32 byte length + UTF-8 name
//   per component: n1*n2 complex values as float64 (re, im), z1 fastest

inline constexpr std::array<char, 7> kSnapshotMagic = {'P', 'B', 'S', 'I', 'M', '1', '\0'};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xffu),
                              static_cast<unsigned char>((v >> 8) & 0xffu),
                              static_cast<unsigned char>((v >> 16) & 0xffu),
                              static_cast<unsigned char>((v >> 24) & 0xffu)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated snapshot header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const TwoPhotonState& state) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open snapshot for writing: " + path);
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put_u32(os, static_cast<std::uint32_t>(state.size()));
  detail::put_u32(os, static_cast<std::uint32_t>(state.n1()));
  detail::put_u32(os, static_cast<std::uint32_t>(state.n2()));
  for (const auto& name : state.labels) {
    detail::put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (const auto& comp : state.comps)
    for (const auto& v : comp) {
      detail::put_f64(os, v.real());
      detail::put_f64(os, v.imag());
    }
  if (!os) throw IoError("failed writing snapshot: " + path);
}

/// Reads a snapshot. The format stores no geometry, so the caller supplies
/// the grids (unit spacing at origin 0 when omitted).
inline TwoPhotonState read_snapshot(const std::string& path, const Grid1D* g1 = nullptr,
                                    const Grid1D* g2 = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open snapshot: " + path);
  std::array<char, 7> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kSnapshotMagic)
    throw IoError("not a PBSIM1 snapshot: " + path);
  const std::uint32_t count = detail::get_u32(is);
  const std::uint32_t n1 = detail::get_u32(is);
  const std::uint32_t n2 = detail::get_u32(is);
  if (count == 0 || count > 4096) throw IoError("implausible component count in " + path);
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < count; ++c) {
    const std::uint32_t len = detail::get_u32(is);
    if (len > 4096) throw IoError("implausible component name length in " + path);
    std::string s(len, '\0');
    if (!is.read(s.data(), len)) throw IoError("truncated component names in " + path);
    names.push_back(std::move(s));
  }
  Grid1D a = g1 ? *g1 : Grid1D(n1, static_cast<double>(n1), 0.0);
  Grid1D b = g2 ? *g2 : Grid1D(n2, static_cast<double>(n2), 0.0);
  if (a.n != n1 || b.n != n2) throw IoError("snapshot dimensions disagree with supplied grids");
  TwoPhotonState st(std::move(names), a, b);
  std::vector<unsigned char> buf(static_cast<std::size_t>(n1) * n2 * 16);
  for (auto& comp : st.comps) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw IoError("truncated amplitude data in " + path);
    for (std::size_t i = 0; i < comp.size(); ++i)
      comp[i] = cd(detail::get_f64(&buf[16 * i]), detail::get_f64(&buf[16 * i + 8]));
  }
  return st;
}

}  // namespace pbsim
