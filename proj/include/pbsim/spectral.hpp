// spectral.hpp - FFTW-backed 2D transforms on (z1, z2) grids and the
// matching wavenumber axes.
//
// Layout: a component array of size n1*n2 stores point (i1, i2) at
// index i2*n1 + i1, i.e. z1 is the fastest-varying axis.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "pbsim/core.hpp"

namespace pbsim {

/// Angular wavenumbers in FFT order (0, 1, ..., n/2-1, -n/2, ..., -1) * 2pi/L.
inline std::vector<double> wavenumbers(const Grid1D& grid) {
  std::vector<double> k(grid.n);
  const double dk = kTwoPi / grid.length;
  const long n = static_cast<long>(grid.n);
  for (long i = 0; i < n; ++i) {
    const long m = i < n / 2 ? i : i - n;
    k[static_cast<std::size_t>(i)] = dk * static_cast<double>(m);
  }
  return k;
}

/// Wavenumbers for first-derivative (advection) operators: as above but with
/// the unpaired Nyquist mode set to zero, so that translation stays a real
/// operator and time reversal is exact on the grid.
inline std::vector<double> derivative_wavenumbers(const Grid1D& grid) {
  std::vector<double> k = wavenumbers(grid);
  k[grid.n / 2] = 0.0;
  return k;
}

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

// FFTW's planner is not thread-safe; plan creation is serialized here while
// execution through fftw_execute_dft is reentrant on distinct arrays.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  const PlanPair& get(std::size_t n0, std::size_t n1, std::size_t howmany) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(n0, n1, howmany);
    auto it = plans_.find(key);
    if (it != plans_.end()) return *it->second;
    auto pair = std::make_unique<PlanPair>();
    std::vector<fftw_complex> scratch(n0 * n1 * howmany);
    int dims[2] = {static_cast<int>(n0), static_cast<int>(n1)};
    const int dist = static_cast<int>(n0 * n1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int rank = n0 == 1 ? 1 : 2;
    int* d = n0 == 1 ? dims + 1 : dims;
    pair->forward = fftw_plan_many_dft(rank, d, static_cast<int>(howmany), scratch.data(),
                                       nullptr, 1, dist, scratch.data(), nullptr, 1, dist,
                                       FFTW_FORWARD, flags);
    pair->backward = fftw_plan_many_dft(rank, d, static_cast<int>(howmany), scratch.data(),
                                        nullptr, 1, dist, scratch.data(), nullptr, 1, dist,
                                        FFTW_BACKWARD, flags);
    if (!pair->forward || !pair->backward) throw SolverError("FFTW plan creation failed");
    auto& ref = *pair;
    plans_.emplace(key, std::move(pair));
    return ref;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::unique_ptr<PlanPair>> plans_;
};

}  // namespace detail

/// In-place 2D DFT of an n1 x n2 array (z1 fastest). The inverse is normalized.
inline void fft2(std::complex<double>* data, std::size_t n1, std::size_t n2, bool inverse) {
  // FFTW takes row-major dims; with z1 fastest the slow axis is n2.
  const auto& plan = detail::PlanCache::instance().get(n2, n1, 1);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(inverse ? plan.backward : plan.forward, p, p);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n1 * n2);
    for (std::size_t i = 0; i < n1 * n2; ++i) data[i] *= s;
  }
}

inline void fft2(std::vector<std::complex<double>>& a, std::size_t n1, std::size_t n2,
                 bool inverse) {
  fft2(a.data(), n1, n2, inverse);
}

/// In-place 1D DFT. The inverse is normalized.
inline void fft1(std::vector<std::complex<double>>& a, bool inverse) {
  const auto& plan = detail::PlanCache::instance().get(1, a.size(), 1);
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(inverse ? plan.backward : plan.forward, p, p);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= s;
  }
}

}  // namespace pbsim
