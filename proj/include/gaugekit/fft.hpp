#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "gaugekit/grid.hpp"

namespace gaugekit {

using Complex = std::complex<double>;

/// Half spectrum of a real lattice field, FFTW r2c layout: index kx + (n/2+1)(ky + n kz).
using Spectrum = std::vector<Complex>;

namespace detail {

// Aligned staging arrays for one lattice size, one set per thread.
struct FftBuffers {
  explicit FftBuffers(int n)
      : real(fftw_alloc_real(static_cast<std::size_t>(n) * n * n)),
        spectral(fftw_alloc_complex(static_cast<std::size_t>(n) * n * (n / 2 + 1))) {}
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
  ~FftBuffers() {
    fftw_free(real);
    fftw_free(spectral);
  }
  double* real;
  fftw_complex* spectral;
};

inline FftBuffers& buffers_for(int n) {
  thread_local std::map<int, std::unique_ptr<FftBuffers>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftBuffers>(n);
  return *slot;
}

// FFTW plans for one lattice size. Planning is serialized; execution through the
// new-array interface on the per-thread aligned buffers is thread-safe.
class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    FftBuffers scratch(n);
    forward_ = fftw_plan_dft_r2c_3d(n, n, n, scratch.real, scratch.spectral, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_3d(n, n, n, scratch.spectral, scratch.real, FFTW_ESTIMATE);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  void forward(std::span<const double> in, std::span<Complex> out) const {
    FftBuffers& buf = buffers_for(n_);
    std::copy(in.begin(), in.end(), buf.real);
    fftw_execute_dft_r2c(forward_, buf.real, buf.spectral);
    const auto* c = reinterpret_cast<const Complex*>(buf.spectral);
    std::copy(c, c + out.size(), out.begin());
  }

  void inverse(std::span<const Complex> in, std::span<double> out, double scale) const {
    FftBuffers& buf = buffers_for(n_);
    std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(buf.spectral));
    fftw_execute_dft_c2r(inverse_, buf.spectral, buf.real);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * buf.real[i];
  }

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline int& fft_thread_count() {
  static int threads = 1;
  return threads;
}

inline bool& fft_threads_ready() {
  static bool ready = false;
  return ready;
}

// Plans are keyed by (size, threads) and never destroyed, so references stay valid.
inline const FftPlans& plans_for(int n) {
  static std::map<std::pair<int, int>, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(planner_mutex());
  const int threads = fft_thread_count();
  auto& slot = cache[{n, threads}];
  if (!slot) {
    if (fft_threads_ready()) fftw_plan_with_nthreads(threads);
    slot = std::make_unique<FftPlans>(n);
  }
  return *slot;
}

}  // namespace detail

/// Unnormalized forward transform: F(k) = sum_x f(x) exp(-i k.x).
inline Spectrum forward_fft(const Grid& grid, std::span<const double> values) {
  Spectrum out(grid.spectral_sites());
  detail::plans_for(grid.n()).forward(values, out);
  return out;
}

/// Inverse of forward_fft including the 1/N^3 factor.
inline std::vector<double> inverse_fft(const Grid& grid, const Spectrum& spectrum) {
  std::vector<double> out(grid.sites());
  detail::plans_for(grid.n()).inverse(spectrum, out, 1.0 / static_cast<double>(grid.sites()));
  return out;
}

/// inverse_fft into caller storage of grid.sites() values.
inline void inverse_fft_into(const Grid& grid, const Spectrum& spectrum, std::span<double> out) {
  detail::plans_for(grid.n()).inverse(spectrum, out, 1.0 / static_cast<double>(grid.sites()));
}

/// Walks the stored half spectrum, handing each coefficient's flat index,
/// derivative wavevector (Nyquist components zeroed), full wavevector and the
/// multiplicity the coefficient carries in sums over the whole spectrum.
template <typename Fn>
void for_each_mode(const Grid& grid, Fn&& fn) {
  const int n = grid.n();
  const int nh = n / 2 + 1;
  std::vector<double> kap(n), wav(n);
  for (int m = 0; m < n; ++m) {
    kap[m] = grid.kappa(m);
    wav[m] = grid.wavenumber(m);
  }
  std::size_t idx = 0;
  for (int kz = 0; kz < n; ++kz) {
    for (int ky = 0; ky < n; ++ky) {
      for (int kx = 0; kx < nh; ++kx, ++idx) {
        const double weight = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
        fn(idx, Vec3{kap[kx], kap[ky], kap[kz]}, Vec3{wav[kx], wav[ky], wav[kz]}, weight);
      }
    }
  }
}

/// Number of FFTW threads used by transforms issued after this call.
inline void set_fft_threads(int threads) {
  std::lock_guard lock(detail::planner_mutex());
  if (!detail::fft_threads_ready()) detail::fft_threads_ready() = fftw_init_threads() != 0;
  detail::fft_thread_count() = detail::fft_threads_ready() ? std::max(1, threads) : 1;
}

}  // namespace gaugekit
