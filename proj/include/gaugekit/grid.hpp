#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "gaugekit/error.hpp"
#include "gaugekit/vec3.hpp"

namespace gaugekit {

/// Periodic cubic lattice: n points per axis on a box of side `length`.
///
/// Site (i, j, k) sits at (i h, j h, k h) with h = length / n. Flat indices are
/// x-fastest: i + n (j + n k). All fields in the toolkit live on one Grid.
class Grid {
 public:
  Grid(int n, double length) : n_(n), length_(length) {
    if (n < 4 || n % 2 != 0) {
      throw Error(ErrorCode::InvalidGrid, "points per axis must be even and >= 4, got " + std::to_string(n));
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw Error(ErrorCode::InvalidGrid, "box length must be positive and finite");
    }
  }

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }
  double volume() const { return length_ * length_ * length_; }
  std::size_t sites() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  /// Number of stored complex coefficients of a real-to-complex transform.
  std::size_t spectral_sites() const { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(wrap(i)) +
           static_cast<std::size_t>(n_) * (static_cast<std::size_t>(wrap(j)) + static_cast<std::size_t>(n_) * wrap(k));
  }

  Vec3 position(int i, int j, int k) const {
    const double h = spacing();
    return {i * h, j * h, k * h};
  }

  Vec3 position(std::size_t flat) const {
    const auto n = static_cast<std::size_t>(n_);
    return position(static_cast<int>(flat % n), static_cast<int>((flat / n) % n), static_cast<int>(flat / (n * n)));
  }

  int wrap(int i) const {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }

  /// Shortest periodic displacement `to - from`, each component in [-L/2, L/2).
  Vec3 min_image(const Vec3& from, const Vec3& to) const {
    Vec3 d = to - from;
    for (std::size_t a = 0; a < 3; ++a) {
      d[a] -= length_ * std::floor(d[a] / length_ + 0.5);
    }
    return d;
  }

  /// Derivative wavenumber along one axis for FFT index m; zero at the Nyquist index.
  double kappa(int m) const {
    if (m == n_ / 2) return 0.0;
    const int signed_m = m < n_ / 2 ? m : m - n_;
    return 2.0 * M_PI * signed_m / length_;
  }

  /// Full (non-truncated) wavenumber along one axis for FFT index m.
  double wavenumber(int m) const {
    const int signed_m = m <= n_ / 2 ? m : m - n_;
    return 2.0 * M_PI * signed_m / length_;
  }

  /// Largest |kappa| over the lattice; sets the explicit time-step limit.
  double max_kappa() const { return std::sqrt(3.0) * 2.0 * M_PI * (n_ / 2 - 1) / length_; }

  friend bool operator==(const Grid& a, const Grid& b) { return a.n_ == b.n_ && a.length_ == b.length_; }

 private:
  int n_;
  double length_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

/// Ball-shaped integration region; membership is sharp (site inside or not).
struct Ball {
  Vec3 center;
  double radius = 0.0;
};

}  // namespace gaugekit
