#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "gaugekit/fft.hpp"
#include "gaugekit/grid.hpp"

namespace gaugekit {

/// Real samples on a Grid. The half spectrum is computed on first request and
/// cached until the samples are next modified through a non-const accessor.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid) : grid_(grid), values_(grid.sites(), 0.0) {}

  ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.sites()) {
      throw Error(ErrorCode::InvalidArgument, "sample count does not match grid");
    }
  }

  template <typename Fn>
  static ScalarField from_function(const Grid& grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t s = 0; s < grid.sites(); ++s) f.values_[s] = fn(grid.position(s));
    return f;
  }

  static ScalarField from_spectrum(const Grid& grid, const Spectrum& spectrum) {
    return ScalarField(grid, inverse_fft(grid, spectrum));
  }

  ScalarField(const ScalarField& o) : grid_(o.grid_), values_(o.values_), spectrum_(o.cached()) {}
  ScalarField(ScalarField&& o) noexcept
      : grid_(o.grid_), values_(std::move(o.values_)), spectrum_(std::move(o.spectrum_)) {}
  ScalarField& operator=(const ScalarField& o) {
    if (this != &o) {
      grid_ = o.grid_;
      values_ = o.values_;
      auto s = o.cached();
      std::lock_guard lock(*mutex_);
      spectrum_ = std::move(s);
    }
    return *this;
  }
  ScalarField& operator=(ScalarField&& o) noexcept {
    grid_ = o.grid_;
    values_ = std::move(o.values_);
    spectrum_ = std::move(o.spectrum_);
    return *this;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t s) const { return values_[s]; }

  /// Writable samples; drops the cached spectrum.
  std::span<double> mutable_values() {
    invalidate();
    return values_;
  }

  void set(std::size_t s, double v) {
    invalidate();
    values_[s] = v;
  }

  const Spectrum& spectrum() const {
    std::lock_guard lock(*mutex_);
    if (!spectrum_) spectrum_ = std::make_shared<const Spectrum>(forward_fft(grid_, values_));
    return *spectrum_;
  }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    invalidate();
    for (std::size_t s = 0; s < values_.size(); ++s) values_[s] += o.values_[s];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    invalidate();
    for (std::size_t s = 0; s < values_.size(); ++s) values_[s] -= o.values_[s];
    return *this;
  }
  ScalarField& operator*=(double a) {
    invalidate();
    for (double& v : values_) v *= a;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

 private:
  std::shared_ptr<const Spectrum> cached() const {
    std::lock_guard lock(*mutex_);
    return spectrum_;
  }
  void invalidate() {
    std::lock_guard lock(*mutex_);
    spectrum_.reset();
  }

  Grid grid_;
  std::vector<double> values_;
  mutable std::shared_ptr<const Spectrum> spectrum_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

/// Real 3-vector samples on a Grid, stored as three Cartesian component fields.
class VectorField {
 public:
  explicit VectorField(const Grid& grid) : c_{ScalarField(grid), ScalarField(grid), ScalarField(grid)} {}

  VectorField(ScalarField x, ScalarField y, ScalarField z) : c_{std::move(x), std::move(y), std::move(z)} {
    require_same_grid(c_[0].grid(), c_[1].grid());
    require_same_grid(c_[0].grid(), c_[2].grid());
  }

  template <typename Fn>
  static VectorField from_function(const Grid& grid, Fn&& fn) {
    VectorField f(grid);
    std::array<std::span<double>, 3> out{f.c_[0].mutable_values(), f.c_[1].mutable_values(),
                                         f.c_[2].mutable_values()};
    for (std::size_t s = 0; s < grid.sites(); ++s) {
      const Vec3 v = fn(grid.position(s));
      for (std::size_t a = 0; a < 3; ++a) out[a][s] = v[a];
    }
    return f;
  }

  const Grid& grid() const { return c_[0].grid(); }
  std::size_t size() const { return c_[0].size(); }

  const ScalarField& operator[](std::size_t a) const { return c_[a]; }
  ScalarField& operator[](std::size_t a) { return c_[a]; }

  Vec3 at(std::size_t s) const { return {c_[0][s], c_[1][s], c_[2][s]}; }

  void set(std::size_t s, const Vec3& v) {
    for (std::size_t a = 0; a < 3; ++a) c_[a].set(s, v[a]);
  }

  bool all_finite() const { return c_[0].all_finite() && c_[1].all_finite() && c_[2].all_finite(); }

  VectorField& operator+=(const VectorField& o) {
    for (std::size_t a = 0; a < 3; ++a) c_[a] += o.c_[a];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (std::size_t a = 0; a < 3; ++a) c_[a] -= o.c_[a];
    return *this;
  }
  VectorField& operator*=(double s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
  friend VectorField operator*(VectorField a, double s) { return a *= s; }

 private:
  std::array<ScalarField, 3> c_;
};

}  // namespace gaugekit
