#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gaugekit/field.hpp"

namespace gaugekit {

/// GFK1 dump: "GFK1", u32 N, f64 L, u32 components (1 or 3), then f64 samples,
/// x-fastest with the component index innermost. All little-endian.
namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(ErrorCode::Io, "truncated field dump");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_gfk1(const std::string& path, const Grid& g, const std::vector<const ScalarField*>& comps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path);
  os.write("GFK1", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put_le<double>(os, g.length());
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(comps.size()));
  for (std::size_t s = 0; s < g.sites(); ++s) {
    for (const ScalarField* c : comps) put_le<double>(os, (*c)[s]);
  }
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace detail

inline void write_field(const std::string& path, const ScalarField& f) { detail::write_gfk1(path, f.grid(), {&f}); }

inline void write_field(const std::string& path, const VectorField& f) {
  detail::write_gfk1(path, f.grid(), {&f[0], &f[1], &f[2]});
}

struct FieldDump {
  Grid grid;
  int components = 1;
  std::vector<double> samples;  // GFK1 order

  ScalarField scalar() const {
    if (components != 1) throw Error(ErrorCode::Io, "dump holds a vector field");
    return ScalarField(grid, samples);
  }

  VectorField vector() const {
    if (components != 3) throw Error(ErrorCode::Io, "dump holds a scalar field");
    VectorField f(grid);
    for (std::size_t s = 0; s < grid.sites(); ++s) f.set(s, {samples[3 * s], samples[3 * s + 1], samples[3 * s + 2]});
    return f;
  }
};

inline FieldDump read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GFK1", 4) != 0) throw Error(ErrorCode::Io, "bad magic in " + path);
  const auto n = detail::get_le<std::uint32_t>(is);
  const auto length = detail::get_le<double>(is);
  const auto comps = detail::get_le<std::uint32_t>(is);
  if (comps != 1 && comps != 3) throw Error(ErrorCode::Io, "component count must be 1 or 3");
  FieldDump dump{Grid(static_cast<int>(n), length), static_cast<int>(comps), {}};
  dump.samples.resize(dump.grid.sites() * comps);
  for (double& v : dump.samples) v = detail::get_le<double>(is);
  return dump;
}

}  // namespace gaugekit
