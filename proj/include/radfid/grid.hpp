#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>

#include "radfid/error.hpp"

namespace radfid {

// Dense axis-aligned 3D scalar grid. Voxels are stored x-fastest, z-slowest:
// flat = i + nx * (j + ny * k). Geometry follows the voxel-center convention:
// the center of voxel (i,j,k) lies at origin_mm + (index + 0.5) * spacing_mm.
template <typename Scalar>
struct Grid3 {
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Eigen::Array3i dims{0, 0, 0};
  Eigen::Array3d spacing_mm{1.0, 1.0, 1.0};
  Eigen::Array3d origin_mm{0.0, 0.0, 0.0};
  Storage voxels;
  std::string intensity_unit{"raw"};

  std::int64_t size() const {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
  }

  std::int64_t flat(int i, int j, int k) const {
    return i + static_cast<std::int64_t>(dims[0]) * (j + static_cast<std::int64_t>(dims[1]) * k);
  }

  Eigen::Array3i unflat(std::int64_t f) const {
    const int i = static_cast<int>(f % dims[0]);
    const int j = static_cast<int>((f / dims[0]) % dims[1]);
    const int k = static_cast<int>(f / (static_cast<std::int64_t>(dims[0]) * dims[1]));
    return {i, j, k};
  }

  Scalar operator()(int i, int j, int k) const { return voxels[flat(i, j, k)]; }
  Scalar& operator()(int i, int j, int k) { return voxels[flat(i, j, k)]; }
};

using Volume = Grid3<float>;
using Mask = Grid3<std::uint8_t>;

template <typename Scalar>
Grid3<Scalar> make_grid(const Eigen::Array3i& dims, const Eigen::Array3d& spacing_mm,
                        const Eigen::Array3d& origin_mm = Eigen::Array3d{0.0, 0.0, 0.0},
                        Scalar fill = Scalar{0}) {
  if ((dims <= 0).any()) throw ValidationError("grid dims must be positive");
  if ((spacing_mm <= 0.0).any()) throw ValidationError("grid spacing must be positive");
  Grid3<Scalar> g;
  g.dims = dims;
  g.spacing_mm = spacing_mm;
  g.origin_mm = origin_mm;
  g.voxels = Grid3<Scalar>::Storage::Constant(
      static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2], fill);
  return g;
}

// Zero-origin convenience with the fill value third.
template <typename Scalar>
Grid3<Scalar> make_grid(const Eigen::Array3i& dims, const Eigen::Array3d& spacing_mm,
                        Scalar fill) {
  return make_grid<Scalar>(dims, spacing_mm, Eigen::Array3d{0.0, 0.0, 0.0}, fill);
}

// Structural invariants shared by volumes and masks.
template <typename Scalar>
void validate_grid(const Grid3<Scalar>& g) {
  if ((g.dims <= 0).any()) throw ValidationError("grid dims must be positive");
  if ((g.spacing_mm <= 0.0).any()) throw ValidationError("grid spacing must be positive");
  if (g.voxels.size() != g.size())
    throw ValidationError("voxel count does not match dims");
}

inline constexpr double kSpacingToleranceMm = 1e-6;

// Success iff dims match exactly and spacing agrees within 1e-6 mm.
template <typename A, typename B>
void validate_pair(const Grid3<A>& a, const Grid3<B>& b) {
  if ((a.dims != b.dims).any())
    throw ValidationError("dimension mismatch: [" + std::to_string(a.dims[0]) + "," +
                          std::to_string(a.dims[1]) + "," + std::to_string(a.dims[2]) +
                          "] vs [" + std::to_string(b.dims[0]) + "," +
                          std::to_string(b.dims[1]) + "," + std::to_string(b.dims[2]) + "]");
  if (((a.spacing_mm - b.spacing_mm).abs() > kSpacingToleranceMm).any())
    throw ValidationError("spacing mismatch beyond 1e-6 mm tolerance");
}

inline std::int64_t mask_foreground_count(const Mask& m) {
  std::int64_t n = 0;
  for (std::int64_t f = 0; f < m.voxels.size(); ++f) n += (m.voxels[f] != 0);
  return n;
}

}  // namespace radfid
