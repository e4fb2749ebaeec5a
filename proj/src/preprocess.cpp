#include "radfid/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "radfid/error.hpp"

namespace radfid {

Volume minmax_normalize(const Volume& v) {
  validate_grid(v);
  Volume out = v;
  out.intensity_unit = "normalized";
  const double lo = static_cast<double>(v.voxels.minCoeff());
  const double hi = static_cast<double>(v.voxels.maxCoeff());
  const double range = hi - lo;
  if (range <= 0.0) {
    out.voxels.setZero();
    return out;
  }
  for (std::int64_t f = 0; f < v.voxels.size(); ++f)
    out.voxels[f] = static_cast<float>((static_cast<double>(v.voxels[f]) - lo) / range);
  return out;
}

template <typename Scalar>
Grid3<Scalar> crop(const Grid3<Scalar>& v, const CropSpec& spec) {
  validate_grid(v);
  if ((spec.out_dims <= 0).any()) throw ValidationError("crop out_dims must be positive");
  Eigen::Array3i corner;
  for (int a = 0; a < 3; ++a) {
    corner[a] = spec.center_voxel[a] - spec.out_dims[a] / 2;
    if (corner[a] < 0 || corner[a] + spec.out_dims[a] > v.dims[a])
      throw ValidationError("crop box out of bounds on axis " + std::to_string(a) +
                            " (corner " + std::to_string(corner[a]) + ", extent " +
                            std::to_string(spec.out_dims[a]) + ", dim " +
                            std::to_string(v.dims[a]) + ")");
  }
  Grid3<Scalar> out = make_grid<Scalar>(spec.out_dims, v.spacing_mm, v.origin_mm);
  out.intensity_unit = v.intensity_unit;
  for (int a = 0; a < 3; ++a) out.origin_mm[a] += corner[a] * v.spacing_mm[a];
  for (int k = 0; k < out.dims[2]; ++k)
    for (int j = 0; j < out.dims[1]; ++j)
      for (int i = 0; i < out.dims[0]; ++i)
        out(i, j, k) = v(i + corner[0], j + corner[1], k + corner[2]);
  return out;
}

namespace {

inline double continuous_index(int out_index, double out_spacing, double in_spacing) {
  return (out_index + 0.5) * out_spacing / in_spacing - 0.5;
}

}  // namespace

template <typename Scalar>
Grid3<Scalar> resample(const Grid3<Scalar>& v, const Eigen::Array3i& out_dims,
                       const Eigen::Array3d& out_spacing, Interp mode) {
  validate_grid(v);
  if ((out_dims <= 0).any()) throw ValidationError("resample out_dims must be positive");
  if ((out_spacing <= 0.0).any()) throw ValidationError("resample out_spacing must be positive");
  if (std::is_integral_v<Scalar> && mode == Interp::trilinear)
    throw ValidationError("trilinear resampling is not defined for label grids; use nearest");

  Grid3<Scalar> out = make_grid<Scalar>(out_dims, out_spacing, v.origin_mm);
  out.intensity_unit = v.intensity_unit;

  // Per-axis continuous source indices, clamped so boundary samples replicate.
  std::array<std::vector<double>, 3> u;
  for (int a = 0; a < 3; ++a) {
    u[a].resize(out_dims[a]);
    for (int i = 0; i < out_dims[a]; ++i) {
      const double c = continuous_index(i, out_spacing[a], v.spacing_mm[a]);
      u[a][i] = std::clamp(c, 0.0, static_cast<double>(v.dims[a] - 1));
    }
  }

  if (mode == Interp::nearest) {
    for (int k = 0; k < out_dims[2]; ++k) {
      const int sk = static_cast<int>(std::lround(u[2][k]));
      for (int j = 0; j < out_dims[1]; ++j) {
        const int sj = static_cast<int>(std::lround(u[1][j]));
        for (int i = 0; i < out_dims[0]; ++i) {
          const int si = static_cast<int>(std::lround(u[0][i]));
          out(i, j, k) = v(std::min(si, v.dims[0] - 1), std::min(sj, v.dims[1] - 1),
                           std::min(sk, v.dims[2] - 1));
        }
      }
    }
    return out;
  }

  for (int k = 0; k < out_dims[2]; ++k) {
    const double uz = u[2][k];
    const int k0 = static_cast<int>(uz);
    const int k1 = std::min(k0 + 1, v.dims[2] - 1);
    const double fz = uz - k0;
    for (int j = 0; j < out_dims[1]; ++j) {
      const double uy = u[1][j];
      const int j0 = static_cast<int>(uy);
      const int j1 = std::min(j0 + 1, v.dims[1] - 1);
      const double fy = uy - j0;
      for (int i = 0; i < out_dims[0]; ++i) {
        const double ux = u[0][i];
        const int i0 = static_cast<int>(ux);
        const int i1 = std::min(i0 + 1, v.dims[0] - 1);
        const double fx = ux - i0;
        const double c00 = v(i0, j0, k0) + fx * (static_cast<double>(v(i1, j0, k0)) - v(i0, j0, k0));
        const double c10 = v(i0, j1, k0) + fx * (static_cast<double>(v(i1, j1, k0)) - v(i0, j1, k0));
        const double c01 = v(i0, j0, k1) + fx * (static_cast<double>(v(i1, j0, k1)) - v(i0, j0, k1));
        const double c11 = v(i0, j1, k1) + fx * (static_cast<double>(v(i1, j1, k1)) - v(i0, j1, k1));
        const double c0 = c00 + fy * (c10 - c00);
        const double c1 = c01 + fy * (c11 - c01);
        out(i, j, k) = static_cast<Scalar>(c0 + fz * (c1 - c0));
      }
    }
  }
  return out;
}

template Grid3<float> crop(const Grid3<float>&, const CropSpec&);
template Grid3<std::uint8_t> crop(const Grid3<std::uint8_t>&, const CropSpec&);
template Grid3<float> resample(const Grid3<float>&, const Eigen::Array3i&, const Eigen::Array3d&,
                               Interp);
template Grid3<std::uint8_t> resample(const Grid3<std::uint8_t>&, const Eigen::Array3i&,
                                      const Eigen::Array3d&, Interp);

}  // namespace radfid
