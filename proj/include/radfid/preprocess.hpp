#pragma once

#include "radfid/grid.hpp"

namespace radfid {

struct CropSpec {
  Eigen::Array3i center_voxel{0, 0, 0};
  Eigen::Array3i out_dims{1, 1, 1};
};

enum class Interp { trilinear, nearest };

// Affine map of the full intensity range onto [0,1]; a constant volume maps
// to all zeros so downstream fidelity math never sees NaN.
Volume minmax_normalize(const Volume& v);

// Axis-aligned crop. The output corner is center_voxel - out_dims/2 (integer
// floor division); the requested box must lie fully inside the input — there
// is no implicit padding. Origin shifts by corner * spacing.
template <typename Scalar>
Grid3<Scalar> crop(const Grid3<Scalar>& v, const CropSpec& spec);

// Resamples onto a new grid sharing the input origin, voxel-center
// convention: output center i sits at origin + (i + 0.5) * out_spacing.
// Trilinear clamps samples at the boundary; nearest keeps label sets intact
// and is required for integral scalars.
template <typename Scalar>
Grid3<Scalar> resample(const Grid3<Scalar>& v, const Eigen::Array3i& out_dims,
                       const Eigen::Array3d& out_spacing, Interp mode);

extern template Grid3<float> crop(const Grid3<float>&, const CropSpec&);
extern template Grid3<std::uint8_t> crop(const Grid3<std::uint8_t>&, const CropSpec&);
extern template Grid3<float> resample(const Grid3<float>&, const Eigen::Array3i&,
                                      const Eigen::Array3d&, Interp);
extern template Grid3<std::uint8_t> resample(const Grid3<std::uint8_t>&, const Eigen::Array3i&,
                                             const Eigen::Array3d&, Interp);

}  // namespace radfid
