#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "radfid/grid.hpp"

namespace radfid {

// Borrowed view of the mask==1 voxels of a validated volume/mask pair.
// The parent volume and mask must outlive the Roi.
struct Roi {
  const Volume* parent = nullptr;
  const Mask* mask = nullptr;
  std::vector<std::int64_t> voxel_list;  // ascending flat indices
  Eigen::ArrayXd intensities;            // parent values at voxel_list

  std::int64_t size() const { return static_cast<std::int64_t>(voxel_list.size()); }
};

Roi build_roi(const Volume& v, const Mask& m);

// Fixed-bin-number discretization over the ROI intensity range:
//   bin(x) = min(Ng, 1 + floor(Ng * (x - min) / (max - min)))
// A constant ROI lands entirely in bin 1. Texture matrices index grey levels
// 1..n_bins even when upper bins are unoccupied, so Ng-dependent
// normalizations are stable across ROIs discretized with the same n_bins.
struct DiscretizedRoi {
  const Roi* roi = nullptr;
  int n_bins = 0;
  std::vector<int> bin_index;  // 1..n_bins, parallel to roi->voxel_list
  double min_intensity = 0.0;
  double max_intensity = 0.0;
  double bin_width = 0.0;  // (max - min) / n_bins; 0 for a constant ROI
};

DiscretizedRoi discretize_fbn(const Roi& roi, int n_bins);
// The result borrows the Roi, so a temporary argument would dangle.
DiscretizedRoi discretize_fbn(Roi&& roi, int n_bins) = delete;

}  // namespace radfid
