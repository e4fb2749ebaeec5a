#include "radfid/roi.hpp"

#include <cmath>

namespace radfid {

Roi build_roi(const Volume& v, const Mask& m) {
  validate_grid(v);
  validate_grid(m);
  validate_pair(v, m);
  Roi roi;
  roi.parent = &v;
  roi.mask = &m;
  for (std::int64_t f = 0; f < m.voxels.size(); ++f)
    if (m.voxels[f] != 0) roi.voxel_list.push_back(f);
  if (roi.voxel_list.empty()) throw ValidationError("mask selects no voxels");
  roi.intensities.resize(static_cast<Eigen::Index>(roi.voxel_list.size()));
  for (std::size_t i = 0; i < roi.voxel_list.size(); ++i)
    roi.intensities[static_cast<Eigen::Index>(i)] = v.voxels[roi.voxel_list[i]];
  return roi;
}

DiscretizedRoi discretize_fbn(const Roi& roi, int n_bins) {
  if (n_bins < 2) throw ValidationError("discretization needs at least 2 bins");
  if (roi.size() == 0) throw ValidationError("cannot discretize an empty roi");
  DiscretizedRoi d;
  d.roi = &roi;
  d.n_bins = n_bins;
  d.min_intensity = roi.intensities.minCoeff();
  d.max_intensity = roi.intensities.maxCoeff();
  const double span = d.max_intensity - d.min_intensity;
  d.bin_width = span / n_bins;
  d.bin_index.resize(roi.voxel_list.size());
  for (std::size_t i = 0; i < d.bin_index.size(); ++i) {
    if (span == 0.0) {
      d.bin_index[i] = 1;
      continue;
    }
    const double x = roi.intensities[static_cast<Eigen::Index>(i)];
    const int b = 1 + static_cast<int>(std::floor(n_bins * (x - d.min_intensity) / span));
    d.bin_index[i] = b > n_bins ? n_bins : b;
  }
  return d;
}

}  // namespace radfid
