#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "radfid/roi.hpp"

namespace radfid {

// Feature IDs are frozen "<family>.<name>[.<aggregation>]" strings; the
// correlation and classification layers key on them. extract_all returns
// exactly these IDs in exactly this order.
struct FeatureVector {
  std::vector<std::string> ids;
  std::vector<double> values;

  double at(std::string_view id) const;
};

inline constexpr int kFeatureCount = 186;
inline constexpr int kDefaultBins = 32;

// Canonical ID lists. Families with averaged/merged aggregation interleave
// per name: "<name>.avg" then "<name>.merged".
const std::vector<std::string>& local_intensity_ids();     // 2
const std::vector<std::string>& intensity_stats_ids();     // 18
const std::vector<std::string>& intensity_histogram_ids(); // 23
const std::vector<std::string>& ivh_ids();                 // 7
const std::vector<std::string>& glcm_ids();                // 50
const std::vector<std::string>& glrlm_ids();               // 32
const std::vector<std::string>& glszm_ids();               // 16
const std::vector<std::string>& gldzm_ids();               // 16
const std::vector<std::string>& ngtdm_ids();               // 5
const std::vector<std::string>& ngldm_ids();               // 17
const std::vector<std::string>& feature_ids();             // all 186

// Mean intensity inside a 1 cm^3 sphere (radius ~6.2035 mm, voxel-center
// membership) at the brightest ROI voxel, and the maximum such sphere mean
// over all ROI voxels. Spheres may leave the ROI but positions outside the
// volume are excluded from the mean.
std::vector<double> local_intensity_features(const Roi& roi);

std::vector<double> intensity_stats_features(const Roi& roi);

std::vector<double> intensity_histogram_features(const DiscretizedRoi& droi);

// Intensity-volume histogram on the discretized fraction axis
// gamma(g) = (g-1)/(Ng-1); a constant ROI reports full volume coverage.
std::vector<double> ivh_features(const DiscretizedRoi& droi);

std::vector<double> cooccurrence_features(const DiscretizedRoi& droi);  // 50
std::vector<double> runlength_features(const DiscretizedRoi& droi);     // 32

enum class ZoneMetric { size, distance };
std::vector<double> zone_features(const DiscretizedRoi& droi, ZoneMetric metric);

std::vector<double> ngtdm_features(const DiscretizedRoi& droi);  // 5
std::vector<double> ngldm_features(const DiscretizedRoi& droi);  // 17

FeatureVector extract_all(const Volume& v, const Mask& m, int n_bins = kDefaultBins);

}  // namespace radfid
