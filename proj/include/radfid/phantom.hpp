#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "radfid/volume_io.hpp"

namespace radfid {

// Seeded synthetic cohort: an ellipsoidal gland on a ramped, gently
// modulated background, plus spherical lesions with cosine edge profiles.
// Lengths are in voxels; intensities live on the [0,1] scale.
struct PhantomSpec {
  Eigen::Array3i dims{64, 64, 32};
  Eigen::Array3d spacing_mm{1.0, 1.0, 1.0};
  Eigen::Array3d gland_half_axes{24.0, 24.0, 12.0};
  double ramp_amplitude = 0.15;
  int lesion_count_min = 0;
  int lesion_count_max = 3;
  double lesion_radius_min = 3.0;
  double lesion_radius_max = 6.0;
  double lesion_contrast_min = -0.35;  // negative for hypointense lesions
  double lesion_contrast_max = 0.5;
  double high_risk_contrast = 0.3;  // label high iff any lesion exceeds this
  std::uint64_t seed = 0;
};

// The gland must fit inside the grid and lesions inside the gland
// (lesion_radius_max <= min gland half axis). Throws ValidationError.
void validate_spec(const PhantomSpec& spec);

struct PhantomCase {
  std::string case_id;  // case_000, case_001, ...
  Volume volume;
  Mask mask;
  RiskLabel label = RiskLabel::low;
};

// Fully determined by spec.seed: case i draws from stream
// derive_stream(seed, 11, i), so any worker count produces the same bytes.
std::vector<PhantomCase> generate_cohort(const PhantomSpec& spec, int n_cases,
                                         int workers = 1);

// Degradation surrogate for a translation network. All-neutral values make
// degrade an exact identity (every step is skipped, not applied trivially).
struct DegradeSpec {
  double blur_sigma = 0.0;   // voxels
  double noise_sigma = 0.0;  // on the [0,1] intensity scale
  double gamma = 1.0;
  bool lesion_dropout = false;
  bool false_lesion = false;
  std::uint64_t seed = 0;
};

void validate_spec(const DegradeSpec& spec);

// Applies, in order: lesion dropout, false lesion, separable Gaussian blur,
// gamma on clamped [0,1], additive Gaussian noise clipped to [0,1].
//
// Dropout locates the strongest deviation from the gland median, estimates
// its extent from the half-peak connected component, and flattens it toward
// the median with a cosine profile; only gland voxels change. The false
// lesion is a hyperintense cosine blob (radius 2.5..5 voxels, contrast
// 0.3..0.5, capped at 1) centered on a random gland voxel and restricted to
// the gland. Operator streams: false lesion derive_stream(seed, 21), noise
// derive_stream(seed, 23) with one normal per voxel in scan order.
Volume degrade(const Volume& v, const Mask& m, const DegradeSpec& spec);

// A phantom run: one reference cohort plus one degraded copy per named
// network surrogate, processed in name order.
struct CohortPlan {
  PhantomSpec phantom;
  int n_cases = 20;
  std::vector<std::pair<std::string, DegradeSpec>> networks;
};

nlohmann::json phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const nlohmann::json& j);
nlohmann::json degrade_spec_to_json(const DegradeSpec& spec);
DegradeSpec degrade_spec_from_json(const nlohmann::json& j);
nlohmann::json cohort_plan_to_json(const CohortPlan& plan);
CohortPlan cohort_plan_from_json(const nlohmann::json& j);

struct CohortPaths {
  std::filesystem::path reference_manifest;
  std::vector<std::pair<std::string, std::filesystem::path>> network_manifests;
};

// Writes out_dir/reference and out_dir/<network> trees, each holding
// volumes/, masks/, and manifest.csv with paths relative to the manifest.
// Case i of network n degrades with seed derive_stream(network seed, 29, i).
CohortPaths write_phantom_cohort(const CohortPlan& plan,
                                 const std::filesystem::path& out_dir,
                                 int workers = 1);

}  // namespace radfid
