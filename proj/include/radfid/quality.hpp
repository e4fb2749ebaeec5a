#pragma once

#include "radfid/grid.hpp"

namespace radfid {

struct SsimConfig {
  int window_radius = 3;
  double gaussian_sigma = 1.5;
  double c1_coeff = 0.01;   // C1 = (c1_coeff * data_range)^2
  double c2_coeff = 0.03;   // C2 = (c2_coeff * data_range)^2
  double data_range = 1.0;  // L; inputs are normalized to [0,1] upstream
};

struct QualityReport {
  double mae = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;  // +inf when mse == 0
  double ssim = 0.0;
  double data_range = 1.0;
};

double mae(const Volume& a, const Volume& b);
double mse(const Volume& a, const Volume& b);

// 10*log10(L^2/mse); +inf sentinel when mse == 0 (serialized as "inf").
double psnr_from_mse(double mse_value, double data_range);
double psnr(const Volume& a, const Volume& b, double data_range = 1.0);

// Volumetric SSIM: Gaussian-weighted local moments at every voxel (borders
// replicate-clamped), standard two-term formula, mean over all voxels.
// Worker count never changes the result.
double ssim3d(const Volume& a, const Volume& b, const SsimConfig& cfg = {},
              int workers = 1);

QualityReport quality_report(const Volume& a, const Volume& b,
                             const SsimConfig& cfg = {}, int workers = 1);

}  // namespace radfid
