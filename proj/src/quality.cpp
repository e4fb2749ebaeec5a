#include "radfid/quality.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "radfid/detail/convolve.hpp"
#include "radfid/parallel.hpp"

namespace radfid {

namespace {

void check_pair(const Volume& a, const Volume& b) {
  validate_grid(a);
  validate_grid(b);
  validate_pair(a, b);
}

}  // namespace

double mae(const Volume& a, const Volume& b) {
  check_pair(a, b);
  double acc = 0.0;
  for (std::int64_t f = 0; f < a.size(); ++f)
    acc += std::abs(static_cast<double>(a.voxels[f]) - static_cast<double>(b.voxels[f]));
  return acc / static_cast<double>(a.size());
}

double mse(const Volume& a, const Volume& b) {
  check_pair(a, b);
  double acc = 0.0;
  for (std::int64_t f = 0; f < a.size(); ++f) {
    const double d = static_cast<double>(a.voxels[f]) - static_cast<double>(b.voxels[f]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr_from_mse(double mse_value, double data_range) {
  if (!(data_range > 0.0)) throw ValidationError("psnr data_range must be positive");
  if (mse_value < 0.0) throw ValidationError("psnr mse must be non-negative");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse_value);
}

double psnr(const Volume& a, const Volume& b, double data_range) {
  return psnr_from_mse(mse(a, b), data_range);
}

double ssim3d(const Volume& a, const Volume& b, const SsimConfig& cfg, int workers) {
  check_pair(a, b);
  if (cfg.window_radius < 1) throw ValidationError("ssim window_radius must be positive");
  if (!(cfg.data_range > 0.0)) throw ValidationError("ssim data_range must be positive");
  const int side = 2 * cfg.window_radius + 1;
  if ((a.dims < side).any())
    throw ValidationError("volume smaller than ssim window (" + std::to_string(side) +
                          " voxels per axis)");

  const std::int64_t n = a.size();
  Eigen::ArrayXd ma = a.voxels.cast<double>();
  Eigen::ArrayXd mb = b.voxels.cast<double>();
  Eigen::ArrayXd maa = ma * ma;
  Eigen::ArrayXd mbb = mb * mb;
  Eigen::ArrayXd mab = ma * mb;

  const std::vector<double> kernel =
      detail::gaussian_kernel(cfg.window_radius, cfg.gaussian_sigma);
  detail::convolve_separable_clamped(a.dims, ma, kernel, workers);
  detail::convolve_separable_clamped(a.dims, mb, kernel, workers);
  detail::convolve_separable_clamped(a.dims, maa, kernel, workers);
  detail::convolve_separable_clamped(a.dims, mbb, kernel, workers);
  detail::convolve_separable_clamped(a.dims, mab, kernel, workers);

  const double c1 = (cfg.c1_coeff * cfg.data_range) * (cfg.c1_coeff * cfg.data_range);
  const double c2 = (cfg.c2_coeff * cfg.data_range) * (cfg.c2_coeff * cfg.data_range);

  // Per-slice partials summed in slice order keep the reduction bit-stable
  // across worker counts.
  const std::int64_t nz = a.dims[2];
  const std::int64_t slice = static_cast<std::int64_t>(a.dims[0]) * a.dims[1];
  std::vector<double> partial(static_cast<std::size_t>(nz), 0.0);
  parallel_for_indexed(nz, workers, [&](std::int64_t k) {
    double acc = 0.0;
    for (std::int64_t f = k * slice; f < (k + 1) * slice; ++f) {
      const double mu_a = ma[f], mu_b = mb[f];
      const double var_a = maa[f] - mu_a * mu_a;
      const double var_b = mbb[f] - mu_b * mu_b;
      const double cov = mab[f] - mu_a * mu_b;
      acc += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
    partial[static_cast<std::size_t>(k)] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(n);
}

QualityReport quality_report(const Volume& a, const Volume& b, const SsimConfig& cfg,
                             int workers) {
  QualityReport r;
  r.data_range = cfg.data_range;
  r.mae = mae(a, b);
  r.mse = mse(a, b);
  r.psnr_db = psnr_from_mse(r.mse, cfg.data_range);
  r.ssim = ssim3d(a, b, cfg, workers);
  return r;
}

}  // namespace radfid
