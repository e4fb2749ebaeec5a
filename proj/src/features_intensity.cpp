#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "radfid/features.hpp"

namespace radfid {

namespace {

constexpr double kLog2 = 0.693147180559945309;

double log2_safe(double p) { return std::log(p) / kLog2; }

// Linear-interpolation quantile on sorted data (the common "type 7" rule):
// h = (n-1)*q, result = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
double quantile_sorted(const std::vector<double>& xs, double q) {
  const std::size_t n = xs.size();
  if (n == 1) return xs[0];
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return xs[n - 1];
  const double frac = h - static_cast<double>(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

struct CommonStats {
  double mean, variance, skewness, excess_kurtosis;
  double median, minimum, p10, p90, maximum, iqr, range;
  double mad, robust_mad, median_ad, cov, qcod;
};

// The 16 statistics shared between the raw-intensity and histogram families.
// Degenerate conventions keep everything finite: zero variance zeroes the
// shape statistics, zero denominators zero the dispersion ratios.
CommonStats common_stats(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  CommonStats s{};
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : values) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  s.variance = m2;
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  s.median = quantile_sorted(sorted, 0.5);
  s.minimum = sorted.front();
  s.p10 = quantile_sorted(sorted, 0.10);
  s.p90 = quantile_sorted(sorted, 0.90);
  s.maximum = sorted.back();
  const double p25 = quantile_sorted(sorted, 0.25);
  const double p75 = quantile_sorted(sorted, 0.75);
  s.iqr = p75 - p25;
  s.range = s.maximum - s.minimum;

  double mad = 0.0, med_ad = 0.0;
  for (double x : values) {
    mad += std::abs(x - s.mean);
    med_ad += std::abs(x - s.median);
  }
  s.mad = mad / static_cast<double>(n);
  s.median_ad = med_ad / static_cast<double>(n);

  double robust_sum = 0.0;
  std::size_t robust_n = 0;
  for (double x : values)
    if (x >= s.p10 && x <= s.p90) {
      robust_sum += x;
      ++robust_n;
    }
  if (robust_n == 0) {
    s.robust_mad = 0.0;
  } else {
    const double robust_mean = robust_sum / static_cast<double>(robust_n);
    double acc = 0.0;
    for (double x : values)
      if (x >= s.p10 && x <= s.p90) acc += std::abs(x - robust_mean);
    s.robust_mad = acc / static_cast<double>(robust_n);
  }

  s.cov = (m2 > 0.0 && s.mean != 0.0) ? std::sqrt(m2) / s.mean : 0.0;
  s.qcod = (p75 + p25) != 0.0 ? (p75 - p25) / (p75 + p25) : 0.0;
  return s;
}

std::vector<double> roi_values(const Roi& roi) {
  return {roi.intensities.data(), roi.intensities.data() + roi.intensities.size()};
}

}  // namespace

const std::vector<std::string>& local_intensity_ids() {
  static const std::vector<std::string> ids{"local_intensity.local_peak",
                                            "local_intensity.global_peak"};
  return ids;
}

const std::vector<std::string>& intensity_stats_ids() {
  static const std::vector<std::string> ids{
      "intensity_stats.mean",
      "intensity_stats.variance",
      "intensity_stats.skewness",
      "intensity_stats.excess_kurtosis",
      "intensity_stats.median",
      "intensity_stats.minimum",
      "intensity_stats.p10",
      "intensity_stats.p90",
      "intensity_stats.maximum",
      "intensity_stats.interquartile_range",
      "intensity_stats.range",
      "intensity_stats.mean_absolute_deviation",
      "intensity_stats.robust_mean_absolute_deviation",
      "intensity_stats.median_absolute_deviation",
      "intensity_stats.coefficient_of_variation",
      "intensity_stats.quartile_coefficient_of_dispersion",
      "intensity_stats.energy",
      "intensity_stats.root_mean_square"};
  return ids;
}

const std::vector<std::string>& intensity_histogram_ids() {
  static const std::vector<std::string> ids{
      "intensity_histogram.mean",
      "intensity_histogram.variance",
      "intensity_histogram.skewness",
      "intensity_histogram.excess_kurtosis",
      "intensity_histogram.median",
      "intensity_histogram.minimum",
      "intensity_histogram.p10",
      "intensity_histogram.p90",
      "intensity_histogram.maximum",
      "intensity_histogram.interquartile_range",
      "intensity_histogram.range",
      "intensity_histogram.mean_absolute_deviation",
      "intensity_histogram.robust_mean_absolute_deviation",
      "intensity_histogram.median_absolute_deviation",
      "intensity_histogram.coefficient_of_variation",
      "intensity_histogram.quartile_coefficient_of_dispersion",
      "intensity_histogram.mode",
      "intensity_histogram.entropy",
      "intensity_histogram.uniformity",
      "intensity_histogram.max_gradient",
      "intensity_histogram.max_gradient_level",
      "intensity_histogram.min_gradient",
      "intensity_histogram.min_gradient_level"};
  return ids;
}

const std::vector<std::string>& ivh_ids() {
  static const std::vector<std::string> ids{
      "ivh.v10", "ivh.v90", "ivh.v10_minus_v90", "ivh.i10",
      "ivh.i90", "ivh.i10_minus_i90", "ivh.auc"};
  return ids;
}

std::vector<double> local_intensity_features(const Roi& roi) {
  const Volume& v = *roi.parent;
  // 1 cm^3 sphere: (4/3) pi r^3 = 1000 mm^3.
  const double radius_mm = std::cbrt(3000.0 / (4.0 * M_PI));
  const double r2 = radius_mm * radius_mm;

  std::vector<Eigen::Array3i> offsets;
  const Eigen::Array3i reach = (radius_mm / v.spacing_mm).floor().cast<int>() + 1;
  for (int dk = -reach[2]; dk <= reach[2]; ++dk)
    for (int dj = -reach[1]; dj <= reach[1]; ++dj)
      for (int di = -reach[0]; di <= reach[0]; ++di) {
        const double x = di * v.spacing_mm[0];
        const double y = dj * v.spacing_mm[1];
        const double z = dk * v.spacing_mm[2];
        if (x * x + y * y + z * z <= r2) offsets.push_back({di, dj, dk});
      }

  const auto sphere_mean = [&](const Eigen::Array3i& c) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& o : offsets) {
      const int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
      if (!v.in_bounds(i, j, k)) continue;  // sphere clipped at the volume edge
      sum += v(i, j, k);
      ++count;
    }
    return sum / static_cast<double>(count);
  };

  const double max_intensity = roi.intensities.maxCoeff();
  double local_peak = -std::numeric_limits<double>::infinity();
  double global_peak = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < roi.voxel_list.size(); ++idx) {
    const double m = sphere_mean(v.unflat(roi.voxel_list[idx]));
    global_peak = std::max(global_peak, m);
    // Ties at the maximum intensity resolve to the largest sphere mean.
    if (roi.intensities[static_cast<Eigen::Index>(idx)] == max_intensity)
      local_peak = std::max(local_peak, m);
  }
  return {local_peak, global_peak};
}

std::vector<double> intensity_stats_features(const Roi& roi) {
  const std::vector<double> xs = roi_values(roi);
  const CommonStats s = common_stats(xs);
  double energy = 0.0;
  for (double x : xs) energy += x * x;
  const double rms = std::sqrt(energy / static_cast<double>(xs.size()));
  return {s.mean,       s.variance, s.skewness, s.excess_kurtosis,
          s.median,     s.minimum,  s.p10,      s.p90,
          s.maximum,    s.iqr,      s.range,    s.mad,
          s.robust_mad, s.median_ad, s.cov,     s.qcod,
          energy,       rms};
}

std::vector<double> intensity_histogram_features(const DiscretizedRoi& droi) {
  const int ng = droi.n_bins;
  std::vector<double> levels(droi.bin_index.size());
  std::vector<double> count(static_cast<std::size_t>(ng) + 1, 0.0);
  for (std::size_t i = 0; i < droi.bin_index.size(); ++i) {
    levels[i] = droi.bin_index[i];
    count[static_cast<std::size_t>(droi.bin_index[i])] += 1.0;
  }
  const double n = static_cast<double>(levels.size());
  const CommonStats s = common_stats(levels);

  int mode = 1;
  for (int g = 2; g <= ng; ++g)
    if (count[g] > count[mode]) mode = g;  // lowest bin wins ties

  double entropy = 0.0, uniformity = 0.0;
  for (int g = 1; g <= ng; ++g) {
    const double p = count[g] / n;
    if (p > 0.0) entropy -= p * log2_safe(p);
    uniformity += p * p;
  }

  // Histogram gradient on raw counts over the full 1..Ng axis, central
  // differences inside, one-sided at the ends.
  double max_grad = 0.0, min_grad = 0.0;
  int max_level = 1, min_level = 1;
  if (ng >= 2) {
    for (int g = 1; g <= ng; ++g) {
      double grad;
      if (g == 1)
        grad = count[2] - count[1];
      else if (g == ng)
        grad = count[ng] - count[ng - 1];
      else
        grad = (count[g + 1] - count[g - 1]) / 2.0;
      if (g == 1) {
        max_grad = grad; max_level = 1;
        min_grad = grad; min_level = 1;
      } else {
        if (grad > max_grad) { max_grad = grad; max_level = g; }
        if (grad < min_grad) { min_grad = grad; min_level = g; }
      }
    }
  }

  return {s.mean,
          s.variance,
          s.skewness,
          s.excess_kurtosis,
          s.median,
          s.minimum,
          s.p10,
          s.p90,
          s.maximum,
          s.iqr,
          s.range,
          s.mad,
          s.robust_mad,
          s.median_ad,
          s.cov,
          s.qcod,
          static_cast<double>(mode),
          entropy,
          uniformity,
          max_grad,
          static_cast<double>(max_level),
          min_grad,
          static_cast<double>(min_level)};
}

std::vector<double> ivh_features(const DiscretizedRoi& droi) {
  const int ng = droi.n_bins;
  const double n = static_cast<double>(droi.bin_index.size());

  if (droi.max_intensity == droi.min_intensity) {
    // Constant ROI: every threshold inside the (empty) intensity range is
    // satisfied by the whole volume.
    return {1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  }

  // nu[g]: fraction of voxels with bin >= g; gamma(g) = (g-1)/(Ng-1). The
  // tail count accumulates as an exact integer before the single division,
  // so ties like nu == 0.9 compare cleanly against threshold literals.
  std::vector<double> count(static_cast<std::size_t>(ng) + 2, 0.0);
  for (int b : droi.bin_index) count[static_cast<std::size_t>(b)] += 1.0;
  std::vector<double> nu(static_cast<std::size_t>(ng) + 2, 0.0);
  double tail = 0.0;
  for (int g = ng; g >= 1; --g) {
    tail += count[g];
    nu[g] = tail / n;
  }

  const auto gamma = [&](int g) {
    return static_cast<double>(g - 1) / static_cast<double>(ng - 1);
  };
  const auto volume_at = [&](double x) {
    // Smallest g with gamma(g) >= x, i.e. fraction of voxels at or above x.
    const int g = 1 + static_cast<int>(std::ceil(x * (ng - 1) - 1e-12));
    if (g <= 1) return 1.0;
    if (g > ng) return 0.0;
    return nu[g];
  };
  const auto intensity_at = [&](double x) {
    for (int g = 1; g <= ng; ++g)
      if (nu[g] <= x) return gamma(g);
    return 1.0;
  };

  const double v10 = volume_at(0.10);
  const double v90 = volume_at(0.90);
  const double i10 = intensity_at(0.10);
  const double i90 = intensity_at(0.90);
  double auc = 0.0;
  for (int g = 2; g <= ng; ++g) auc += nu[g];
  auc /= static_cast<double>(ng - 1);
  return {v10, v90, v10 - v90, i10, i90, i10 - i90, auc};
}

}  // namespace radfid
