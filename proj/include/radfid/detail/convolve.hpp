#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

#include "radfid/error.hpp"
#include "radfid/parallel.hpp"

namespace radfid::detail {

// Normalized Gaussian taps for offsets -radius..+radius.
inline std::vector<double> gaussian_kernel(int radius, double sigma) {
  if (radius < 1) throw ValidationError("kernel radius must be positive");
  if (!(sigma > 0.0)) throw ValidationError("kernel sigma must be positive");
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[t + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// One in-place pass along `axis` with replicate-clamped borders. Lines are
// independent, so parallel workers never race and output is worker-count
// invariant.
inline void convolve_axis_clamped(const Eigen::Array3i& dims, Eigen::ArrayXd& data,
                                  const std::vector<double>& kernel, int axis,
                                  int workers) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
  std::int64_t n_lines = 0, length = 0, stride = 0;
  switch (axis) {
    case 0: n_lines = ny * nz; length = nx; stride = 1; break;
    case 1: n_lines = nx * nz; length = ny; stride = nx; break;
    default: n_lines = nx * ny; length = nz; stride = nx * ny; break;
  }
  parallel_for_indexed(n_lines, workers, [&](std::int64_t line) {
    std::int64_t base = 0;
    if (axis == 0) {
      base = line * nx;
    } else if (axis == 1) {
      const std::int64_t i = line % nx, k = line / nx;
      base = i + nx * ny * k;
    } else {
      base = line;  // i + nx*j enumerated directly by line index
    }
    std::vector<double> tmp(static_cast<std::size_t>(length));
    for (std::int64_t t = 0; t < length; ++t) tmp[t] = data[base + t * stride];
    for (std::int64_t t = 0; t < length; ++t) {
      double acc = 0.0;
      for (int o = -radius; o <= radius; ++o) {
        std::int64_t s = t + o;
        if (s < 0) s = 0;
        if (s >= length) s = length - 1;
        acc += kernel[o + radius] * tmp[s];
      }
      data[base + t * stride] = acc;
    }
  });
}

inline void convolve_separable_clamped(const Eigen::Array3i& dims, Eigen::ArrayXd& data,
                                       const std::vector<double>& kernel,
                                       int workers = 1) {
  for (int axis = 0; axis < 3; ++axis)
    convolve_axis_clamped(dims, data, kernel, axis, workers);
}

}  // namespace radfid::detail
