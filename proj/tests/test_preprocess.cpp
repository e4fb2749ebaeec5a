#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "radfid/preprocess.hpp"

#include "test_util.hpp"

using namespace radfid;

TEST_CASE("minmax maps the range onto [0,1]") {
  Volume v = make_grid<float>({3, 1, 1}, {1.0, 1.0, 1.0});
  v.voxels << 2.0f, 4.0f, 6.0f;
  const Volume n = minmax_normalize(v);
  CHECK(n.voxels[0] == 0.0f);
  CHECK(n.voxels[1] == 0.5f);
  CHECK(n.voxels[2] == 1.0f);
  CHECK(n.intensity_unit == "normalized");
}

TEST_CASE("constant volume normalizes to zeros") {
  Volume v = make_grid<float>({4, 4, 2}, {1.0, 1.0, 1.0}, 3.7f);
  const Volume n = minmax_normalize(v);
  CHECK((n.voxels == 0.0f).all());
}

TEST_CASE("minmax agrees with the scalar oracle") {
  const Volume v = testutil::random_volume(21, {9, 7, 5}, -3.0f, 11.0f);
  const Volume n = minmax_normalize(v);
  const float mn = v.voxels.minCoeff();
  const float mx = v.voxels.maxCoeff();
  for (std::int64_t f = 0; f < v.size(); ++f) {
    const double expect = (double(v.voxels[f]) - mn) / (double(mx) - mn);
    CHECK(n.voxels[f] == doctest::Approx(expect).epsilon(1e-7));
    CHECK(n.voxels[f] >= 0.0f);
    CHECK(n.voxels[f] <= 1.0f);
  }
}

TEST_CASE("minmax is idempotent and preserves extremal positions") {
  const Volume v = testutil::random_volume(22, {8, 6, 4}, 5.0f, 9.0f);
  const Volume n1 = minmax_normalize(v);
  const Volume n2 = minmax_normalize(n1);
  for (std::int64_t f = 0; f < v.size(); ++f)
    CHECK(n2.voxels[f] == doctest::Approx(n1.voxels[f]).epsilon(1e-7));

  std::int64_t argmin_v = 0, argmax_v = 0, argmin_n = 0, argmax_n = 0;
  v.voxels.minCoeff(&argmin_v);
  v.voxels.maxCoeff(&argmax_v);
  n1.voxels.minCoeff(&argmin_n);
  n1.voxels.maxCoeff(&argmax_n);
  CHECK(argmin_v == argmin_n);
  CHECK(argmax_v == argmax_n);
}

TEST_CASE("crop centered on the full box is the identity") {
  const Volume v = testutil::random_volume(30, {6, 4, 4});
  CropSpec spec;
  spec.center_voxel = v.dims / 2;
  spec.out_dims = v.dims;
  const Volume c = crop(v, spec);
  CHECK((c.dims == v.dims).all());
  CHECK((c.voxels == v.voxels).all());
  CHECK((c.origin_mm == v.origin_mm).all());
}

TEST_CASE("crop extracts the expected sub-box") {
  Volume v = make_grid<float>({4, 4, 4}, {1.0, 2.0, 3.0});
  for (std::int64_t f = 0; f < v.size(); ++f) v.voxels[f] = float(f);
  CropSpec spec;
  spec.center_voxel = {2, 2, 2};
  spec.out_dims = {2, 2, 2};
  const Volume c = crop(v, spec);
  REQUIRE((c.dims == 2).all());
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        CHECK(c(i, j, k) == v(i + 1, j + 1, k + 1));
  CHECK(c.origin_mm[0] == 1.0);
  CHECK(c.origin_mm[1] == 2.0);
  CHECK(c.origin_mm[2] == 3.0);
}

TEST_CASE("out-of-bounds crop is rejected") {
  const Volume v = testutil::random_volume(31, {4, 4, 4});
  CropSpec spec;
  spec.center_voxel = {0, 0, 0};
  spec.out_dims = {4, 4, 4};
  CHECK_THROWS_AS(crop(v, spec), ValidationError);
}

TEST_CASE("resampling onto the same grid is the identity") {
  const Volume v = testutil::random_volume(40, {8, 6, 5}, 0.0f, 1.0f, {1.0, 1.5, 2.0});
  const Volume r = resample(v, v.dims, v.spacing_mm, Interp::trilinear);
  for (std::int64_t f = 0; f < v.size(); ++f)
    CHECK(r.voxels[f] == doctest::Approx(v.voxels[f]).epsilon(1e-6));
}

TEST_CASE("trilinear resampling reproduces a world-linear ramp") {
  const int nx = 16;
  Volume v = make_grid<float>({nx, 4, 4}, {2.0, 1.0, 1.0});
  for (std::int64_t f = 0; f < v.size(); ++f) {
    const auto idx = v.unflat(f);
    v.voxels[f] = float((idx[0] + 0.5) * v.spacing_mm[0]);
  }
  const Eigen::Array3i out_dims{25, 4, 4};
  const Eigen::Array3d out_spacing{1.25, 1.0, 1.0};
  const Volume r = resample(v, out_dims, out_spacing, Interp::trilinear);
  for (int i = 0; i < out_dims[0]; ++i) {
    const double u = (i + 0.5) * out_spacing[0] / v.spacing_mm[0] - 0.5;
    if (u < 0.0 || u > nx - 1.0) continue;  // border-clamped samples
    const double world_x = (i + 0.5) * out_spacing[0];
    CHECK(r(i, 1, 2) == doctest::Approx(world_x).epsilon(1e-5));
  }
}

TEST_CASE("nearest keeps the label set") {
  const Mask m = testutil::random_mask(50, {9, 7, 5});
  const Mask r = resample(m, {13, 11, 7}, {0.7, 0.65, 0.72}, Interp::nearest);
  for (std::int64_t f = 0; f < r.size(); ++f) CHECK((r.voxels[f] == 0 || r.voxels[f] == 1));
}

TEST_CASE("trilinear stays within the input range") {
  const Volume v = testutil::random_volume(51, {7, 7, 7}, -1.0f, 2.0f);
  const Volume r = resample(v, {10, 9, 8}, {0.7, 0.78, 0.88}, Interp::trilinear);
  const float mn = v.voxels.minCoeff();
  const float mx = v.voxels.maxCoeff();
  for (std::int64_t f = 0; f < r.size(); ++f) {
    CHECK(r.voxels[f] >= mn - 1e-6f);
    CHECK(r.voxels[f] <= mx + 1e-6f);
  }
}

TEST_CASE("trilinear interpolation of labels is rejected") {
  const Mask m = testutil::random_mask(52, {4, 4, 4});
  CHECK_THROWS_AS(resample(m, {8, 8, 8}, {0.5, 0.5, 0.5}, Interp::trilinear),
                  ValidationError);
}
