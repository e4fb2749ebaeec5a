#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "radfid/features.hpp"

#include "oracle/radiomics_oracle.hpp"
#include "test_util.hpp"

using namespace radfid;

namespace {

// Spec tolerance for oracle agreement: 1e-9 absolute or 1e-6 relative.
void check_all_close(const FeatureVector& got, const std::vector<double>& want) {
  REQUIRE(got.values.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    INFO("feature ", got.ids[i]);
    const double a = got.values[i], b = want[i];
    const double tol = std::max(1e-9, 1e-6 * std::abs(b));
    CHECK(std::abs(a - b) <= tol);
  }
}

Mask box_mask(const Eigen::Array3i& dims, const Eigen::Array3i& lo,
              const Eigen::Array3i& hi, const Eigen::Array3d& spacing = {1, 1, 1}) {
  Mask m = make_grid<std::uint8_t>(dims, spacing);
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) m(i, j, k) = 1;
  return m;
}

}  // namespace

TEST_CASE("roi selection follows the mask") {
  const Volume v = testutil::random_volume(900, {4, 3, 2});
  Mask all = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  CHECK(build_roi(v, all).size() == v.size());

  Mask one = make_grid<std::uint8_t>(v.dims, v.spacing_mm);
  one(2, 1, 1) = 1;
  const Roi single = build_roi(v, one);
  CHECK(single.size() == 1);
  CHECK(single.intensities[0] == v(2, 1, 1));

  const Mask rnd = testutil::random_mask(901, v.dims, 0.4);
  CHECK(build_roi(v, rnd).size() == mask_foreground_count(rnd));

  Mask empty = make_grid<std::uint8_t>(v.dims, v.spacing_mm);
  CHECK_THROWS_AS(build_roi(v, empty), ValidationError);
}

TEST_CASE("fixed bin number discretization") {
  Volume v = make_grid<float>({3, 1, 1}, {1, 1, 1});
  v.voxels << 0.0f, 0.5f, 1.0f;
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const Roi roi = build_roi(v, m);
  const DiscretizedRoi d = discretize_fbn(roi, 4);
  CHECK(d.bin_index == std::vector<int>{1, 3, 4});
  CHECK(d.bin_width == doctest::Approx(0.25));

  Volume c = make_grid<float>({3, 1, 1}, {1, 1, 1}, 0.7f);
  const Roi croi = build_roi(c, m);
  const DiscretizedRoi dc = discretize_fbn(croi, 8);
  CHECK(dc.bin_index == std::vector<int>{1, 1, 1});

  CHECK_THROWS_AS(discretize_fbn(roi, 1), ValidationError);
}

TEST_CASE("registry is frozen at 186 ids with the published family counts") {
  const auto& ids = feature_ids();
  REQUIRE(ids.size() == 186);
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 186);

  const auto count_prefix = [&](const std::string& p) {
    int n = 0;
    for (const auto& id : ids) n += id.rfind(p, 0) == 0;
    return n;
  };
  CHECK(count_prefix("local_intensity.") == 2);
  CHECK(count_prefix("intensity_stats.") == 18);
  CHECK(count_prefix("intensity_histogram.") == 23);
  CHECK(count_prefix("ivh.") == 7);
  CHECK(count_prefix("glcm.") == 50);
  CHECK(count_prefix("glrlm.") == 32);
  CHECK(count_prefix("glszm.") == 16);
  CHECK(count_prefix("gldzm.") == 16);
  CHECK(count_prefix("ngtdm.") == 5);
  CHECK(count_prefix("ngldm.") == 17);
}

TEST_CASE("intensity statistics closed forms") {
  Volume v = make_grid<float>({5, 1, 1}, {1, 1, 1});
  v.voxels << 1, 2, 3, 4, 5;
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const std::vector<double> f = intensity_stats_features(build_roi(v, m));
  const auto& ids = intensity_stats_ids();
  const auto at = [&](const std::string& name) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == "intensity_stats." + name) return f[i];
    FAIL("missing ", name);
    return 0.0;
  };
  CHECK(at("mean") == doctest::Approx(3.0));
  CHECK(at("variance") == doctest::Approx(2.0));
  CHECK(at("range") == doctest::Approx(4.0));
  CHECK(at("median") == doctest::Approx(3.0));
  CHECK(at("energy") == doctest::Approx(55.0));

  Volume c = make_grid<float>({4, 2, 2}, {1, 1, 1}, 2.5f);
  Mask mc = make_grid<std::uint8_t>(c.dims, c.spacing_mm, std::uint8_t{1});
  const std::vector<double> fc = intensity_stats_features(build_roi(c, mc));
  CHECK(fc[0] == doctest::Approx(2.5));          // mean
  CHECK(fc[1] == 0.0);                           // variance
  CHECK(fc[2] == 0.0);                           // skewness
  CHECK(fc[16] == doctest::Approx(16 * 2.5 * 2.5));  // energy
}

TEST_CASE("histogram entropy anchors") {
  Volume v = make_grid<float>({4, 1, 1}, {1, 1, 1});
  v.voxels << 0.0f, 0.0f, 1.0f, 1.0f;
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const Roi roi = build_roi(v, m);
  const auto feats = intensity_histogram_features(discretize_fbn(roi, 2));
  const auto& ids = intensity_histogram_ids();
  const auto at = [&](const std::string& name) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == "intensity_histogram." + name) return feats[i];
    FAIL("missing ", name);
    return 0.0;
  };
  CHECK(at("entropy") == doctest::Approx(1.0));
  CHECK(at("uniformity") == doctest::Approx(0.5));

  Volume c = make_grid<float>({4, 1, 1}, {1, 1, 1}, 0.3f);
  const Roi croi = build_roi(c, m);
  const auto cfeats = intensity_histogram_features(discretize_fbn(croi, 8));
  const auto cat = [&](const std::string& name) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == "intensity_histogram." + name) return cfeats[i];
    FAIL("missing ", name);
    return 0.0;
  };
  CHECK(cat("entropy") == 0.0);
  CHECK(cat("uniformity") == doctest::Approx(1.0));
  CHECK(cat("mode") == 1.0);
}

TEST_CASE("ivh anchors") {
  Volume c = make_grid<float>({3, 3, 3}, {1, 1, 1}, 0.4f);
  Mask m = make_grid<std::uint8_t>(c.dims, c.spacing_mm, std::uint8_t{1});
  const Roi croi = build_roi(c, m);
  const auto cf = ivh_features(discretize_fbn(croi, 16));
  CHECK(cf[0] == 1.0);  // v10
  CHECK(cf[1] == 1.0);  // v90
  CHECK(cf[2] == 0.0);
  CHECK(cf[5] == 0.0);
  CHECK(cf[6] == 1.0);  // auc

  Volume ramp = make_grid<float>({10, 10, 10}, {1, 1, 1});
  for (std::int64_t f = 0; f < ramp.size(); ++f)
    ramp.voxels[f] = float((double(f) + 0.5) / 1000.0);
  Mask mr = make_grid<std::uint8_t>(ramp.dims, ramp.spacing_mm, std::uint8_t{1});
  const Roi rroi = build_roi(ramp, mr);
  const auto rf = ivh_features(discretize_fbn(rroi, 32));
  CHECK(rf[0] == doctest::Approx(0.9).epsilon(0.05));   // v10
  CHECK(rf[4] == doctest::Approx(0.1).epsilon(0.5));    // i90 near 0.1
  CHECK(rf[6] == doctest::Approx(0.5).epsilon(0.05));   // auc of a ramp
}

TEST_CASE("local intensity peaks") {
  Volume c = make_grid<float>({16, 16, 16}, {1, 1, 1}, 0.6f);
  Mask m = box_mask(c.dims, {6, 6, 6}, {9, 9, 9});
  const Roi croi = build_roi(c, m);
  const auto cf = local_intensity_features(croi);
  CHECK(cf[0] == doctest::Approx(double(0.6f)).epsilon(1e-9));
  CHECK(cf[1] == doctest::Approx(double(0.6f)).epsilon(1e-9));

  Volume spike = make_grid<float>({16, 16, 16}, {1, 1, 1}, 0.2f);
  spike(8, 8, 8) = 1.0f;
  const Roi roi = build_roi(spike, m);
  const auto sf = local_intensity_features(roi);
  const auto of = oracle::local_intensity(oracle::build(spike, m, 4), spike);
  CHECK(sf[0] == doctest::Approx(of[0]).epsilon(1e-9));
  CHECK(sf[1] == doctest::Approx(of[1]).epsilon(1e-9));
  CHECK(sf[1] >= sf[0]);
}

TEST_CASE("texture trivial anchors on a constant roi") {
  Volume c = make_grid<float>({5, 5, 3}, {1, 1, 1}, 0.8f);
  Mask m = make_grid<std::uint8_t>(c.dims, c.spacing_mm, std::uint8_t{1});
  const Roi roi = build_roi(c, m);
  const DiscretizedRoi d = discretize_fbn(roi, 6);

  const auto glcm_vals = cooccurrence_features(d);
  const auto& gids = glcm_ids();
  for (std::size_t i = 0; i < gids.size(); ++i) {
    if (gids[i].find(".contrast.") != std::string::npos) CHECK(glcm_vals[i] == 0.0);
    if (gids[i].find(".angular_second_moment.") != std::string::npos)
      CHECK(glcm_vals[i] == doctest::Approx(1.0));
    if (gids[i].find(".joint_entropy.") != std::string::npos)
      CHECK(glcm_vals[i] == doctest::Approx(0.0));
  }

  const auto szm = zone_features(d, ZoneMetric::size);
  CHECK(szm[12] == doctest::Approx(1.0 / double(c.size())));  // one zone

  const auto ngt = ngtdm_features(d);
  CHECK(ngt[1] == 0.0);  // contrast

  const auto ngl = ngldm_features(d);
  CHECK(ngl[12] == doctest::Approx(1.0));  // dependence_count_percentage
}

TEST_CASE("run percentages match the line-count closed form") {
  const int n = 6;
  Volume v = make_grid<float>({n, 1, 1}, {1, 1, 1}, 0.5f);
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const Roi roi = build_roi(v, m);
  const auto rl = runlength_features(discretize_fbn(roi, 4));
  const auto& ids = glrlm_ids();
  const auto at = [&](const std::string& id) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return rl[i];
    FAIL("missing ", id);
    return 0.0;
  };
  // Along x: one run of length n. Every other direction: n runs of length 1.
  CHECK(at("glrlm.run_percentage.avg") ==
        doctest::Approx((1.0 / n + 12.0) / 13.0).epsilon(1e-12));
  CHECK(at("glrlm.run_percentage.merged") ==
        doctest::Approx((1.0 + 12.0 * n) / (13.0 * n)).epsilon(1e-12));

  Volume alt = make_grid<float>({8, 1, 1}, {1, 1, 1});
  for (int i = 0; i < 8; ++i) alt.voxels[i] = float(i % 2);
  Mask ma = make_grid<std::uint8_t>(alt.dims, alt.spacing_mm, std::uint8_t{1});
  const Roi aroi = build_roi(alt, ma);
  const auto rla = runlength_features(discretize_fbn(aroi, 2));
  const auto ata = [&](const std::string& id) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return rla[i];
    FAIL("missing ", id);
    return 0.0;
  };
  CHECK(ata("glrlm.short_run_emphasis.avg") == doctest::Approx(1.0));
  CHECK(ata("glrlm.short_run_emphasis.merged") == doctest::Approx(1.0));
}

TEST_CASE("two disjoint blobs form two zones") {
  Volume v = make_grid<float>({8, 4, 4}, {1, 1, 1}, 0.5f);
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      m(i, j, 0) = 1;
      m(i + 6, j, 0) = 1;  // separated by 4 voxels
    }
  const Roi roi = build_roi(v, m);
  const DiscretizedRoi d = discretize_fbn(roi, 3);
  const auto szm = zone_features(d, ZoneMetric::size);
  CHECK(szm[12] == doctest::Approx(2.0 / 8.0));  // 2 zones over 8 voxels
}

TEST_CASE("single voxel roi stays finite with unit emphases") {
  Volume v = make_grid<float>({5, 5, 5}, {1, 1, 1}, 0.3f);
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm);
  m(2, 2, 2) = 1;
  const FeatureVector fv = extract_all(v, m, 8);
  REQUIRE(fv.values.size() == 186);
  for (std::size_t i = 0; i < fv.values.size(); ++i) {
    INFO("feature ", fv.ids[i]);
    CHECK(std::isfinite(fv.values[i]));
  }
  for (int idx = 0; idx < 8; ++idx) {  // the eight gldzm emphases
    INFO("feature ", gldzm_ids()[std::size_t(idx)]);
    CHECK(fv.at(gldzm_ids()[std::size_t(idx)]) == doctest::Approx(1.0));
  }
  CHECK(fv.at("gldzm.zone_distance_variance") == 0.0);
  CHECK(fv.at("gldzm.zone_percentage") == doctest::Approx(1.0));
}

TEST_CASE("glcm matches the pair-enumeration oracle on the tiny grid") {
  Volume v = make_grid<float>({2, 2, 1}, {1, 1, 1});
  v.voxels << 0.0f, 0.0f, 0.0f, 1.0f;  // greys [[1,1],[1,2]] with 2 bins
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const Roi roi = build_roi(v, m);
  const auto got = cooccurrence_features(discretize_fbn(roi, 2));
  const auto want = oracle::glcm(oracle::build(v, m, 2));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    INFO("feature ", glcm_ids()[i]);
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("checkerboard matches the oracle") {
  Volume v = make_grid<float>({4, 4, 4}, {1, 1, 1});
  for (std::int64_t f = 0; f < v.size(); ++f) {
    const auto idx = v.unflat(f);
    v.voxels[f] = float((idx[0] + idx[1] + idx[2]) % 2);
  }
  Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm, std::uint8_t{1});
  const FeatureVector fv = extract_all(v, m, 2);
  check_all_close(fv, oracle::extract_all(v, m, 2));
}

TEST_CASE("every family matches the brute-force oracle on seeded rois") {
  for (const int n_bins : {5, 32}) {
    for (const std::uint64_t seed : {301ULL, 302ULL}) {
      Volume v = testutil::random_volume(seed, {8, 8, 8}, 0.0f, 1.0f, {1.0, 1.0, 2.0});
      Mask m = make_grid<std::uint8_t>(v.dims, v.spacing_mm);
      CounterRng rng(derive_stream(seed, 7));
      for (int k = 1; k <= 6; ++k)
        for (int j = 1; j <= 6; ++j)
          for (int i = 1; i <= 6; ++i)
            if (rng.uniform01() < 0.6) m(i, j, k) = 1;
      if (mask_foreground_count(m) == 0) m(3, 3, 3) = 1;
      INFO("bins ", n_bins, " seed ", seed);
      const FeatureVector fv = extract_all(v, m, n_bins);
      check_all_close(fv, oracle::extract_all(v, m, n_bins));
    }
  }
}

TEST_CASE("extraction is deterministic") {
  const Volume v = testutil::random_volume(310, {10, 9, 8});
  const Mask m = testutil::random_mask(311, v.dims, 0.3);
  const FeatureVector a = extract_all(v, m, 16);
  const FeatureVector b = extract_all(v, m, 16);
  CHECK(a.ids == b.ids);
  CHECK(a.values == b.values);
}

TEST_CASE("whole-voxel translation leaves features unchanged") {
  const Eigen::Array3i dims{20, 20, 20};
  Volume base = testutil::random_volume(320, dims);
  Mask m0 = make_grid<std::uint8_t>(dims, base.spacing_mm);
  Mask m1 = make_grid<std::uint8_t>(dims, base.spacing_mm);
  for (int k = 7; k <= 12; ++k)
    for (int j = 7; j <= 12; ++j)
      for (int i = 7; i <= 12; ++i) {
        m0(i, j, k) = 1;
        m1(i + 1, j + 1, k + 1) = 1;
      }
  Volume shifted = base;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i)
        shifted(i, j, k) = base((i + dims[0] - 1) % dims[0], (j + dims[1] - 1) % dims[1],
                                (k + dims[2] - 1) % dims[2]);
  const FeatureVector f0 = extract_all(base, m0, 12);
  const FeatureVector f1 = extract_all(shifted, m1, 12);
  for (std::size_t i = 0; i < f0.values.size(); ++i) {
    INFO("feature ", f0.ids[i]);
    CHECK(f0.values[i] == f1.values[i]);
  }
}

TEST_CASE("positive affine maps leave discretized families unchanged") {
  const Eigen::Array3i dims{9, 9, 9};
  Volume v = make_grid<float>(dims, {1, 1, 1});
  CounterRng rng(330);
  for (std::int64_t f = 0; f < v.size(); ++f)
    v.voxels[f] = float(rng.uniform_int(0, 1024)) / 1024.0f;  // exact lattice
  const Mask m = testutil::random_mask(331, dims, 0.5);

  Volume w = v;
  for (std::int64_t f = 0; f < w.size(); ++f)
    w.voxels[f] = 2.0f * w.voxels[f] + 0.25f;  // exact in float

  const FeatureVector fv = extract_all(v, m, 16);
  const FeatureVector fw = extract_all(w, m, 16);
  for (std::size_t i = 0; i < fv.ids.size(); ++i) {
    const std::string& id = fv.ids[i];
    const bool discretized = id.rfind("intensity_histogram.", 0) == 0 ||
                             id.rfind("ivh.", 0) == 0 || id.rfind("glcm.", 0) == 0 ||
                             id.rfind("glrlm.", 0) == 0 || id.rfind("glszm.", 0) == 0 ||
                             id.rfind("gldzm.", 0) == 0 || id.rfind("ngtdm.", 0) == 0 ||
                             id.rfind("ngldm.", 0) == 0;
    if (!discretized) continue;
    INFO("feature ", id);
    CHECK(fv.values[i] == fw.values[i]);
  }
  // Affine-equivariant raw statistics transform as a*x + b or scale by a.
  const auto affine = [&](const std::string& id) { return 2.0 * fv.at(id) + 0.25; };
  for (const char* name : {"mean", "median", "minimum", "p10", "p90", "maximum"}) {
    const std::string id = std::string("intensity_stats.") + name;
    CHECK(fw.at(id) == doctest::Approx(affine(id)).epsilon(1e-9));
  }
  CHECK(fw.at("intensity_stats.variance") ==
        doctest::Approx(4.0 * fv.at("intensity_stats.variance")).epsilon(1e-9));
  for (const char* name : {"range", "interquartile_range", "mean_absolute_deviation",
                           "median_absolute_deviation"}) {
    const std::string id = std::string("intensity_stats.") + name;
    CHECK(fw.at(id) == doctest::Approx(2.0 * fv.at(id)).epsilon(1e-9));
  }
  for (const char* name : {"skewness", "excess_kurtosis"}) {
    const std::string id = std::string("intensity_stats.") + name;
    CHECK(fw.at(id) == doctest::Approx(fv.at(id)).epsilon(1e-6));
  }
  CHECK(fw.at("local_intensity.local_peak") ==
        doctest::Approx(affine("local_intensity.local_peak")).epsilon(1e-9));
  CHECK(fw.at("local_intensity.global_peak") ==
        doctest::Approx(affine("local_intensity.global_peak")).epsilon(1e-9));
}

TEST_CASE("extract_all output is finite across degenerate inputs") {
  const Eigen::Array3i dims{6, 6, 6};
  std::vector<std::pair<Volume, Mask>> cases;
  cases.emplace_back(make_grid<float>(dims, {1, 1, 1}, 0.5f),
                     make_grid<std::uint8_t>(dims, {1, 1, 1}, std::uint8_t{1}));
  Volume two = make_grid<float>(dims, {1, 1, 1}, 0.0f);
  two(0, 0, 0) = 1.0f;
  cases.emplace_back(two, make_grid<std::uint8_t>(dims, {1, 1, 1}, std::uint8_t{1}));
  for (auto& [v, m] : cases) {
    const FeatureVector fv = extract_all(v, m, 32);
    REQUIRE(fv.values.size() == 186);
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
      INFO("feature ", fv.ids[i]);
      CHECK(std::isfinite(fv.values[i]));
    }
  }
}
