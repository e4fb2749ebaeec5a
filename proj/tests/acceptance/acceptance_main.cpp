// Acceptance gate: one criterion per line, PASS or FAIL, nonzero exit when
// anything fails. Takes the CLI binary and a scratch directory, so the final
// criterion can exercise the shipped executable end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "radfid/csv.hpp"
#include "radfid/features.hpp"
#include "radfid/ml.hpp"
#include "radfid/numeric.hpp"
#include "radfid/phantom.hpp"
#include "radfid/pipeline.hpp"
#include "radfid/preprocess.hpp"
#include "radfid/quality.hpp"
#include "radfid/rng.hpp"
#include "radfid/stats.hpp"
#include "radfid/volume_io.hpp"

#include "oracle/ml_oracle.hpp"
#include "oracle/quality_oracle.hpp"
#include "oracle/radiomics_oracle.hpp"
#include "oracle/stats_oracle.hpp"
#include "test_util.hpp"

using namespace radfid;

namespace {

struct Failure {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Failure{message};
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (!(std::abs(got - want) <= tol))
    throw Failure{what + ": got " + format_g9(got) + ", want " + format_g9(want) +
                  " (tol " + format_g9(tol) + ")"};
}

struct Context {
  std::filesystem::path cli;
  std::filesystem::path scratch;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- shared fixtures ------------------------------------------------------

PhantomSpec acceptance_phantom(std::uint64_t seed) {
  PhantomSpec spec;
  spec.dims = {24, 24, 16};
  spec.gland_half_axes = {9.0, 9.0, 6.0};
  spec.lesion_radius_min = 2.0;
  spec.lesion_radius_max = 4.0;
  spec.seed = seed;
  return spec;
}

FeatureTable table_of(const std::vector<PhantomCase>& cases,
                      const std::vector<Volume>& volumes, int n_bins) {
  FeatureTable t;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const FeatureVector fv = extract_all(volumes[i], cases[i].mask, n_bins);
    if (i == 0) {
      t.feature_ids = fv.ids;
      t.values.resize(Eigen::Index(cases.size()), Eigen::Index(fv.ids.size()));
    }
    t.case_ids.push_back(cases[i].case_id);
    for (std::size_t f = 0; f < fv.values.size(); ++f)
      t.values(Eigen::Index(i), Eigen::Index(f)) = fv.values[f];
  }
  return t;
}

double mean_abs_rho(const CorrelationTable& ct) {
  double sum = 0.0;
  for (const auto& rec : ct.records) sum += rec.abs_rho;
  return sum / double(ct.records.size());
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), "cannot read " + p.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::filesystem::path, std::string> snapshot_tree(
    const std::filesystem::path& dir) {
  std::map<std::filesystem::path, std::string> bytes;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      bytes[entry.path().lexically_proximate(dir)] = read_bytes(entry.path());
  return bytes;
}

std::string drop_timestamp_line(const std::string& md) {
  std::string out;
  std::istringstream in(md);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("Generated:", 0) != 0) out += line + "\n";
  return out;
}

int run_cli(const std::filesystem::path& cli, const std::string& args) {
  const std::string cmd = "\"" + cli.string() + "\" " + args + " > /dev/null";
  const int rc = std::system(cmd.c_str());
  return rc == 0 ? 0 : 1;
}

// ---- criteria -------------------------------------------------------------

void criterion_metric_identities(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int p = 0; p < 50; ++p) {
    const Volume a = testutil::random_volume(derive_stream(1000, p, 0), {32, 32, 32});
    const Volume b = testutil::random_volume(derive_stream(1000, p, 1), {32, 32, 32});
    double sum_abs = 0.0, sum_sq = 0.0;
    for (std::int64_t f = 0; f < a.size(); ++f) {
      const double d = double(a.voxels[f]) - double(b.voxels[f]);
      sum_abs += std::abs(d);
      sum_sq += d * d;
    }
    require_close(mae(a, b), sum_abs / double(a.size()), 1e-7, "mae vs scalar loop");
    require_close(mse(a, b), sum_sq / double(a.size()), 1e-9, "mse vs scalar loop");
    require_close(ssim3d(a, a), 1.0, 1e-9, "ssim of a volume with itself");
  }
  require(psnr_from_mse(1e-4, 1.0) == 40.0, "psnr at mse 1e-4 must be exactly 40 dB");
  // Voxels store floats and 0.01 is not representable, so the volume-level
  // pair lands within float quantization of the exact 40 dB identity above.
  Volume base = make_grid<float>({32, 32, 32}, {1, 1, 1}, 0.5f);
  Volume offset = base;
  for (std::int64_t f = 0; f < offset.size(); ++f) offset.voxels[f] += 0.01f;
  require_close(psnr(base, offset, 1.0), 40.0, 1e-4, "psnr of uniform 0.01 error");
  const double elapsed = seconds_since(t0);
  require(elapsed < 5.0, "metric suite took " + format_g9(elapsed) + "s, budget 5s");
}

void criterion_ssim_reference(const Context&) {
  const Eigen::Array3i sizes[4] = {{16, 16, 8}, {12, 10, 14}, {9, 9, 9}, {15, 7, 11}};
  for (int p = 0; p < 20; ++p) {
    const Eigen::Array3i dims = sizes[p % 4];
    const Volume a = testutil::random_volume(derive_stream(2000, p, 0), dims);
    Volume b = testutil::random_volume(derive_stream(2000, p, 1), dims);
    if (p % 3 == 0)  // include correlated pairs, not just independent noise
      for (std::int64_t f = 0; f < b.size(); ++f)
        b.voxels[f] = 0.7f * a.voxels[f] + 0.3f * b.voxels[f];
    const SsimConfig cfg;
    require_close(ssim3d(a, b, cfg), oracle::ssim3d_reference(a, b, cfg), 1e-6,
                  "ssim vs direct-convolution reference, pair " + std::to_string(p));
  }
}

void criterion_radiomics_oracles(const Context&) {
  require(local_intensity_ids().size() == 2, "local intensity family count");
  require(intensity_stats_ids().size() == 18, "intensity stats family count");
  require(intensity_histogram_ids().size() == 23, "histogram family count");
  require(ivh_ids().size() == 7, "ivh family count");
  require(glcm_ids().size() == 50, "glcm family count");
  require(glrlm_ids().size() == 32, "glrlm family count");
  require(glszm_ids().size() == 16, "glszm family count");
  require(gldzm_ids().size() == 16, "gldzm family count");
  require(ngtdm_ids().size() == 5, "ngtdm family count");
  require(ngldm_ids().size() == 17, "ngldm family count");
  require(feature_ids().size() == 186, "total feature count");

  const int bin_choices[4] = {5, 8, 16, 32};
  for (int t = 0; t < 200; ++t) {
    CounterRng rng(derive_stream(3000, t));
    const Eigen::Array3i dims{8, 8, 8};
    const Eigen::Array3d spacing{1.0, 1.0, t % 2 ? 2.0 : 1.0};
    Volume v = testutil::random_volume(derive_stream(3000, t, 1), dims, 0.0f, 1.0f,
                                       spacing);
    Mask m = make_grid<std::uint8_t>(dims, spacing);
    const int sx = 1 + int(rng.uniform_int(0, 5));
    const int sy = 1 + int(rng.uniform_int(0, 5));
    const int sz = 1 + int(rng.uniform_int(0, 5));
    for (int k = 1; k <= sz; ++k)
      for (int j = 1; j <= sy; ++j)
        for (int i = 1; i <= sx; ++i)
          if (rng.uniform01() < 0.7) m(i, j, k) = 1;
    if (mask_foreground_count(m) == 0) m(1, 1, 1) = 1;

    const int n_bins = bin_choices[t % 4];
    const FeatureVector got = extract_all(v, m, n_bins);
    const std::vector<double> want = oracle::extract_all(v, m, n_bins);
    require(got.values.size() == 186 && want.size() == 186,
            "feature vector length on roi " + std::to_string(t));
    for (std::size_t i = 0; i < want.size(); ++i) {
      const double tol = std::max(1e-9, 1e-6 * std::abs(want[i]));
      if (!(std::abs(got.values[i] - want[i]) <= tol))
        throw Failure{"roi " + std::to_string(t) + " feature " + got.ids[i] + ": got " +
                      format_g9(got.values[i]) + ", oracle " + format_g9(want[i])};
    }
  }
}

void criterion_radiomics_invariances(const Context&) {
  // Positive affine map, exact in float on a 1/1024 intensity lattice.
  const Eigen::Array3i dims{9, 9, 9};
  Volume v = make_grid<float>(dims, {1, 1, 1});
  CounterRng rng(4000);
  for (std::int64_t f = 0; f < v.size(); ++f)
    v.voxels[f] = float(rng.uniform_int(0, 1024)) / 1024.0f;
  const Mask m = testutil::random_mask(4001, dims, 0.5);
  Volume w = v;
  for (std::int64_t f = 0; f < w.size(); ++f) w.voxels[f] = 2.0f * w.voxels[f] + 0.25f;

  const FeatureVector fv = extract_all(v, m, 16);
  const FeatureVector fw = extract_all(w, m, 16);
  for (std::size_t i = 0; i < fv.ids.size(); ++i) {
    const std::string& id = fv.ids[i];
    const bool discretized = id.rfind("intensity_histogram.", 0) == 0 ||
                             id.rfind("ivh.", 0) == 0 || id.rfind("glcm.", 0) == 0 ||
                             id.rfind("glrlm.", 0) == 0 || id.rfind("glszm.", 0) == 0 ||
                             id.rfind("gldzm.", 0) == 0 || id.rfind("ngtdm.", 0) == 0 ||
                             id.rfind("ngldm.", 0) == 0;
    if (discretized && fv.values[i] != fw.values[i])
      throw Failure{"affine map changed " + id + ": " + format_g9(fv.values[i]) +
                    " vs " + format_g9(fw.values[i])};
  }

  // Whole-voxel translation of volume and mask together.
  const Eigen::Array3i big{20, 20, 20};
  Volume base = testutil::random_volume(4002, big);
  Mask m0 = make_grid<std::uint8_t>(big, base.spacing_mm);
  Mask m1 = make_grid<std::uint8_t>(big, base.spacing_mm);
  for (int k = 7; k <= 12; ++k)
    for (int j = 7; j <= 12; ++j)
      for (int i = 7; i <= 12; ++i) {
        m0(i, j, k) = 1;
        m1(i + 1, j + 1, k + 1) = 1;
      }
  Volume shifted = base;
  for (int k = 0; k < big[2]; ++k)
    for (int j = 0; j < big[1]; ++j)
      for (int i = 0; i < big[0]; ++i)
        shifted(i, j, k) = base((i + big[0] - 1) % big[0], (j + big[1] - 1) % big[1],
                                (k + big[2] - 1) % big[2]);
  const FeatureVector f0 = extract_all(base, m0, 12);
  const FeatureVector f1 = extract_all(shifted, m1, 12);
  for (std::size_t i = 0; i < f0.values.size(); ++i)
    if (f0.values[i] != f1.values[i])
      throw Failure{"translation changed " + f0.ids[i] + ": " + format_g9(f0.values[i]) +
                    " vs " + format_g9(f1.values[i])};
}

void criterion_identity_fidelity(const Context&) {
  const auto cases = generate_cohort(acceptance_phantom(50), 20);
  std::vector<Volume> volumes;
  for (const auto& c : cases) volumes.push_back(c.volume);
  const FeatureTable t = table_of(cases, volumes, 32);

  const CorrelationTable ct = correlate_cohorts(t, t);
  require(ct.records.size() == 186, "correlation table covers all features");
  for (const auto& rec : ct.records) {
    if (rec.rho != 1.0)
      throw Failure{"self-correlation of " + rec.feature_id + " is " +
                    format_g9(rec.rho) + ", want exactly 1"};
    if (rec.band != CorrelationBand::excellent)
      throw Failure{"self-correlation band of " + rec.feature_id + " is not excellent"};
  }

  const GroupAssignment groups =
      assign_groups({ct}, {make_network_profile("identity", 1.0)}, 0.5);
  require(groups.group_sizes == std::array<int, 3>{186, 0, 0},
          "identity network must put every feature in group 1");
}

void criterion_degradation_monotonicity(const Context&) {
  const auto cases = generate_cohort(acceptance_phantom(60), 20);
  std::vector<Volume> ref;
  for (const auto& c : cases) ref.push_back(c.volume);
  const FeatureTable ref_table = table_of(cases, ref, 32);

  const double sigmas[4] = {0.0, 0.05, 0.1, 0.2};
  std::vector<double> rho_means, ssim_means;
  GroupAssignment worst;
  for (int s = 0; s < 4; ++s) {
    DegradeSpec d;
    d.noise_sigma = sigmas[s];
    d.seed = 333;
    std::vector<Volume> noisy;
    double ssim_sum = 0.0;
    for (const auto& c : cases) {
      noisy.push_back(degrade(c.volume, c.mask, d));
      ssim_sum += ssim3d(c.volume, noisy.back());
    }
    const CorrelationTable ct = correlate_cohorts(ref_table, table_of(cases, noisy, 32));
    rho_means.push_back(mean_abs_rho(ct));
    ssim_means.push_back(ssim_sum / double(cases.size()));
    if (s == 3)
      worst = assign_groups(
          {ct}, {make_network_profile("noisy", ssim_means.back(), 0.85)}, 0.5);
  }
  for (int s = 1; s < 4; ++s) {
    require(rho_means[s] <= rho_means[s - 1] + 1e-12,
            "mean |rho| rose from sigma " + format_g9(sigmas[s - 1]) + " to " +
                format_g9(sigmas[s]) + " (" + format_g9(rho_means[s - 1]) + " -> " +
                format_g9(rho_means[s]) + ")");
    require(ssim_means[s] <= ssim_means[s - 1] + 1e-12,
            "mean ssim rose from sigma " + format_g9(sigmas[s - 1]) + " to " +
                format_g9(sigmas[s]));
  }
  require(worst.group_sizes[2] > 0, "sigma 0.2 must leave some features in group 3");
}

void criterion_banding_fixture(const Context&) {
  require(band_from_abs_rho(0.745) == CorrelationBand::moderate,
          "|rho| 0.745 must band as moderate");
  require(band_from_abs_rho(0.307) == CorrelationBand::poor,
          "|rho| 0.307 must band as poor");
}

void criterion_statistics_oracles(const Context&) {
  Eigen::ArrayXd x(5), y(5), zeros(5), d(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 1, 4, 3, 5;
  require_close(spearman_rho(x, y).rho, 0.8, 1e-12, "spearman hand case");

  zeros.setZero();
  d << 1, 2, 3, 4, 5;
  const PairedTResult r = paired_t_test(d, zeros);
  require_close(r.t, 4.2426, 1e-3, "paired t statistic on d = 1..5");
  require(r.df == 4, "paired t df on n = 5");
  require_close(r.p, 0.0132, 1e-3, "paired t p-value vs published figure");
  require_close(r.p, oracle::t_two_sided_p(r.t, 4), 1e-3,
                "paired t p-value vs integrated t tail");

  for (int t = 0; t < 100; ++t) {
    CounterRng rng(derive_stream(8000, t));
    Eigen::ArrayXd a(15), b(15);
    for (int i = 0; i < 15; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const double before = spearman_rho(a, b).rho;
    const double after = spearman_rho(a.exp().eval(), b).rho;  // monotone map
    if (before != after)
      throw Failure{"monotone transform changed rho on case " + std::to_string(t)};
  }
}

void criterion_classification_fixture(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 200, p = 10;
  Dataset data;
  data.X.resize(n, p);
  data.y.resize(n);
  CounterRng rng(derive_stream(9000, 0));
  for (int i = 0; i < n; ++i) {
    const int cls = i < n / 2 ? 0 : 1;
    data.y[i] = cls;
    data.case_ids.push_back("case_" + std::to_string(i));
    for (int j = 0; j < p; ++j) data.X(i, j) = 2.0 * cls + 0.3 * rng.normal();
  }

  EvalConfig cfg;
  cfg.seed = 1234;
  const ClassificationReport r1 = evaluate(data, cfg);
  require(r1.accuracy_mean >= 0.95, "separable clusters need accuracy >= 0.95, got " +
                                        format_g9(r1.accuracy_mean));
  require(r1.auc_mean >= 0.95,
          "separable clusters need AUC >= 0.95, got " + format_g9(r1.auc_mean));

  const ClassificationReport r2 = evaluate(data, cfg);
  require(classification_report_to_json(r1).dump() ==
              classification_report_to_json(r2).dump(),
          "identical master seed must reproduce the report byte for byte");

  Dataset permuted = data;
  CounterRng shuffle(derive_stream(9000, 1));
  for (int i = n - 1; i > 0; --i) {
    const int j = int(shuffle.uniform_int(0, std::uint64_t(i)));
    std::swap(permuted.y[i], permuted.y[j]);
  }
  const ClassificationReport rp = evaluate(permuted, cfg);
  require(std::abs(rp.accuracy_mean - 0.5) <= 0.12,
          "permuted labels must score near chance, got " + format_g9(rp.accuracy_mean));

  const double elapsed = seconds_since(t0);
  require(elapsed < 30.0,
          "classification suite took " + format_g9(elapsed) + "s, budget 30s");
}

void criterion_auc_equality(const Context&) {
  for (int t = 0; t < 100; ++t) {
    CounterRng rng(derive_stream(9100, t));
    const int n = 10 + int(rng.uniform_int(0, 50));
    Eigen::VectorXd s(n);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
      double v = rng.uniform01();
      if (rng.uniform01() < 0.3) v = std::round(v * 8.0) / 8.0;  // inject ties
      s[i] = v;
      y[i] = rng.uniform01() < 0.5 ? 0 : 1;
    }
    y[0] = 0;  // force both classes
    y[1] = 1;
    const AucResult r = auc_roc(s, y);
    require_close(r.auc, oracle::trapezoid_area(r.points), 1e-9,
                  "rank AUC vs trapezoid area, set " + std::to_string(t));
    require_close(r.auc, oracle::auc_by_pairs(s, y), 1e-9,
                  "rank AUC vs pair enumeration, set " + std::to_string(t));
  }

  Eigen::VectorXd s(4);
  s << 0.1, 0.4, 0.35, 0.8;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;
  require_close(auc_roc(s, y).auc, 0.75, 1e-12, "four-point AUC hand case");
}

void criterion_cli_end_to_end(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = ctx.scratch / "cli";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  CohortPlan plan;
  plan.phantom.dims = {32, 32, 20};
  plan.phantom.gland_half_axes = {12.0, 12.0, 8.0};
  plan.phantom.lesion_radius_min = 2.0;
  plan.phantom.lesion_radius_max = 4.5;
  plan.phantom.seed = 77;
  plan.n_cases = 20;
  DegradeSpec blur;
  blur.blur_sigma = 0.8;
  blur.seed = 1;
  DegradeSpec noise;
  noise.noise_sigma = 0.25;
  noise.seed = 2;
  DegradeSpec mangle;
  mangle.blur_sigma = 1.2;
  mangle.gamma = 1.6;
  mangle.lesion_dropout = true;
  mangle.false_lesion = true;
  mangle.seed = 3;
  plan.networks = {{"blur", blur}, {"noise", noise}, {"mangle", mangle}};
  write_text_atomic(dir / "plan.json", cohort_plan_to_json(plan).dump(2) + "\n");

  require(run_cli(ctx.cli, "phantom --plan \"" + (dir / "plan.json").string() +
                               "\" --out \"" + (dir / "cohort").string() +
                               "\" --workers 2") == 0,
          "phantom subcommand must succeed");

  RunConfig config;
  config.reference_manifest = dir / "cohort" / "reference" / "manifest.csv";
  config.networks = {{"blur", dir / "cohort" / "blur" / "manifest.csv"},
                     {"noise", dir / "cohort" / "noise" / "manifest.csv"},
                     {"mangle", dir / "cohort" / "mangle" / "manifest.csv"}};
  config.out_dir = dir / "run";
  config.n_trees = 20;
  config.n_repeats = 3;
  config.depth_grid = {2, 4};
  config.seed = 7;
  write_text_atomic(dir / "config.json", run_config_to_json(config).dump(2) + "\n");
  const std::string base_args =
      "report --config \"" + (dir / "config.json").string() + "\"";

  require(run_cli(ctx.cli, base_args) == 0, "report subcommand must succeed");
  const auto first = snapshot_tree(config.out_dir);
  require(first.count("summary.json") == 1, "summary.json must be written");
  require(!std::filesystem::exists(config.out_dir / "run.partial"),
          "run marker must be cleared on success");

  const nlohmann::json summary = nlohmann::json::parse(first.at("summary.json"));
  validate_with_schema(summary, summary_schema());
  for (const auto& item : summary.at("artifacts").items()) {
    if (item.value().is_string()) {
      require(std::filesystem::is_regular_file(config.out_dir /
                                               item.value().get<std::string>()),
              "artifact missing: " + item.value().get<std::string>());
    } else {
      for (const auto& inner : item.value().items())
        require(std::filesystem::is_regular_file(config.out_dir /
                                                 inner.value().get<std::string>()),
                "artifact missing: " + inner.value().get<std::string>());
    }
  }
  require(summary.at("stages").size() == 5, "report must run all five stages");

  // Second run, same config: identical bytes except the markdown timestamp.
  require(run_cli(ctx.cli, base_args) == 0, "rerun must succeed");
  const auto second = snapshot_tree(config.out_dir);
  require(first.size() == second.size(), "rerun changed the artifact set");
  for (const auto& [rel, bytes] : first) {
    if (rel == "report.md") {
      require(drop_timestamp_line(bytes) == drop_timestamp_line(second.at(rel)),
              "rerun changed report.md beyond the timestamp");
    } else {
      require(bytes == second.at(rel), "rerun changed " + rel.string());
    }
  }

  // Third run with workers 4: only the echoed worker count may differ.
  require(run_cli(ctx.cli, base_args + " --workers 4") == 0,
          "worker-count run must succeed");
  const auto third = snapshot_tree(config.out_dir);
  for (const auto& [rel, bytes] : first) {
    if (rel == "report.md") {
      require(drop_timestamp_line(bytes) == drop_timestamp_line(third.at(rel)),
              "workers=4 changed report.md beyond the timestamp");
    } else if (rel == "summary.json") {
      nlohmann::json a = nlohmann::json::parse(bytes);
      nlohmann::json b = nlohmann::json::parse(third.at(rel));
      a["config"].erase("workers");
      b["config"].erase("workers");
      require(a == b, "workers=4 changed summary.json beyond the echoed flag");
    } else {
      require(bytes == third.at(rel), "workers=4 changed " + rel.string());
    }
  }

  const double elapsed = seconds_since(t0);
  require(elapsed < 180.0,
          "end-to-end suite took " + format_g9(elapsed) + "s, budget 180s");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <cli-binary> <scratch-dir>\n", argv[0]);
    return 2;
  }
  Context ctx{argv[1], argv[2]};
  std::filesystem::remove_all(ctx.scratch);
  std::filesystem::create_directories(ctx.scratch);

  const std::vector<std::pair<const char*, std::function<void(const Context&)>>>
      criteria = {
          {"metric identities against scalar oracles", criterion_metric_identities},
          {"ssim matches the direct-convolution reference", criterion_ssim_reference},
          {"radiomic features match brute-force oracles", criterion_radiomics_oracles},
          {"radiomic affine and translation invariances", criterion_radiomics_invariances},
          {"identity cohort has perfect feature fidelity", criterion_identity_fidelity},
          {"noise ladder degrades fidelity monotonically",
           criterion_degradation_monotonicity},
          {"correlation banding fixture", criterion_banding_fixture},
          {"statistics hand cases and monotone invariance", criterion_statistics_oracles},
          {"classification fixture on separable clusters",
           criterion_classification_fixture},
          {"rank AUC equals trapezoidal ROC area", criterion_auc_equality},
          {"CLI end to end: schema-valid and byte-reproducible",
           criterion_cli_end_to_end},
      };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(ctx);
      std::printf("[%2zu] PASS %s (%.1fs)\n", i + 1, criteria[i].first,
                  seconds_since(t0));
    } catch (const Failure& f) {
      ++failures;
      std::printf("[%2zu] FAIL %s: %s\n", i + 1, criteria[i].first, f.message.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[%2zu] FAIL %s: unexpected error: %s\n", i + 1, criteria[i].first,
                  e.what());
    }
    std::fflush(stdout);
  }
  std::printf("%d/11 criteria passed\n", int(criteria.size()) - failures);
  return failures == 0 ? 0 : 1;
}
