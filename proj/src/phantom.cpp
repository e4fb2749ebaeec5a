#include "radfid/phantom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <set>

#include "radfid/parallel.hpp"
#include "radfid/rng.hpp"

namespace radfid {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBackgroundLevel = 0.25;
constexpr double kGlandBoost = 0.30;
constexpr int kSmoothModes = 3;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

struct Lesion {
  Eigen::Array3d center;  // voxel coordinates
  double radius = 0.0;
  double contrast = 0.0;
};

// Ball-in-ellipsoid condition: the normalizing map contracts distances by at
// most 1/min(half axes), so a center at normalized radius <= 1 - r/min keeps
// the whole sphere inside the gland.
Eigen::Array3d sample_lesion_center(CounterRng& rng, const Eigen::Array3d& center,
                                    const Eigen::Array3d& half_axes, double radius) {
  const double slack = 1.0 - radius / half_axes.minCoeff();
  while (true) {
    Eigen::Array3d u;
    for (int a = 0; a < 3; ++a) u[a] = rng.uniform(-1.0, 1.0);
    if ((u * u).sum() <= 1.0) return center + u * slack * half_axes;
  }
}

// Draw order per case: smooth modes (amplitude, 3 frequencies, phase each),
// lesion count, then per lesion radius, contrast, center. Reordering draws
// would change generated bytes.
PhantomCase generate_case(const PhantomSpec& spec, int index) {
  CounterRng rng(derive_stream(spec.seed, 11, static_cast<std::uint64_t>(index)));

  struct Mode {
    double amp, fx, fy, fz, phase;
  };
  std::array<Mode, kSmoothModes> modes;
  for (auto& mo : modes) {
    mo.amp = rng.uniform(0.02, 0.06);
    mo.fx = rng.uniform(0.5, 1.5);
    mo.fy = rng.uniform(0.5, 1.5);
    mo.fz = rng.uniform(0.5, 1.5);
    mo.phase = rng.uniform(0.0, 2.0 * kPi);
  }

  const int count = rng.uniform_int(spec.lesion_count_min, spec.lesion_count_max);
  const Eigen::Array3d center{(spec.dims[0] - 1) / 2.0, (spec.dims[1] - 1) / 2.0,
                              (spec.dims[2] - 1) / 2.0};
  std::vector<Lesion> lesions;
  bool high = false;
  for (int l = 0; l < count; ++l) {
    Lesion le;
    le.radius = rng.uniform(spec.lesion_radius_min, spec.lesion_radius_max);
    le.contrast = rng.uniform(spec.lesion_contrast_min, spec.lesion_contrast_max);
    le.center = sample_lesion_center(rng, center, spec.gland_half_axes, le.radius);
    high = high || le.contrast > spec.high_risk_contrast;
    lesions.push_back(le);
  }

  PhantomCase pc;
  char id[16];
  std::snprintf(id, sizeof id, "case_%03d", index);
  pc.case_id = id;
  pc.label = high ? RiskLabel::high : RiskLabel::low;
  pc.volume = make_grid<float>(spec.dims, spec.spacing_mm);
  pc.mask = make_grid<std::uint8_t>(spec.dims, spec.spacing_mm);

  const Eigen::Array3d denom{std::max(spec.dims[0] - 1, 1) * 1.0,
                             std::max(spec.dims[1] - 1, 1) * 1.0,
                             std::max(spec.dims[2] - 1, 1) * 1.0};
  for (int k = 0; k < spec.dims[2]; ++k)
    for (int j = 0; j < spec.dims[1]; ++j)
      for (int i = 0; i < spec.dims[0]; ++i) {
        const Eigen::Array3d p{double(i), double(j), double(k)};
        const Eigen::Array3d u = p / denom;
        const double rho = std::sqrt(((p - center) / spec.gland_half_axes).square().sum());

        double value = kBackgroundLevel + spec.ramp_amplitude * (u[0] - 0.5);
        for (const auto& mo : modes)
          value += mo.amp *
                   std::cos(2.0 * kPi * (mo.fx * u[0] + mo.fy * u[1] + mo.fz * u[2]) + mo.phase);

        // Full gland boost inside rho 0.9, cosine rolloff to zero at 1.1.
        const double t = std::min(1.0, std::max(0.0, (rho - 0.9) / 0.2));
        value += kGlandBoost * 0.5 * (1.0 + std::cos(kPi * t));

        for (const auto& le : lesions) {
          const double d = std::sqrt((p - le.center).square().sum());
          if (d <= le.radius) value += le.contrast * 0.5 * (1.0 + std::cos(kPi * d / le.radius));
        }

        const auto f = pc.volume.flat(i, j, k);
        pc.volume.voxels[f] = static_cast<float>(clamp01(value));
        pc.mask.voxels[f] = rho <= 1.0 ? 1 : 0;
      }
  return pc;
}

std::vector<std::int64_t> gland_voxels(const Mask& m) {
  std::vector<std::int64_t> out;
  for (std::int64_t f = 0; f < m.voxels.size(); ++f)
    if (m.voxels[f] != 0) out.push_back(f);
  return out;
}

double median_of(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  return n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

double voxel_distance(const Grid3<float>& g, std::int64_t a, std::int64_t b) {
  const auto pa = g.unflat(a);
  const auto pb = g.unflat(b);
  return std::sqrt(double(((pa - pb).cast<double>()).square().sum()));
}

// Flattens the strongest deviation from the gland median back toward it.
// Extent comes from the 26-connected half-peak component around the peak;
// the cosine profile leaves voxels beyond the estimated radius untouched and
// never modifies anything outside the gland.
void apply_dropout(Volume& out, const Mask& m, const std::vector<std::int64_t>& gland) {
  std::vector<double> vals;
  vals.reserve(gland.size());
  for (auto f : gland) vals.push_back(out.voxels[f]);
  const double med = median_of(std::move(vals));

  std::int64_t peak = gland.front();
  double peak_dev = 0.0;
  for (auto f : gland) {
    const double dev = std::abs(double(out.voxels[f]) - med);
    if (dev > peak_dev) {
      peak_dev = dev;
      peak = f;
    }
  }
  if (peak_dev == 0.0) return;
  const double sign = double(out.voxels[peak]) >= med ? 1.0 : -1.0;
  const double half = 0.5 * peak_dev;

  std::vector<std::uint8_t> seen(out.voxels.size(), 0);
  std::deque<std::int64_t> queue{peak};
  seen[peak] = 1;
  double r_est = 0.0;
  while (!queue.empty()) {
    const std::int64_t f = queue.front();
    queue.pop_front();
    r_est = std::max(r_est, voxel_distance(out, peak, f));
    const auto p = out.unflat(f);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int i = p[0] + di, j = p[1] + dj, k = p[2] + dk;
          if (!out.in_bounds(i, j, k)) continue;
          const auto g = out.flat(i, j, k);
          if (seen[g] || m.voxels[g] == 0) continue;
          if ((double(out.voxels[g]) - med) * sign < half) continue;
          seen[g] = 1;
          queue.push_back(g);
        }
  }
  r_est += 1.0;

  const auto pc = out.unflat(peak);
  const int reach = static_cast<int>(std::ceil(r_est));
  for (int k = std::max(0, pc[2] - reach); k <= std::min(out.dims[2] - 1, pc[2] + reach); ++k)
    for (int j = std::max(0, pc[1] - reach); j <= std::min(out.dims[1] - 1, pc[1] + reach); ++j)
      for (int i = std::max(0, pc[0] - reach); i <= std::min(out.dims[0] - 1, pc[0] + reach); ++i) {
        const auto f = out.flat(i, j, k);
        if (m.voxels[f] == 0) continue;
        const double d = voxel_distance(out, peak, f);
        if (d > r_est) continue;
        const double w = 0.5 * (1.0 + std::cos(kPi * d / r_est));
        out.voxels[f] = static_cast<float>(double(out.voxels[f]) +
                                           (med - double(out.voxels[f])) * w);
      }
}

void apply_false_lesion(Volume& out, const Mask& m, const std::vector<std::int64_t>& gland,
                        std::uint64_t seed) {
  CounterRng rng(derive_stream(seed, 21));
  const std::int64_t center = gland[rng.uniform_int(0, static_cast<int>(gland.size()) - 1)];
  const double radius = rng.uniform(2.5, 5.0);
  const double contrast = rng.uniform(0.3, 0.5);

  const auto pc = out.unflat(center);
  const int reach = static_cast<int>(std::ceil(radius));
  for (int k = std::max(0, pc[2] - reach); k <= std::min(out.dims[2] - 1, pc[2] + reach); ++k)
    for (int j = std::max(0, pc[1] - reach); j <= std::min(out.dims[1] - 1, pc[1] + reach); ++j)
      for (int i = std::max(0, pc[0] - reach); i <= std::min(out.dims[0] - 1, pc[0] + reach); ++i) {
        const auto f = out.flat(i, j, k);
        if (m.voxels[f] == 0) continue;
        const double d = voxel_distance(out, center, f);
        if (d > radius) continue;
        const double bump = contrast * 0.5 * (1.0 + std::cos(kPi * d / radius));
        out.voxels[f] = static_cast<float>(std::min(1.0, double(out.voxels[f]) + bump));
      }
}

void gaussian_blur(Volume& v, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t)
    total += kernel[t + radius] = std::exp(-0.5 * (t * t) / (sigma * sigma));
  for (double& w : kernel) w /= total;

  const int nx = v.dims[0], ny = v.dims[1], nz = v.dims[2];
  std::vector<double> src(v.voxels.size()), dst(v.voxels.size());
  for (std::int64_t f = 0; f < v.voxels.size(); ++f) src[f] = v.voxels[f];

  const auto pass = [&](int axis) {
    const int extent = v.dims[axis];
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          int idx[3] = {i, j, k};
          double acc = 0.0;
          for (int t = -radius; t <= radius; ++t) {
            int c = std::min(extent - 1, std::max(0, idx[axis] + t));
            int q[3] = {i, j, k};
            q[axis] = c;
            acc += kernel[t + radius] * src[v.flat(q[0], q[1], q[2])];
          }
          dst[v.flat(i, j, k)] = acc;
        }
    std::swap(src, dst);
  };
  pass(0);
  pass(1);
  pass(2);
  for (std::int64_t f = 0; f < v.voxels.size(); ++f)
    v.voxels[f] = static_cast<float>(src[f]);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void validate_spec(const PhantomSpec& spec) {
  require((spec.dims > 0).all(), "phantom dims must be positive");
  require((spec.spacing_mm > 0.0).all() && spec.spacing_mm.isFinite().all(),
          "phantom spacing must be positive");
  require((spec.gland_half_axes > 0.0).all() && spec.gland_half_axes.isFinite().all(),
          "gland half axes must be positive");
  for (int a = 0; a < 3; ++a)
    require(spec.gland_half_axes[a] <= (spec.dims[a] - 1) / 2.0,
            "gland does not fit inside the grid");
  require(std::isfinite(spec.ramp_amplitude) && spec.ramp_amplitude >= 0.0,
          "ramp amplitude must be non-negative");
  require(spec.lesion_count_min >= 0 && spec.lesion_count_min <= spec.lesion_count_max,
          "lesion count range must satisfy 0 <= min <= max");
  if (spec.lesion_count_max > 0) {
    require(spec.lesion_radius_min > 0.0 &&
                spec.lesion_radius_min <= spec.lesion_radius_max,
            "lesion radius range must satisfy 0 < min <= max");
    require(spec.lesion_radius_max <= spec.gland_half_axes.minCoeff(),
            "lesions must fit inside the gland");
    require(std::isfinite(spec.lesion_contrast_min) &&
                std::isfinite(spec.lesion_contrast_max) &&
                spec.lesion_contrast_min <= spec.lesion_contrast_max,
            "lesion contrast range must satisfy min <= max");
    require(std::abs(spec.lesion_contrast_min) <= 1.0 &&
                std::abs(spec.lesion_contrast_max) <= 1.0,
            "lesion contrast must lie in [-1, 1]");
  }
  require(std::isfinite(spec.high_risk_contrast), "high risk contrast must be finite");
}

void validate_spec(const DegradeSpec& spec) {
  require(std::isfinite(spec.blur_sigma) && spec.blur_sigma >= 0.0,
          "blur sigma must be non-negative");
  require(std::isfinite(spec.noise_sigma) && spec.noise_sigma >= 0.0,
          "noise sigma must be non-negative");
  require(std::isfinite(spec.gamma) && spec.gamma > 0.0, "gamma must be positive");
}

std::vector<PhantomCase> generate_cohort(const PhantomSpec& spec, int n_cases,
                                         int workers) {
  validate_spec(spec);
  require(n_cases >= 1, "cohort needs at least one case");
  std::vector<PhantomCase> cases(n_cases);
  parallel_for_indexed(n_cases, workers,
                       [&](std::int64_t i) { cases[i] = generate_case(spec, int(i)); });
  return cases;
}

Volume degrade(const Volume& v, const Mask& m, const DegradeSpec& spec) {
  validate_grid(v);
  validate_pair(v, m);
  validate_spec(spec);

  Volume out = v;
  if (spec.lesion_dropout || spec.false_lesion) {
    const auto gland = gland_voxels(m);
    if (!gland.empty()) {
      if (spec.lesion_dropout) apply_dropout(out, m, gland);
      if (spec.false_lesion) apply_false_lesion(out, m, gland, spec.seed);
    }
  }
  if (spec.blur_sigma > 0.0) gaussian_blur(out, spec.blur_sigma);
  if (spec.gamma != 1.0)
    for (std::int64_t f = 0; f < out.voxels.size(); ++f)
      out.voxels[f] = static_cast<float>(std::pow(clamp01(out.voxels[f]), spec.gamma));
  if (spec.noise_sigma > 0.0) {
    CounterRng rng(derive_stream(spec.seed, 23));
    for (std::int64_t f = 0; f < out.voxels.size(); ++f)
      out.voxels[f] = static_cast<float>(
          clamp01(double(out.voxels[f]) + spec.noise_sigma * rng.normal()));
  }
  return out;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const char* what) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ValidationError(std::string("unknown ") + what + " key: " + item.key());
}

Eigen::Array3i parse_array3i(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(std::string(key) + " must be an array of 3 integers");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

Eigen::Array3d parse_array3d(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(std::string(key) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

nlohmann::json phantom_spec_to_json(const PhantomSpec& spec) {
  nlohmann::json j;
  j["dims"] = {spec.dims[0], spec.dims[1], spec.dims[2]};
  j["spacing_mm"] = {spec.spacing_mm[0], spec.spacing_mm[1], spec.spacing_mm[2]};
  j["gland_half_axes"] = {spec.gland_half_axes[0], spec.gland_half_axes[1],
                          spec.gland_half_axes[2]};
  j["ramp_amplitude"] = spec.ramp_amplitude;
  j["lesion_count"] = {spec.lesion_count_min, spec.lesion_count_max};
  j["lesion_radius"] = {spec.lesion_radius_min, spec.lesion_radius_max};
  j["lesion_contrast"] = {spec.lesion_contrast_min, spec.lesion_contrast_max};
  j["high_risk_contrast"] = spec.high_risk_contrast;
  j["seed"] = spec.seed;
  return j;
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("phantom spec must be a JSON object");
  reject_unknown_keys(j,
                      {"dims", "spacing_mm", "gland_half_axes", "ramp_amplitude",
                       "lesion_count", "lesion_radius", "lesion_contrast",
                       "high_risk_contrast", "seed"},
                      "phantom spec");
  PhantomSpec spec;
  try {
    if (j.count("dims")) spec.dims = parse_array3i(j.at("dims"), "dims");
    if (j.count("spacing_mm")) spec.spacing_mm = parse_array3d(j.at("spacing_mm"), "spacing_mm");
    if (j.count("gland_half_axes"))
      spec.gland_half_axes = parse_array3d(j.at("gland_half_axes"), "gland_half_axes");
    if (j.count("ramp_amplitude")) spec.ramp_amplitude = j.at("ramp_amplitude").get<double>();
    if (j.count("lesion_count")) {
      const auto& r = j.at("lesion_count");
      if (!r.is_array() || r.size() != 2)
        throw ValidationError("lesion_count must be an array of 2 integers");
      spec.lesion_count_min = r.at(0).get<int>();
      spec.lesion_count_max = r.at(1).get<int>();
    }
    if (j.count("lesion_radius")) {
      spec.lesion_radius_min = j.at("lesion_radius").at(0).get<double>();
      spec.lesion_radius_max = j.at("lesion_radius").at(1).get<double>();
    }
    if (j.count("lesion_contrast")) {
      spec.lesion_contrast_min = j.at("lesion_contrast").at(0).get<double>();
      spec.lesion_contrast_max = j.at("lesion_contrast").at(1).get<double>();
    }
    if (j.count("high_risk_contrast"))
      spec.high_risk_contrast = j.at("high_risk_contrast").get<double>();
    if (j.count("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed phantom spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

nlohmann::json degrade_spec_to_json(const DegradeSpec& spec) {
  nlohmann::json j;
  j["blur_sigma"] = spec.blur_sigma;
  j["noise_sigma"] = spec.noise_sigma;
  j["gamma"] = spec.gamma;
  j["lesion_dropout"] = spec.lesion_dropout;
  j["false_lesion"] = spec.false_lesion;
  j["seed"] = spec.seed;
  return j;
}

DegradeSpec degrade_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("degrade spec must be a JSON object");
  reject_unknown_keys(
      j, {"blur_sigma", "noise_sigma", "gamma", "lesion_dropout", "false_lesion", "seed"},
      "degrade spec");
  DegradeSpec spec;
  try {
    if (j.count("blur_sigma")) spec.blur_sigma = j.at("blur_sigma").get<double>();
    if (j.count("noise_sigma")) spec.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.count("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.count("lesion_dropout")) spec.lesion_dropout = j.at("lesion_dropout").get<bool>();
    if (j.count("false_lesion")) spec.false_lesion = j.at("false_lesion").get<bool>();
    if (j.count("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed degrade spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

namespace {

void validate_network_name(const std::string& name) {
  require(!name.empty(), "network name must not be empty");
  require(name != "reference", "network name 'reference' is reserved");
  for (char c : name)
    require(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.',
            "network name may use only letters, digits, '_', '-', '.': " + name);
  require(name != "." && name != "..", "network name must not be a dot path");
}

}  // namespace

nlohmann::json cohort_plan_to_json(const CohortPlan& plan) {
  nlohmann::json j;
  j["phantom"] = phantom_spec_to_json(plan.phantom);
  j["cases"] = plan.n_cases;
  nlohmann::json nets = nlohmann::json::object();
  for (const auto& [name, spec] : plan.networks) nets[name] = degrade_spec_to_json(spec);
  j["networks"] = nets;
  return j;
}

CohortPlan cohort_plan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("cohort plan must be a JSON object");
  reject_unknown_keys(j, {"phantom", "cases", "networks"}, "cohort plan");
  CohortPlan plan;
  try {
    if (j.count("phantom")) plan.phantom = phantom_spec_from_json(j.at("phantom"));
    if (j.count("cases")) plan.n_cases = j.at("cases").get<int>();
    if (j.count("networks"))
      for (const auto& item : j.at("networks").items()) {
        validate_network_name(item.key());
        plan.networks.emplace_back(item.key(), degrade_spec_from_json(item.value()));
      }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed cohort plan: ") + e.what());
  }
  require(plan.n_cases >= 1, "cohort needs at least one case");
  return plan;
}

CohortPaths write_phantom_cohort(const CohortPlan& plan,
                                 const std::filesystem::path& out_dir, int workers) {
  validate_spec(plan.phantom);
  require(plan.n_cases >= 1, "cohort needs at least one case");
  std::set<std::string> names;
  for (const auto& [name, spec] : plan.networks) {
    validate_network_name(name);
    validate_spec(spec);
    require(names.insert(name).second, "duplicate network name: " + name);
  }

  const auto cases = generate_cohort(plan.phantom, plan.n_cases, workers);

  const auto write_tree = [&](const std::filesystem::path& dir,
                              const std::function<Volume(std::int64_t)>& volume_of) {
    std::filesystem::create_directories(dir / "volumes");
    std::filesystem::create_directories(dir / "masks");
    std::vector<CaseRecord> records(cases.size());
    parallel_for_indexed(std::int64_t(cases.size()), workers, [&](std::int64_t i) {
      CaseRecord rec;
      rec.case_id = cases[i].case_id;
      rec.volume_path = dir / "volumes" / (cases[i].case_id + ".json");
      rec.mask_path = dir / "masks" / (cases[i].case_id + ".json");
      rec.label = cases[i].label;
      write_volume(volume_of(i), rec.volume_path);
      write_mask(cases[i].mask, rec.mask_path);
      records[i] = std::move(rec);
    });
    const auto manifest = dir / "manifest.csv";
    write_manifest(manifest, records);
    return manifest;
  };

  CohortPaths paths;
  paths.reference_manifest =
      write_tree(out_dir / "reference", [&](std::int64_t i) { return cases[i].volume; });
  for (const auto& [name, spec] : plan.networks) {
    const auto manifest = write_tree(out_dir / name, [&](std::int64_t i) {
      DegradeSpec per_case = spec;
      per_case.seed = derive_stream(spec.seed, 29, static_cast<std::uint64_t>(i));
      return degrade(cases[i].volume, cases[i].mask, per_case);
    });
    paths.network_manifests.emplace_back(name, manifest);
  }
  return paths;
}

}  // namespace radfid
