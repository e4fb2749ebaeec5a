#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "radfid/features.hpp"

namespace radfid {

namespace {

constexpr double kLog2 = 0.693147180559945309;

double log2_safe(double p) { return std::log(p) / kLog2; }

// The 13 unique 3D directions at Chebyshev distance 1 (one per +/- pair),
// in frozen order; merged aggregations depend on this order only through
// sums, averaged aggregations average in this order.
constexpr int kDirections[13][3] = {
    {1, 0, 0},  {0, 1, 0},  {0, 0, 1},  {1, 1, 0},  {1, -1, 0},
    {1, 0, 1},  {1, 0, -1}, {0, 1, 1},  {0, 1, -1}, {1, 1, 1},
    {1, 1, -1}, {1, -1, 1}, {1, -1, -1}};

// Dense grey-level grid: 0 outside the ROI, 1..Ng inside.
struct GreyGrid {
  Eigen::Array3i dims{0, 0, 0};
  std::vector<int> grey;
  std::vector<std::int64_t> roi_flat;  // ascending ROI voxel indices
  std::int64_t nv = 0;
  int ng = 0;

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
  }
  std::int64_t flat(int i, int j, int k) const {
    return i + static_cast<std::int64_t>(dims[0]) * (j + static_cast<std::int64_t>(dims[1]) * k);
  }
  int at(int i, int j, int k) const { return grey[static_cast<std::size_t>(flat(i, j, k))]; }
};

GreyGrid make_grey_grid(const DiscretizedRoi& droi) {
  const Roi& roi = *droi.roi;
  GreyGrid gg;
  gg.dims = roi.parent->dims;
  gg.grey.assign(static_cast<std::size_t>(roi.parent->size()), 0);
  gg.roi_flat = roi.voxel_list;
  gg.nv = roi.size();
  gg.ng = droi.n_bins;
  for (std::size_t i = 0; i < roi.voxel_list.size(); ++i)
    gg.grey[static_cast<std::size_t>(roi.voxel_list[i])] = droi.bin_index[i];
  return gg;
}

Eigen::Array3i unflat(const GreyGrid& gg, std::int64_t f) {
  const int i = static_cast<int>(f % gg.dims[0]);
  const int j = static_cast<int>((f / gg.dims[0]) % gg.dims[1]);
  const int k = static_cast<int>(f / (static_cast<std::int64_t>(gg.dims[0]) * gg.dims[1]));
  return {i, j, k};
}

// ---------------------------------------------------------------- GLCM ----

std::array<double, 25> glcm_features_from(const Eigen::MatrixXd& p) {
  const int ng = static_cast<int>(p.rows());
  const Eigen::VectorXd px = p.rowwise().sum();  // symmetric: p_x = p_y

  double mu = 0.0;
  for (int i = 0; i < ng; ++i) mu += (i + 1) * px[i];
  double var = 0.0;
  for (int i = 0; i < ng; ++i) var += (i + 1 - mu) * (i + 1 - mu) * px[i];

  std::vector<double> pd(static_cast<std::size_t>(ng), 0.0);        // |i-j| = 0..ng-1
  std::vector<double> ps(static_cast<std::size_t>(2 * ng) + 1, 0.0);  // i+j = 2..2ng

  double joint_max = 0.0, joint_entropy = 0.0, asm_ = 0.0;
  double contrast = 0.0, dissimilarity = 0.0;
  double id = 0.0, idn = 0.0, idm = 0.0, idmn = 0.0, inv_var = 0.0;
  double corr_num = 0.0, autocorr = 0.0;
  double clu2 = 0.0, clu3 = 0.0, clu4 = 0.0;
  double hxy1 = 0.0;

  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      const double v = p(i, j);
      if (v == 0.0) continue;
      const int gi = i + 1, gj = j + 1;
      const int d = std::abs(gi - gj);
      const int s = gi + gj;
      pd[static_cast<std::size_t>(d)] += v;
      ps[static_cast<std::size_t>(s)] += v;
      joint_max = std::max(joint_max, v);
      joint_entropy -= v * log2_safe(v);
      asm_ += v * v;
      contrast += double(d) * d * v;
      dissimilarity += d * v;
      id += v / (1.0 + d);
      idn += v / (1.0 + double(d) / ng);
      idm += v / (1.0 + double(d) * d);
      idmn += v / (1.0 + double(d) * d / (double(ng) * ng));
      if (d != 0) inv_var += v / (double(d) * d);
      corr_num += (gi - mu) * (gj - mu) * v;
      autocorr += double(gi) * gj * v;
      const double c = s - 2.0 * mu;
      clu2 += c * c * v;
      clu3 += c * c * c * v;
      clu4 += c * c * c * c * v;
      hxy1 -= v * log2_safe(px[i] * px[j]);
    }

  double mu_d = 0.0;
  for (int d = 0; d < ng; ++d) mu_d += d * pd[static_cast<std::size_t>(d)];
  double var_d = 0.0, ent_d = 0.0;
  for (int d = 0; d < ng; ++d) {
    const double v = pd[static_cast<std::size_t>(d)];
    var_d += (d - mu_d) * (d - mu_d) * v;
    if (v > 0.0) ent_d -= v * log2_safe(v);
  }

  double mu_s = 0.0;
  for (int s = 2; s <= 2 * ng; ++s) mu_s += s * ps[static_cast<std::size_t>(s)];
  double var_s = 0.0, ent_s = 0.0;
  for (int s = 2; s <= 2 * ng; ++s) {
    const double v = ps[static_cast<std::size_t>(s)];
    var_s += (s - mu_s) * (s - mu_s) * v;
    if (v > 0.0) ent_s -= v * log2_safe(v);
  }

  double hx = 0.0, hxy2 = 0.0;
  for (int i = 0; i < ng; ++i) {
    if (px[i] > 0.0) hx -= px[i] * log2_safe(px[i]);
    for (int j = 0; j < ng; ++j) {
      const double q = px[i] * px[j];
      if (q > 0.0) hxy2 -= q * log2_safe(q);
    }
  }

  // Degenerate conventions keep every value finite: a zero-variance matrix
  // has correlation 1, zero marginal entropy gives ic1 = 0, and hxy2 < hxy
  // clamps ic2 to 0.
  const double correlation = var > 0.0 ? corr_num / var : 1.0;
  const double ic1 = hx > 0.0 ? (joint_entropy - hxy1) / hx : 0.0;
  const double ic2 =
      hxy2 >= joint_entropy ? std::sqrt(1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))) : 0.0;

  return {joint_max, mu,    var,          joint_entropy, mu_d,  var_d, ent_d,
          mu_s,      var_s, ent_s,        asm_,          contrast, dissimilarity,
          id,        idn,   idm,          idmn,          inv_var,  correlation,
          autocorr,  clu2,  clu3,         clu4,          ic1,      ic2};
}

// Fallback when no direction produces a single in-ROI pair (e.g. a lone
// voxel): a diagonal matrix carrying the grey-level distribution.
Eigen::MatrixXd dirac_matrix(const GreyGrid& gg) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(gg.ng, gg.ng);
  for (std::int64_t f : gg.roi_flat) {
    const int g = gg.grey[static_cast<std::size_t>(f)];
    p(g - 1, g - 1) += 1.0;
  }
  p /= static_cast<double>(gg.nv);
  return p;
}

}  // namespace

const std::vector<std::string>& glcm_ids() {
  static const std::vector<std::string> ids = [] {
    const char* names[25] = {
        "joint_maximum", "joint_average", "joint_variance", "joint_entropy",
        "difference_average", "difference_variance", "difference_entropy",
        "sum_average", "sum_variance", "sum_entropy", "angular_second_moment",
        "contrast", "dissimilarity", "inverse_difference",
        "inverse_difference_normalized", "inverse_difference_moment",
        "inverse_difference_moment_normalized", "inverse_variance", "correlation",
        "autocorrelation", "cluster_tendency", "cluster_shade", "cluster_prominence",
        "information_correlation_1", "information_correlation_2"};
    std::vector<std::string> out;
    for (const char* n : names) {
      out.push_back(std::string("glcm.") + n + ".avg");
      out.push_back(std::string("glcm.") + n + ".merged");
    }
    return out;
  }();
  return ids;
}

std::vector<double> cooccurrence_features(const DiscretizedRoi& droi) {
  const GreyGrid gg = make_grey_grid(droi);
  const int ng = gg.ng;

  std::vector<Eigen::MatrixXd> counts(13, Eigen::MatrixXd::Zero(ng, ng));
  for (int d = 0; d < 13; ++d) {
    const int* dir = kDirections[d];
    for (std::int64_t f : gg.roi_flat) {
      const auto idx = unflat(gg, f);
      const int ni = idx[0] + dir[0], nj = idx[1] + dir[1], nk = idx[2] + dir[2];
      if (!gg.in_bounds(ni, nj, nk)) continue;
      const int g2 = gg.at(ni, nj, nk);
      if (g2 == 0) continue;
      const int g1 = gg.grey[static_cast<std::size_t>(f)];
      counts[d](g1 - 1, g2 - 1) += 1.0;
      counts[d](g2 - 1, g1 - 1) += 1.0;
    }
  }

  std::array<double, 25> avg{};
  int live_directions = 0;
  Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(ng, ng);
  for (int d = 0; d < 13; ++d) {
    const double total = counts[d].sum();
    merged += counts[d];
    if (total == 0.0) continue;  // directions without pairs are skipped
    const std::array<double, 25> fd = glcm_features_from(counts[d] / total);
    for (int i = 0; i < 25; ++i) avg[i] += fd[i];
    ++live_directions;
  }

  std::array<double, 25> mrg{};
  if (live_directions == 0) {
    const Eigen::MatrixXd dirac = dirac_matrix(gg);
    avg = glcm_features_from(dirac);
    mrg = avg;
  } else {
    for (int i = 0; i < 25; ++i) avg[i] /= live_directions;
    mrg = glcm_features_from(merged / merged.sum());
  }

  std::vector<double> out;
  out.reserve(50);
  for (int i = 0; i < 25; ++i) {
    out.push_back(avg[i]);
    out.push_back(mrg[i]);
  }
  return out;
}

// --------------------------------------------------------------- GLRLM ----

namespace {

// Run-length counts: rows grey 1..ng, cols run length 1..max_len.
Eigen::MatrixXd glrlm_counts(const GreyGrid& gg, const int dir[3]) {
  const int max_len = gg.dims.maxCoeff();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(gg.ng, max_len);
  for (std::int64_t f : gg.roi_flat) {
    const auto idx = unflat(gg, f);
    const int g = gg.grey[static_cast<std::size_t>(f)];
    const int pi = idx[0] - dir[0], pj = idx[1] - dir[1], pk = idx[2] - dir[2];
    // A run starts where the predecessor is outside the ROI or a different
    // grey level; ROI gaps split runs.
    if (gg.in_bounds(pi, pj, pk) && gg.at(pi, pj, pk) == g) continue;
    int len = 1;
    int ci = idx[0] + dir[0], cj = idx[1] + dir[1], ck = idx[2] + dir[2];
    while (gg.in_bounds(ci, cj, ck) && gg.at(ci, cj, ck) == g) {
      ++len;
      ci += dir[0];
      cj += dir[1];
      ck += dir[2];
    }
    counts(g - 1, len - 1) += 1.0;
  }
  return counts;
}

std::array<double, 16> rlm_features_from(const Eigen::MatrixXd& r, double run_pct_denom) {
  const int ng = static_cast<int>(r.rows());
  const int nl = static_cast<int>(r.cols());
  const double ns = r.sum();

  double sre = 0, lre = 0, lgre = 0, hgre = 0, srlge = 0, srhge = 0, lrlge = 0, lrhge = 0;
  double mu_g = 0, mu_l = 0, entropy = 0;
  for (int i = 0; i < ng; ++i)
    for (int l = 0; l < nl; ++l) {
      const double v = r(i, l);
      if (v == 0.0) continue;
      const double g = i + 1, len = l + 1;
      const double p = v / ns;
      sre += v / (len * len);
      lre += v * len * len;
      lgre += v / (g * g);
      hgre += v * g * g;
      srlge += v / (g * g * len * len);
      srhge += v * g * g / (len * len);
      lrlge += v * len * len / (g * g);
      lrhge += v * g * g * len * len;
      mu_g += p * g;
      mu_l += p * len;
      entropy -= p * log2_safe(p);
    }
  double glv = 0, rlv = 0;
  for (int i = 0; i < ng; ++i)
    for (int l = 0; l < nl; ++l) {
      const double v = r(i, l);
      if (v == 0.0) continue;
      const double p = v / ns;
      glv += p * (i + 1 - mu_g) * (i + 1 - mu_g);
      rlv += p * (l + 1 - mu_l) * (l + 1 - mu_l);
    }
  double gln = 0, rln = 0;
  for (int i = 0; i < ng; ++i) {
    const double row = r.row(i).sum();
    gln += row * row;
  }
  for (int l = 0; l < nl; ++l) {
    const double col = r.col(l).sum();
    rln += col * col;
  }

  return {sre / ns,       lre / ns,       lgre / ns,      hgre / ns,
          srlge / ns,     srhge / ns,     lrlge / ns,     lrhge / ns,
          gln / ns,       gln / (ns * ns), rln / ns,      rln / (ns * ns),
          ns / run_pct_denom, glv,        rlv,            entropy};
}

}  // namespace

const std::vector<std::string>& glrlm_ids() {
  static const std::vector<std::string> ids = [] {
    const char* names[16] = {
        "short_run_emphasis", "long_run_emphasis", "low_grey_run_emphasis",
        "high_grey_run_emphasis", "short_run_low_grey_emphasis",
        "short_run_high_grey_emphasis", "long_run_low_grey_emphasis",
        "long_run_high_grey_emphasis", "grey_level_nonuniformity",
        "grey_level_nonuniformity_normalized", "run_length_nonuniformity",
        "run_length_nonuniformity_normalized", "run_percentage",
        "grey_level_variance", "run_length_variance", "run_entropy"};
    std::vector<std::string> out;
    for (const char* n : names) {
      out.push_back(std::string("glrlm.") + n + ".avg");
      out.push_back(std::string("glrlm.") + n + ".merged");
    }
    return out;
  }();
  return ids;
}

std::vector<double> runlength_features(const DiscretizedRoi& droi) {
  const GreyGrid gg = make_grey_grid(droi);
  const double nv = static_cast<double>(gg.nv);

  std::array<double, 16> avg{};
  Eigen::MatrixXd merged;
  for (int d = 0; d < 13; ++d) {
    const Eigen::MatrixXd counts = glrlm_counts(gg, kDirections[d]);
    if (d == 0)
      merged = counts;
    else
      merged += counts;
    const std::array<double, 16> fd = rlm_features_from(counts, nv);
    for (int i = 0; i < 16; ++i) avg[i] += fd[i];
  }
  for (int i = 0; i < 16; ++i) avg[i] /= 13.0;
  const std::array<double, 16> mrg = rlm_features_from(merged, 13.0 * nv);

  std::vector<double> out;
  out.reserve(32);
  for (int i = 0; i < 16; ++i) {
    out.push_back(avg[i]);
    out.push_back(mrg[i]);
  }
  return out;
}

// ------------------------------------------------------- GLSZM / GLDZM ----

namespace {

struct Zone {
  int grey = 0;
  std::int64_t size = 0;
  int min_border_distance = 0;
};

// 26-connected equal-grey components of the ROI, in first-voxel order.
std::vector<Zone> find_zones(const GreyGrid& gg, const std::vector<int>* distance_map) {
  std::vector<char> visited(gg.grey.size(), 0);
  std::vector<Zone> zones;
  std::deque<std::int64_t> queue;
  for (std::int64_t start : gg.roi_flat) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    const int g = gg.grey[static_cast<std::size_t>(start)];
    Zone z;
    z.grey = g;
    z.min_border_distance = distance_map
                                ? (*distance_map)[static_cast<std::size_t>(start)]
                                : 0;
    visited[static_cast<std::size_t>(start)] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::int64_t f = queue.front();
      queue.pop_front();
      ++z.size;
      if (distance_map)
        z.min_border_distance =
            std::min(z.min_border_distance, (*distance_map)[static_cast<std::size_t>(f)]);
      const auto idx = unflat(gg, f);
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0 && dk == 0) continue;
            const int ni = idx[0] + di, nj = idx[1] + dj, nk = idx[2] + dk;
            if (!gg.in_bounds(ni, nj, nk)) continue;
            const std::int64_t nf = gg.flat(ni, nj, nk);
            if (visited[static_cast<std::size_t>(nf)]) continue;
            if (gg.grey[static_cast<std::size_t>(nf)] != g) continue;
            visited[static_cast<std::size_t>(nf)] = 1;
            queue.push_back(nf);
          }
    }
    zones.push_back(z);
  }
  return zones;
}

// Chebyshev distance to the nearest voxel outside the ROI; out-of-volume
// counts as outside, so every border voxel has distance 1. One 26-connected
// BFS layer equals one unit of Chebyshev distance.
std::vector<int> chebyshev_border_distance(const GreyGrid& gg) {
  std::vector<int> dist(gg.grey.size(), 0);
  std::deque<std::int64_t> queue;
  for (std::int64_t f : gg.roi_flat) {
    const auto idx = unflat(gg, f);
    bool border = false;
    for (int dk = -1; dk <= 1 && !border; ++dk)
      for (int dj = -1; dj <= 1 && !border; ++dj)
        for (int di = -1; di <= 1 && !border; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int ni = idx[0] + di, nj = idx[1] + dj, nk = idx[2] + dk;
          if (!gg.in_bounds(ni, nj, nk) || gg.grey[static_cast<std::size_t>(gg.flat(ni, nj, nk))] == 0)
            border = true;
        }
    if (border) {
      dist[static_cast<std::size_t>(f)] = 1;
      queue.push_back(f);
    }
  }
  while (!queue.empty()) {
    const std::int64_t f = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(f)];
    const auto idx = unflat(gg, f);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int ni = idx[0] + di, nj = idx[1] + dj, nk = idx[2] + dk;
          if (!gg.in_bounds(ni, nj, nk)) continue;
          const std::int64_t nf = gg.flat(ni, nj, nk);
          if (gg.grey[static_cast<std::size_t>(nf)] == 0) continue;
          if (dist[static_cast<std::size_t>(nf)] != 0) continue;
          dist[static_cast<std::size_t>(nf)] = d + 1;
          queue.push_back(nf);
        }
  }
  return dist;
}

// Shared 16-feature computation for sparse (grey, column) zone matrices;
// the column is the zone size (GLSZM), border distance (GLDZM), or
// dependence count (NGLDM).
struct ZoneMatrixStats {
  double small_col_emphasis, large_col_emphasis;
  double low_grey, high_grey;
  double small_low, small_high, large_low, large_high;
  double gln, gln_norm, cn, cn_norm;
  double percentage;
  double grey_variance, col_variance, entropy;
  double energy;
};

ZoneMatrixStats zone_matrix_stats(const std::map<std::pair<int, std::int64_t>, double>& cells,
                                  double nv) {
  double ns = 0.0;
  for (const auto& [key, n] : cells) ns += n;

  ZoneMatrixStats s{};
  std::map<int, double> row_sum;
  std::map<std::int64_t, double> col_sum;
  double mu_g = 0.0, mu_c = 0.0;
  for (const auto& [key, n] : cells) {
    const double g = key.first;
    const double c = static_cast<double>(key.second);
    const double p = n / ns;
    s.small_col_emphasis += n / (c * c);
    s.large_col_emphasis += n * c * c;
    s.low_grey += n / (g * g);
    s.high_grey += n * g * g;
    s.small_low += n / (g * g * c * c);
    s.small_high += n * g * g / (c * c);
    s.large_low += n * c * c / (g * g);
    s.large_high += n * g * g * c * c;
    row_sum[key.first] += n;
    col_sum[key.second] += n;
    mu_g += p * g;
    mu_c += p * c;
    s.entropy -= p * log2_safe(p);
    s.energy += p * p;
  }
  for (auto& f : {&s.small_col_emphasis, &s.large_col_emphasis, &s.low_grey, &s.high_grey,
                  &s.small_low, &s.small_high, &s.large_low, &s.large_high})
    *f /= ns;
  for (const auto& [g, n] : row_sum) s.gln += n * n;
  for (const auto& [c, n] : col_sum) s.cn += n * n;
  s.gln_norm = s.gln / (ns * ns);
  s.cn_norm = s.cn / (ns * ns);
  s.gln /= ns;
  s.cn /= ns;
  s.percentage = ns / nv;
  for (const auto& [key, n] : cells) {
    const double p = n / ns;
    s.grey_variance += p * (key.first - mu_g) * (key.first - mu_g);
    s.col_variance += p * (static_cast<double>(key.second) - mu_c) *
                      (static_cast<double>(key.second) - mu_c);
  }
  return s;
}

std::vector<std::string> zone_family_ids(const std::string& family, const char* size_word,
                                         const char* count_word, bool with_energy) {
  const std::string small = std::string("small_") + size_word;
  const std::string large = std::string("large_") + size_word;
  std::vector<std::string> out{
      family + "." + small + "_emphasis",
      family + "." + large + "_emphasis",
      family + ".low_grey_zone_emphasis",
      family + ".high_grey_zone_emphasis",
      family + "." + small + "_low_grey_emphasis",
      family + "." + small + "_high_grey_emphasis",
      family + "." + large + "_low_grey_emphasis",
      family + "." + large + "_high_grey_emphasis",
      family + ".grey_level_nonuniformity",
      family + ".grey_level_nonuniformity_normalized",
      family + "." + count_word + "_nonuniformity",
      family + "." + count_word + "_nonuniformity_normalized",
      family + ".zone_percentage",
      family + ".grey_level_variance",
      family + "." + count_word + "_variance",
      family + "." + count_word + "_entropy"};
  if (with_energy) out.push_back(family + "." + count_word + "_energy");
  return out;
}

}  // namespace

const std::vector<std::string>& glszm_ids() {
  static const std::vector<std::string> ids =
      zone_family_ids("glszm", "zone", "zone_size", false);
  return ids;
}

const std::vector<std::string>& gldzm_ids() {
  static const std::vector<std::string> ids =
      zone_family_ids("gldzm", "distance", "zone_distance", false);
  return ids;
}

std::vector<double> zone_features(const DiscretizedRoi& droi, ZoneMetric metric) {
  const GreyGrid gg = make_grey_grid(droi);
  std::vector<int> dist;
  if (metric == ZoneMetric::distance) dist = chebyshev_border_distance(gg);
  const std::vector<Zone> zones =
      find_zones(gg, metric == ZoneMetric::distance ? &dist : nullptr);

  std::map<std::pair<int, std::int64_t>, double> cells;
  for (const Zone& z : zones) {
    const std::int64_t col = metric == ZoneMetric::size
                                 ? z.size
                                 : static_cast<std::int64_t>(z.min_border_distance);
    cells[{z.grey, col}] += 1.0;
  }
  const ZoneMatrixStats s = zone_matrix_stats(cells, static_cast<double>(gg.nv));
  return {s.small_col_emphasis, s.large_col_emphasis, s.low_grey, s.high_grey,
          s.small_low, s.small_high, s.large_low, s.large_high,
          s.gln, s.gln_norm, s.cn, s.cn_norm,
          s.percentage, s.grey_variance, s.col_variance, s.entropy};
}

// --------------------------------------------------------------- NGTDM ----

const std::vector<std::string>& ngtdm_ids() {
  static const std::vector<std::string> ids{"ngtdm.coarseness", "ngtdm.contrast",
                                            "ngtdm.busyness", "ngtdm.complexity",
                                            "ngtdm.strength"};
  return ids;
}

std::vector<double> ngtdm_features(const DiscretizedRoi& droi) {
  const GreyGrid gg = make_grey_grid(droi);
  const int ng = gg.ng;

  // n_i: voxels of grey i with at least one in-ROI neighbour; s_i: summed
  // absolute difference between i and the mean grey of those neighbours.
  std::vector<double> n_i(static_cast<std::size_t>(ng) + 1, 0.0);
  std::vector<double> s_i(static_cast<std::size_t>(ng) + 1, 0.0);
  double nvc = 0.0;
  for (std::int64_t f : gg.roi_flat) {
    const auto idx = unflat(gg, f);
    double sum = 0.0;
    int count = 0;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int ni = idx[0] + di, nj = idx[1] + dj, nk = idx[2] + dk;
          if (!gg.in_bounds(ni, nj, nk)) continue;
          const int g2 = gg.at(ni, nj, nk);
          if (g2 == 0) continue;
          sum += g2;
          ++count;
        }
    if (count == 0) continue;  // isolated voxels are excluded
    const int g = gg.grey[static_cast<std::size_t>(f)];
    n_i[static_cast<std::size_t>(g)] += 1.0;
    s_i[static_cast<std::size_t>(g)] += std::abs(g - sum / count);
    nvc += 1.0;
  }

  std::vector<double> p(static_cast<std::size_t>(ng) + 1, 0.0);
  int ngp = 0;
  double sum_ps = 0.0, sum_s = 0.0;
  for (int g = 1; g <= ng; ++g) {
    if (nvc > 0.0) p[static_cast<std::size_t>(g)] = n_i[static_cast<std::size_t>(g)] / nvc;
    if (p[static_cast<std::size_t>(g)] > 0.0) ++ngp;
    sum_ps += p[static_cast<std::size_t>(g)] * s_i[static_cast<std::size_t>(g)];
    sum_s += s_i[static_cast<std::size_t>(g)];
  }

  const double coarseness = sum_ps > 0.0 ? 1.0 / sum_ps : 1e6;

  double contrast = 0.0;
  if (ngp > 1 && nvc > 0.0) {
    double pair_term = 0.0;
    for (int i = 1; i <= ng; ++i)
      for (int j = 1; j <= ng; ++j)
        pair_term += p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(j)] *
                     (i - j) * (i - j);
    contrast = pair_term / (static_cast<double>(ngp) * (ngp - 1)) * (sum_s / nvc);
  }

  double busy_denom = 0.0;
  for (int i = 1; i <= ng; ++i)
    for (int j = 1; j <= ng; ++j) {
      if (p[static_cast<std::size_t>(i)] == 0.0 || p[static_cast<std::size_t>(j)] == 0.0)
        continue;
      busy_denom += std::abs(i * p[static_cast<std::size_t>(i)] -
                             j * p[static_cast<std::size_t>(j)]);
    }
  const double busyness = busy_denom > 0.0 ? sum_ps / busy_denom : 0.0;

  double complexity = 0.0;
  if (nvc > 0.0) {
    for (int i = 1; i <= ng; ++i)
      for (int j = 1; j <= ng; ++j) {
        const double pi = p[static_cast<std::size_t>(i)];
        const double pj = p[static_cast<std::size_t>(j)];
        if (pi == 0.0 || pj == 0.0) continue;
        complexity += std::abs(i - j) *
                      (pi * s_i[static_cast<std::size_t>(i)] +
                       pj * s_i[static_cast<std::size_t>(j)]) /
                      (pi + pj);
      }
    complexity /= nvc;
  }

  double strength = 0.0;
  if (sum_s > 0.0) {
    for (int i = 1; i <= ng; ++i)
      for (int j = 1; j <= ng; ++j) {
        const double pi = p[static_cast<std::size_t>(i)];
        const double pj = p[static_cast<std::size_t>(j)];
        if (pi == 0.0 || pj == 0.0) continue;
        strength += (pi + pj) * (i - j) * (i - j);
      }
    strength /= sum_s;
  }

  return {coarseness, contrast, busyness, complexity, strength};
}

// --------------------------------------------------------------- NGLDM ----

const std::vector<std::string>& ngldm_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out{
        "ngldm.low_dependence_emphasis",
        "ngldm.high_dependence_emphasis",
        "ngldm.low_grey_count_emphasis",
        "ngldm.high_grey_count_emphasis",
        "ngldm.low_dependence_low_grey_emphasis",
        "ngldm.low_dependence_high_grey_emphasis",
        "ngldm.high_dependence_low_grey_emphasis",
        "ngldm.high_dependence_high_grey_emphasis",
        "ngldm.grey_level_nonuniformity",
        "ngldm.grey_level_nonuniformity_normalized",
        "ngldm.dependence_count_nonuniformity",
        "ngldm.dependence_count_nonuniformity_normalized",
        "ngldm.dependence_count_percentage",
        "ngldm.grey_level_variance",
        "ngldm.dependence_count_variance",
        "ngldm.dependence_count_entropy",
        "ngldm.dependence_count_energy"};
    return out;
  }();
  return ids;
}

std::vector<double> ngldm_features(const DiscretizedRoi& droi) {
  const GreyGrid gg = make_grey_grid(droi);

  // Dependence coarseness alpha = 0: a neighbour is dependent iff it has the
  // same grey level. Matrix column = dependence count + 1, so every ROI voxel
  // contributes exactly one entry and the count percentage is identically 1.
  std::map<std::pair<int, std::int64_t>, double> cells;
  for (std::int64_t f : gg.roi_flat) {
    const auto idx = unflat(gg, f);
    const int g = gg.grey[static_cast<std::size_t>(f)];
    int dep = 0;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int ni = idx[0] + di, nj = idx[1] + dj, nk = idx[2] + dk;
          if (!gg.in_bounds(ni, nj, nk)) continue;
          if (gg.at(ni, nj, nk) == g) ++dep;
        }
    cells[{g, dep + 1}] += 1.0;
  }
  const ZoneMatrixStats s = zone_matrix_stats(cells, static_cast<double>(gg.nv));
  return {s.small_col_emphasis, s.large_col_emphasis, s.low_grey, s.high_grey,
          s.small_low, s.small_high, s.large_low, s.large_high,
          s.gln, s.gln_norm, s.cn, s.cn_norm,
          s.percentage, s.grey_variance, s.col_variance, s.entropy, s.energy};
}

}  // namespace radfid
