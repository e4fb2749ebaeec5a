#include "radfid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "radfid/csv.hpp"
#include "radfid/error.hpp"
#include "radfid/numeric.hpp"
#include "radfid/parallel.hpp"

namespace radfid {

namespace {

void require_finite(const Eigen::ArrayXd& v, const char* what) {
  if (!v.isFinite().all()) throw ValidationError(std::string(what) + ": non-finite value");
}

// Continued fraction for the incomplete beta, modified Lentz iteration.
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

const char* to_string(CorrelationBand band) {
  switch (band) {
    case CorrelationBand::poor: return "poor";
    case CorrelationBand::moderate: return "moderate";
    case CorrelationBand::good: return "good";
    case CorrelationBand::excellent: return "excellent";
  }
  throw ValidationError("unknown correlation band");
}

CorrelationBand parse_band(const std::string& text) {
  if (text == "poor") return CorrelationBand::poor;
  if (text == "moderate") return CorrelationBand::moderate;
  if (text == "good") return CorrelationBand::good;
  if (text == "excellent") return CorrelationBand::excellent;
  throw ValidationError("unknown correlation band '" + text + "'");
}

CorrelationBand band_from_abs_rho(double abs_rho) {
  if (!(abs_rho >= 0.0 && abs_rho <= 1.0))
    throw ValidationError("band_from_abs_rho: value outside [0,1]");
  if (abs_rho < 0.5) return CorrelationBand::poor;
  if (abs_rho < 0.75) return CorrelationBand::moderate;
  if (abs_rho < 0.9) return CorrelationBand::good;
  return CorrelationBand::excellent;
}

Eigen::ArrayXd fractional_ranks(const Eigen::ArrayXd& x) {
  require_finite(x, "fractional_ranks");
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return x[a] < x[b] || (x[a] == x[b] && a < b);
  });
  Eigen::ArrayXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] ==
                            x[order[static_cast<std::size_t>(i)]])
      ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[order[static_cast<std::size_t>(k)]] = shared;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman_rho(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  if (x.size() != y.size()) throw ValidationError("spearman_rho: length mismatch");
  if (x.size() < 3) throw ValidationError("spearman_rho: need at least 3 samples");
  const Eigen::ArrayXd rx = fractional_ranks(x);
  const Eigen::ArrayXd ry = fractional_ranks(y);
  if ((rx == ry).all()) return {1.0, false};
  const Eigen::ArrayXd cx = rx - rx.mean();
  const Eigen::ArrayXd cy = ry - ry.mean();
  const double sxx = (cx * cx).sum();
  const double syy = (cy * cy).sum();
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  const double rho = (cx * cy).sum() / std::sqrt(sxx * syy);
  return {std::clamp(rho, -1.0, 1.0), false};
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ValidationError("regularized_incomplete_beta: parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw ValidationError("student_t_two_sided_p: df must be >= 1");
  if (std::isnan(t)) throw ValidationError("student_t_two_sided_p: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double nu = static_cast<double>(df);
  const double p = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
  return std::clamp(p, 0.0, 1.0);
}

PairedTResult paired_t_test(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  if (x.size() != y.size()) throw ValidationError("paired_t_test: length mismatch");
  if (x.size() < 2) throw ValidationError("paired_t_test: need at least 2 samples");
  require_finite(x, "paired_t_test");
  require_finite(y, "paired_t_test");
  const Eigen::ArrayXd d = x - y;
  PairedTResult out;
  out.df = static_cast<int>(x.size()) - 1;
  if ((d == 0.0).all()) return out;  // t = 0, p = 1
  const double n = static_cast<double>(d.size());
  const double mean = d.mean();
  const double ss = (d - mean).square().sum();
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    out.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
    out.zero_variance = true;
    return out;
  }
  out.t = mean / (sd / std::sqrt(n));
  out.p = student_t_two_sided_p(out.t, out.df);
  return out;
}

const CorrelationRecord& CorrelationTable::at(const std::string& feature_id) const {
  for (const auto& rec : records)
    if (rec.feature_id == feature_id) return rec;
  throw ValidationError("correlation table has no feature '" + feature_id + "'");
}

CorrelationTable correlate_cohorts(const FeatureTable& reference,
                                   const FeatureTable& candidate, int workers) {
  const std::size_t n = reference.case_ids.size();
  if (n < 3) throw ValidationError("correlate_cohorts: need at least 3 cases");
  if (candidate.case_ids.size() != n)
    throw ValidationError("correlate_cohorts: case sets differ in size");
  std::map<std::string, Eigen::Index> cand_row;
  for (std::size_t r = 0; r < candidate.case_ids.size(); ++r)
    cand_row[candidate.case_ids[r]] = static_cast<Eigen::Index>(r);
  std::vector<Eigen::Index> row_of(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto it = cand_row.find(reference.case_ids[r]);
    if (it == cand_row.end())
      throw ValidationError("correlate_cohorts: case '" + reference.case_ids[r] +
                            "' missing from candidate table");
    row_of[r] = it->second;
  }

  std::map<std::string, Eigen::Index> cand_col;
  for (std::size_t c = 0; c < candidate.feature_ids.size(); ++c)
    cand_col[candidate.feature_ids[c]] = static_cast<Eigen::Index>(c);
  if (candidate.feature_ids.size() != reference.feature_ids.size())
    throw ValidationError("correlate_cohorts: feature sets differ in size");

  std::vector<std::size_t> order(reference.feature_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return reference.feature_ids[a] < reference.feature_ids[b];
  });

  CorrelationTable table;
  table.records.resize(order.size());
  parallel_for_indexed(static_cast<std::int64_t>(order.size()), workers,
                       [&](std::int64_t slot) {
    const std::size_t ref_c = order[static_cast<std::size_t>(slot)];
    const std::string& id = reference.feature_ids[ref_c];
    const auto it = cand_col.find(id);
    if (it == cand_col.end())
      throw ValidationError("correlate_cohorts: feature '" + id +
                            "' missing from candidate table");
    Eigen::ArrayXd x(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      x[static_cast<Eigen::Index>(r)] =
          reference.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ref_c));
      y[static_cast<Eigen::Index>(r)] = candidate.values(row_of[r], it->second);
    }
    const SpearmanResult sp = spearman_rho(x, y);
    const PairedTResult tt = paired_t_test(x, y);
    CorrelationRecord rec;
    rec.feature_id = id;
    rec.rho = sp.rho;
    rec.abs_rho = std::abs(sp.rho);
    rec.p_value = tt.p;
    rec.n = static_cast<int>(n);
    rec.band = band_from_abs_rho(rec.abs_rho);
    rec.degenerate = sp.degenerate;
    table.records[static_cast<std::size_t>(slot)] = std::move(rec);
  });
  return table;
}

void write_correlation_table(const CorrelationTable& table,
                             const std::filesystem::path& path) {
  CsvRows rows;
  rows.push_back({"feature_id", "rho", "abs_rho", "p_value", "n", "band"});
  for (const auto& rec : table.records)
    rows.push_back({rec.feature_id, format_g9(rec.rho), format_g9(rec.abs_rho),
                    format_g9(rec.p_value), std::to_string(rec.n),
                    to_string(rec.band)});
  write_csv(path, rows);
}

CorrelationTable read_correlation_table(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  const std::vector<std::string> header{"feature_id", "rho",      "abs_rho",
                                        "p_value",    "n",        "band"};
  if (rows.empty() || rows[0] != header)
    throw ValidationError("correlation table " + path.string() + ": bad header");
  CorrelationTable table;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw ValidationError("correlation table " + path.string() + ": ragged row " +
                            std::to_string(r + 1));
    CorrelationRecord rec;
    rec.feature_id = rows[r][0];
    rec.rho = parse_number(rows[r][1]);
    rec.abs_rho = parse_number(rows[r][2]);
    rec.p_value = parse_number(rows[r][3]);
    rec.n = static_cast<int>(std::stol(rows[r][4]));
    rec.band = parse_band(rows[r][5]);
    if (!seen.insert(rec.feature_id).second)
      throw ValidationError("correlation table " + path.string() +
                            ": duplicate feature '" + rec.feature_id + "'");
    if (!(rec.rho >= -1.0 && rec.rho <= 1.0) || rec.abs_rho != std::abs(rec.rho))
      throw ValidationError("correlation table " + path.string() +
                            ": inconsistent rho for '" + rec.feature_id + "'");
    if (!(rec.p_value >= 0.0 && rec.p_value <= 1.0) || rec.n < 3)
      throw ValidationError("correlation table " + path.string() +
                            ": bad p or n for '" + rec.feature_id + "'");
    if (rec.band != band_from_abs_rho(rec.abs_rho))
      throw ValidationError("correlation table " + path.string() +
                            ": band inconsistent for '" + rec.feature_id + "'");
    table.records.push_back(std::move(rec));
  }
  std::sort(table.records.begin(), table.records.end(),
            [](const CorrelationRecord& a, const CorrelationRecord& b) {
              return a.feature_id < b.feature_id;
            });
  return table;
}

NetworkProfile make_network_profile(std::string network_id, double mean_ssim,
                                    double ssim_cutoff) {
  if (network_id.empty()) throw ValidationError("network profile needs an id");
  if (!std::isfinite(mean_ssim))
    throw ValidationError("network profile: non-finite mean ssim");
  NetworkProfile p;
  p.network_id = std::move(network_id);
  p.mean_ssim = mean_ssim;
  p.high_performance = mean_ssim > ssim_cutoff;
  return p;
}

GroupAssignment assign_groups(const std::vector<CorrelationTable>& tables,
                              const std::vector<NetworkProfile>& profiles,
                              double tau) {
  if (profiles.empty()) throw ValidationError("assign_groups: no network profiles");
  if (tables.size() != profiles.size())
    throw ValidationError("assign_groups: table/profile count mismatch");
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("assign_groups: tau outside (0,1)");
  {
    std::set<std::string> ids;
    for (const auto& p : profiles)
      if (!ids.insert(p.network_id).second)
        throw ValidationError("assign_groups: duplicate network '" + p.network_id + "'");
  }
  const std::size_t n_features = tables[0].records.size();
  if (n_features == 0) throw ValidationError("assign_groups: empty correlation table");
  for (const auto& t : tables) {
    if (t.records.size() != n_features)
      throw ValidationError("assign_groups: correlation tables disagree on features");
    for (std::size_t f = 0; f < n_features; ++f)
      if (t.records[f].feature_id != tables[0].records[f].feature_id)
        throw ValidationError("assign_groups: correlation tables disagree on features");
  }

  GroupAssignment out;
  out.tau = tau;
  out.feature_ids.reserve(n_features);
  out.group.resize(n_features, 0);
  for (std::size_t f = 0; f < n_features; ++f) {
    out.feature_ids.push_back(tables[0].records[f].feature_id);
    bool any = false, non_hp = false, all = true;
    for (std::size_t net = 0; net < tables.size(); ++net) {
      const bool detected = tables[net].records[f].abs_rho >= tau;
      any = any || detected;
      all = all && detected;
      if (detected && !profiles[net].high_performance) non_hp = true;
    }
    const int g = !any ? 3 : (non_hp || all ? 1 : 2);
    out.group[f] = g;
    ++out.group_sizes[static_cast<std::size_t>(g - 1)];
  }

  for (int g = 1; g <= 3; ++g)
    for (std::size_t net = 0; net < tables.size(); ++net) {
      std::vector<double> abs_values;
      for (std::size_t f = 0; f < n_features; ++f)
        if (out.group[f] == g) abs_values.push_back(tables[net].records[f].abs_rho);
      GroupSummaryCell cell;
      cell.group = g;
      cell.network_id = profiles[net].network_id;
      cell.n_features = static_cast<int>(abs_values.size());
      if (abs_values.empty()) {
        cell.mean_abs_rho = std::numeric_limits<double>::quiet_NaN();
        cell.sd_abs_rho = std::numeric_limits<double>::quiet_NaN();
      } else {
        const MeanSd ms = mean_sd(abs_values);
        cell.mean_abs_rho = ms.mean;
        cell.sd_abs_rho = ms.sd;
      }
      out.summary.push_back(std::move(cell));
    }
  return out;
}

}  // namespace radfid
