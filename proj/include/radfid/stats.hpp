#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "radfid/table.hpp"

namespace radfid {

enum class CorrelationBand { poor, moderate, good, excellent };

const char* to_string(CorrelationBand band);
CorrelationBand parse_band(const std::string& text);

// Half-open strength bands over |rho|: [0,0.5) poor, [0.5,0.75) moderate,
// [0.75,0.9) good, [0.9,1] excellent.
CorrelationBand band_from_abs_rho(double abs_rho);

// Average (fractional) ranks, 1-based; ties share the mean of their ranks.
Eigen::ArrayXd fractional_ranks(const Eigen::ArrayXd& x);

struct SpearmanResult {
  double rho = 0.0;
  // Set when either input is constant while the rank vectors differ; rho is
  // then 0 by convention so the value never poisons downstream aggregation.
  bool degenerate = false;
};

// Pearson correlation of fractional ranks, n >= 3. Equal rank vectors score
// exactly 1 even when both inputs are constant, so a table correlated with a
// monotone image of itself reports perfect fidelity on every column.
SpearmanResult spearman_rho(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

struct PairedTResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
  bool zero_variance = false;  // constant nonzero difference; p forced to 0
};

// Two-sided paired t-test on d = x - y with sample SD, n >= 2. All-zero
// differences give t = 0, p = 1.
PairedTResult paired_t_test(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

// Two-sided Student-t tail probability via the regularized incomplete beta.
double student_t_two_sided_p(double t, int df);
double regularized_incomplete_beta(double a, double b, double x);

struct CorrelationRecord {
  std::string feature_id;
  double rho = 0.0;
  double abs_rho = 0.0;
  double p_value = 1.0;
  int n = 0;
  CorrelationBand band = CorrelationBand::poor;
  bool degenerate = false;
};

struct CorrelationTable {
  std::vector<CorrelationRecord> records;  // sorted by feature_id

  const CorrelationRecord& at(const std::string& feature_id) const;
};

// Feature-wise Spearman/t statistics between two cohorts. Cases are matched
// by case_id (order-independent); both tables must cover the same case and
// feature sets, with at least 3 cases. Parallel across features.
CorrelationTable correlate_cohorts(const FeatureTable& reference,
                                   const FeatureTable& candidate, int workers = 1);

// CSV layout: feature_id,rho,abs_rho,p_value,n,band (sorted by feature_id).
void write_correlation_table(const CorrelationTable& table,
                             const std::filesystem::path& path);
CorrelationTable read_correlation_table(const std::filesystem::path& path);

struct NetworkProfile {
  std::string network_id;
  double mean_ssim = 0.0;
  bool high_performance = false;
};

NetworkProfile make_network_profile(std::string network_id, double mean_ssim,
                                    double ssim_cutoff = 0.85);

struct GroupSummaryCell {
  int group = 0;  // 1..3
  std::string network_id;
  int n_features = 0;
  double mean_abs_rho = 0.0;  // NaN when the group is empty
  double sd_abs_rho = 0.0;
};

struct GroupAssignment {
  double tau = 0.5;
  std::vector<std::string> feature_ids;
  std::vector<int> group;  // parallel to feature_ids, values 1..3
  std::array<int, 3> group_sizes{0, 0, 0};
  std::vector<GroupSummaryCell> summary;  // group-major, networks in input order
};

// Detectability partition: a feature is detected by a network when
// |rho| >= tau. Group 3 collects features detected nowhere. Group 1 collects
// features detected by at least one non-high-performance network, or by every
// network. Group 2 is the remainder: features whose detectors form a proper,
// exclusively high-performance subset.
GroupAssignment assign_groups(const std::vector<CorrelationTable>& tables,
                              const std::vector<NetworkProfile>& profiles,
                              double tau = 0.5);

}  // namespace radfid
