#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace radfid {

// Per-case feature matrix. Rows follow case_ids, columns follow feature_ids;
// every value is finite by construction (extraction never emits NaN/inf).
struct FeatureTable {
  std::vector<std::string> case_ids;
  std::vector<std::string> feature_ids;
  Eigen::MatrixXd values;  // case_ids.size() x feature_ids.size()

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// CSV layout: header "case_id,<feature...>", one row per case, numbers in
// canonical 9-significant-digit form.
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_table(const std::filesystem::path& path);

}  // namespace radfid
