#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radfid/table.hpp"
#include "radfid/volume_io.hpp"

namespace radfid {

struct Dataset {
  std::vector<std::string> case_ids;
  Eigen::MatrixXd X;   // rows follow case_ids, columns follow the feature table
  Eigen::VectorXi y;   // 0 = low risk, 1 = high risk
};

// Joins a feature table with per-case labels; every table case must be
// labelled.
Dataset make_dataset(const FeatureTable& table,
                     const std::map<std::string, RiskLabel>& labels);

struct PcaModel {
  Eigen::VectorXd col_min;          // training column minima
  Eigen::VectorXd col_range;        // max - min; 0 marks a constant column
  Eigen::VectorXd means;            // post-scale column means
  Eigen::MatrixXd components;       // p x k, orthonormal columns
  Eigen::VectorXd explained_ratio;  // k entries, non-increasing
};

// Min-max scales columns to [0,1] (constant columns to 0), centers, then
// keeps the smallest component count whose cumulative explained variance
// reaches the target. Component signs follow the largest-magnitude loading
// (first on ties), made positive.
PcaModel pca_fit(const Eigen::MatrixXd& X, double variance_target = 0.95);

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X);

struct ForestHyperParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  int features_per_split = 0;  // 0 means ceil(sqrt(p))
};

// feature < 0 marks a leaf carrying the class-probability pair.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p0 = 0.0;
  double p1 = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  ForestHyperParams hp;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::vector<DecisionTree> trees;
};

// CART with Gini impurity, bootstrap resampling, per-split random feature
// subsets, and midpoint thresholds; fully determined by (X, y, hp, seed) for
// any worker count.
ForestModel forest_fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                       const ForestHyperParams& hp, std::uint64_t seed,
                       int workers = 1);

Eigen::VectorXd forest_predict_proba(const ForestModel& model,
                                     const Eigen::MatrixXd& X);

std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct AucResult {
  double auc = 0.0;
  std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
};

// Rank-statistic AUC (ties get half credit) plus the threshold-sweep ROC
// whose trapezoidal area equals the rank statistic.
AucResult auc_roc(const Eigen::VectorXd& scores, const Eigen::VectorXi& y);

struct EvalConfig {
  double variance_target = 0.95;
  ForestHyperParams hp;               // max_depth is replaced by selection
  std::vector<int> depth_grid{2, 4, 8, 12};
  int n_repeats = 5;
  double val_fraction = 0.10;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct RepeatResult {
  int repeat = 0;
  int selected_depth = 0;
  double accuracy = 0.0;
  double auc = 0.0;
};

struct ClassificationReport {
  double accuracy_mean = 0.0;
  double accuracy_sd = 0.0;
  double auc_mean = 0.0;
  double auc_sd = 0.0;
  std::vector<RepeatResult> repeats;
  double pooled_auc = 0.0;
  std::vector<RocPoint> pooled_roc;  // over all repeats' test predictions
};

// Repeated stratified train/validation/test evaluation: per repeat, fit PCA
// and forests on the training stratum, pick the depth with the best
// validation accuracy, report test accuracy and AUC; aggregates are mean and
// sample SD over repeats.
ClassificationReport evaluate(const Dataset& data, const EvalConfig& config);

}  // namespace radfid
