#include "radfid/ml.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "radfid/error.hpp"
#include "radfid/numeric.hpp"
#include "radfid/parallel.hpp"
#include "radfid/rng.hpp"
#include "radfid/stats.hpp"

namespace radfid {

namespace {

void require_finite_matrix(const Eigen::MatrixXd& X, const char* what) {
  if (!X.allFinite()) throw ValidationError(std::string(what) + ": non-finite value");
}

Eigen::MatrixXd minmax_scale(const Eigen::MatrixXd& X, const Eigen::VectorXd& col_min,
                             const Eigen::VectorXd& col_range) {
  Eigen::MatrixXd S(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (col_range[c] > 0.0)
      S.col(c) = (X.col(c).array() - col_min[c]) / col_range[c];
    else
      S.col(c).setZero();
  }
  return S;
}

}  // namespace

Dataset make_dataset(const FeatureTable& table,
                     const std::map<std::string, RiskLabel>& labels) {
  Dataset d;
  d.case_ids = table.case_ids;
  d.X = table.values;
  d.y.resize(static_cast<Eigen::Index>(table.case_ids.size()));
  for (std::size_t r = 0; r < table.case_ids.size(); ++r) {
    const auto it = labels.find(table.case_ids[r]);
    if (it == labels.end())
      throw ValidationError("make_dataset: case '" + table.case_ids[r] +
                            "' has no risk label");
    d.y[static_cast<Eigen::Index>(r)] = it->second == RiskLabel::high ? 1 : 0;
  }
  return d;
}

PcaModel pca_fit(const Eigen::MatrixXd& X, double variance_target) {
  if (X.rows() < 2) throw ValidationError("pca_fit: need at least 2 rows");
  if (X.cols() < 1) throw ValidationError("pca_fit: need at least 1 column");
  if (!(variance_target > 0.0 && variance_target <= 1.0))
    throw ValidationError("pca_fit: variance target outside (0,1]");
  require_finite_matrix(X, "pca_fit");

  PcaModel m;
  m.col_min = X.colwise().minCoeff().transpose();
  m.col_range = X.colwise().maxCoeff().transpose() - m.col_min;
  const Eigen::MatrixXd S = minmax_scale(X, m.col_min, m.col_range);
  m.means = S.colwise().mean();
  const Eigen::MatrixXd C = S.rowwise() - m.means.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::VectorXd var = sv.array().square() / static_cast<double>(X.rows() - 1);
  const double total = var.sum();
  if (total == 0.0) {
    // Every column constant: one zero-variance component by convention.
    m.components = Eigen::MatrixXd::Zero(X.cols(), 1);
    m.components(0, 0) = 1.0;
    m.explained_ratio = Eigen::VectorXd::Zero(1);
    return m;
  }
  const Eigen::VectorXd ratio = var / total;
  Eigen::Index k = ratio.size();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    cumulative += ratio[i];
    if (cumulative >= variance_target - 1e-12) {
      k = i + 1;
      break;
    }
  }
  m.components = svd.matrixV().leftCols(k);
  m.explained_ratio = ratio.head(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index peak = 0;
    m.components.col(c).cwiseAbs().maxCoeff(&peak);
    if (m.components(peak, c) < 0.0) m.components.col(c) = -m.components.col(c);
  }
  return m;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.col_min.size())
    throw ValidationError("pca_transform: column count mismatch");
  require_finite_matrix(X, "pca_transform");
  const Eigen::MatrixXd S = minmax_scale(X, model.col_min, model.col_range);
  return (S.rowwise() - model.means.transpose()) * model.components;
}

namespace {

struct GrowContext {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXi& y;
  const ForestHyperParams& hp;
  int mtry;
};

int count_ones(const Eigen::VectorXi& y, const std::vector<int>& samples) {
  int n1 = 0;
  for (int s : samples) n1 += y[s];
  return n1;
}

double gini(int n0, int n1) {
  const double n = static_cast<double>(n0 + n1);
  const double f0 = n0 / n, f1 = n1 / n;
  return 1.0 - f0 * f0 - f1 * f1;
}

int grow_node(GrowContext& ctx, DecisionTree& tree, std::vector<int>& samples,
              int depth, CounterRng& rng) {
  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const int n = static_cast<int>(samples.size());
  const int n1 = count_ones(ctx.y, samples);
  const int n0 = n - n1;
  tree.nodes[node_id].p0 = static_cast<double>(n0) / n;
  tree.nodes[node_id].p1 = static_cast<double>(n1) / n;
  if (n0 == 0 || n1 == 0 || depth >= ctx.hp.max_depth || n < 2 * ctx.hp.min_leaf)
    return node_id;

  // Candidate features: seeded partial Fisher-Yates, then sorted so the scan
  // order is independent of the draw order.
  const int p = static_cast<int>(ctx.X.cols());
  std::vector<int> feats(static_cast<std::size_t>(p));
  std::iota(feats.begin(), feats.end(), 0);
  for (int j = 0; j < ctx.mtry; ++j)
    std::swap(feats[static_cast<std::size_t>(j)],
              feats[static_cast<std::size_t>(rng.uniform_int(j, p - 1))]);
  feats.resize(static_cast<std::size_t>(ctx.mtry));
  std::sort(feats.begin(), feats.end());

  const double parent = gini(n0, n1);
  int best_feature = -1;
  double best_threshold = 0.0;
  double best_weighted = parent;  // a split must strictly improve on this
  std::vector<std::pair<double, int>> vals;
  vals.reserve(samples.size());
  for (int f : feats) {
    vals.clear();
    for (int s : samples) vals.emplace_back(ctx.X(s, f), ctx.y[s]);
    std::sort(vals.begin(), vals.end());
    int nl = 0, nl1 = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      ++nl;
      nl1 += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const int nr = n - nl, nr1 = n1 - nl1;
      if (nl < ctx.hp.min_leaf || nr < ctx.hp.min_leaf) continue;
      const double weighted =
          (nl * gini(nl - nl1, nl1) + nr * gini(nr - nr1, nr1)) / n;
      if (weighted < best_weighted) {
        best_weighted = weighted;
        best_feature = f;
        best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  if (best_feature < 0) return node_id;

  std::vector<int> left, right;
  for (int s : samples)
    (ctx.X(s, best_feature) < best_threshold ? left : right).push_back(s);
  samples.clear();
  samples.shrink_to_fit();
  const int left_id = grow_node(ctx, tree, left, depth + 1, rng);
  const int right_id = grow_node(ctx, tree, right, depth + 1, rng);
  tree.nodes[node_id].feature = best_feature;
  tree.nodes[node_id].threshold = best_threshold;
  tree.nodes[node_id].left = left_id;
  tree.nodes[node_id].right = right_id;
  return node_id;
}

}  // namespace

ForestModel forest_fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                       const ForestHyperParams& hp, std::uint64_t seed,
                       int workers) {
  if (X.rows() != y.size()) throw ValidationError("forest_fit: row/label mismatch");
  if (X.cols() < 1) throw ValidationError("forest_fit: need at least 1 feature");
  require_finite_matrix(X, "forest_fit");
  const int n = static_cast<int>(X.rows());
  int n1 = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw ValidationError("forest_fit: labels must be 0/1");
    n1 += y[i];
  }
  if (n1 == 0 || n1 == n) throw ValidationError("forest_fit: single-class labels");
  if (hp.n_trees < 1 || hp.max_depth < 1 || hp.min_leaf < 1 || hp.features_per_split < 0)
    throw ValidationError("forest_fit: hyperparameters must be positive");

  ForestModel model;
  model.hp = hp;
  model.seed = seed;
  model.n_features = static_cast<int>(X.cols());
  const int mtry =
      hp.features_per_split > 0
          ? std::min<int>(model.n_features, hp.features_per_split)
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(model.n_features))));
  model.trees.resize(static_cast<std::size_t>(hp.n_trees));
  GrowContext ctx{X, y, hp, mtry};
  parallel_for_indexed(hp.n_trees, workers, [&](std::int64_t t) {
    CounterRng rng(derive_stream(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> bootstrap(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) bootstrap[static_cast<std::size_t>(i)] = rng.uniform_int(0, n - 1);
    DecisionTree tree;
    grow_node(ctx, tree, bootstrap, 0, rng);
    model.trees[static_cast<std::size_t>(t)] = std::move(tree);
  });
  return model;
}

Eigen::VectorXd forest_predict_proba(const ForestModel& model,
                                     const Eigen::MatrixXd& X) {
  if (X.cols() != model.n_features)
    throw ValidationError("forest_predict_proba: feature count mismatch");
  if (model.trees.empty()) throw ValidationError("forest_predict_proba: empty model");
  require_finite_matrix(X, "forest_predict_proba");
  Eigen::VectorXd probs(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) {
      int node = 0;
      while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = X(r, nd.feature) < nd.threshold ? nd.left : nd.right;
      }
      sum += tree.nodes[static_cast<std::size_t>(node)].p1;
    }
    probs[r] = sum / static_cast<double>(model.trees.size());
  }
  return probs;
}

std::string forest_to_json(const ForestModel& model) {
  nlohmann::json j;
  j["seed"] = model.seed;
  j["n_features"] = model.n_features;
  j["hp"] = {{"n_trees", model.hp.n_trees},
             {"max_depth", model.hp.max_depth},
             {"min_leaf", model.hp.min_leaf},
             {"features_per_split", model.hp.features_per_split}};
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& nd : tree.nodes)
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.p0, nd.p1});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

ForestModel forest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("forest_from_json: ") + e.what());
  }
  try {
    ForestModel model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.n_features = j.at("n_features").get<int>();
    const auto& hp = j.at("hp");
    model.hp.n_trees = hp.at("n_trees").get<int>();
    model.hp.max_depth = hp.at("max_depth").get<int>();
    model.hp.min_leaf = hp.at("min_leaf").get<int>();
    model.hp.features_per_split = hp.at("features_per_split").get<int>();
    for (const auto& jt : j.at("trees")) {
      DecisionTree tree;
      for (const auto& jn : jt) {
        if (!jn.is_array() || jn.size() != 6)
          throw ValidationError("forest_from_json: malformed node");
        TreeNode nd;
        nd.feature = jn[0].get<int>();
        nd.threshold = jn[1].get<double>();
        nd.left = jn[2].get<int>();
        nd.right = jn[3].get<int>();
        nd.p0 = jn[4].get<double>();
        nd.p1 = jn[5].get<double>();
        tree.nodes.push_back(nd);
      }
      if (tree.nodes.empty()) throw ValidationError("forest_from_json: empty tree");
      for (const TreeNode& nd : tree.nodes) {
        if (std::abs(nd.p0 + nd.p1 - 1.0) > 1e-9)
          throw ValidationError("forest_from_json: leaf probabilities do not sum to 1");
        if (nd.feature >= 0 &&
            (nd.feature >= model.n_features || nd.left < 0 || nd.right < 0 ||
             nd.left >= static_cast<int>(tree.nodes.size()) ||
             nd.right >= static_cast<int>(tree.nodes.size())))
          throw ValidationError("forest_from_json: split references out of range");
      }
      model.trees.push_back(std::move(tree));
    }
    if (model.trees.empty()) throw ValidationError("forest_from_json: no trees");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("forest_from_json: ") + e.what());
  }
}

AucResult auc_roc(const Eigen::VectorXd& scores, const Eigen::VectorXi& y) {
  if (scores.size() != y.size()) throw ValidationError("auc_roc: length mismatch");
  if (!scores.allFinite()) throw ValidationError("auc_roc: non-finite score");
  const Eigen::Index n = scores.size();
  int n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0 && y[i] != 1) throw ValidationError("auc_roc: labels must be 0/1");
    n1 += y[i];
  }
  const int n0 = static_cast<int>(n) - n1;
  if (n1 == 0 || n0 == 0) throw ValidationError("auc_roc: single-class labels");

  const Eigen::ArrayXd ranks = fractional_ranks(scores.array());
  double rank_sum_pos = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (y[i] == 1) rank_sum_pos += ranks[i];
  AucResult out;
  out.auc = (rank_sum_pos - 0.5 * n1 * (n1 + 1.0)) / (static_cast<double>(n1) * n0);

  std::vector<double> unique(scores.data(), scores.data() + n);
  std::sort(unique.begin(), unique.end(), std::greater<>());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  int tp = 0, fp = 0;
  for (const double s : unique) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (scores[i] == s) (y[i] == 1 ? tp : fp) += 1;
    out.points.push_back({static_cast<double>(fp) / n0, static_cast<double>(tp) / n1, s});
  }
  return out;
}

ClassificationReport evaluate(const Dataset& data, const EvalConfig& config) {
  const int n = static_cast<int>(data.X.rows());
  if (n < 20) throw ValidationError("evaluate: need at least 20 cases");
  if (data.y.size() != data.X.rows())
    throw ValidationError("evaluate: label count mismatch");
  if (config.n_repeats < 1 || config.depth_grid.empty())
    throw ValidationError("evaluate: bad repeat or depth configuration");
  if (!(config.val_fraction > 0.0 && config.test_fraction > 0.0 &&
        config.val_fraction + config.test_fraction < 1.0))
    throw ValidationError("evaluate: split fractions must leave a training share");

  std::vector<int> by_class[2];
  for (int i = 0; i < n; ++i) {
    if (data.y[i] != 0 && data.y[i] != 1)
      throw ValidationError("evaluate: labels must be 0/1");
    by_class[data.y[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty())
    throw ValidationError("evaluate: class absent from the dataset");

  const auto gather = [&](const std::vector<int>& rows, Eigen::MatrixXd& X,
                          Eigen::VectorXi& y) {
    X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
    y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
      y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
    }
  };
  const auto accuracy_of = [](const Eigen::VectorXd& probs, const Eigen::VectorXi& y) {
    int hits = 0;
    for (Eigen::Index i = 0; i < probs.size(); ++i)
      hits += (probs[i] >= 0.5 ? 1 : 0) == y[i];
    return static_cast<double>(hits) / static_cast<double>(probs.size());
  };

  ClassificationReport report;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (int r = 0; r < config.n_repeats; ++r) {
    CounterRng split_rng(derive_stream(config.seed, 17, static_cast<std::uint64_t>(r)));
    std::vector<int> train, val, test;
    for (const auto& members : by_class) {
      std::vector<int> order = members;
      for (std::size_t j = order.size(); j > 1; --j)
        std::swap(order[j - 1],
                  order[static_cast<std::size_t>(split_rng.uniform_int(0, static_cast<int>(j) - 1))]);
      const int n_c = static_cast<int>(order.size());
      const int n_val = std::max(1, static_cast<int>(std::lround(config.val_fraction * n_c)));
      const int n_test = std::max(1, static_cast<int>(std::lround(config.test_fraction * n_c)));
      const int n_train = n_c - n_val - n_test;
      if (n_train < 1)
        throw ValidationError("evaluate: class stratum too small for the split");
      for (int i = 0; i < n_c; ++i)
        (i < n_train ? train : i < n_train + n_val ? val : test).push_back(order[static_cast<std::size_t>(i)]);
    }

    Eigen::MatrixXd Xtr, Xva, Xte;
    Eigen::VectorXi ytr, yva, yte;
    gather(train, Xtr, ytr);
    gather(val, Xva, yva);
    gather(test, Xte, yte);
    const PcaModel pca = pca_fit(Xtr, config.variance_target);
    const Eigen::MatrixXd Ttr = pca_transform(pca, Xtr);
    const Eigen::MatrixXd Tva = pca_transform(pca, Xva);
    const Eigen::MatrixXd Tte = pca_transform(pca, Xte);

    const std::uint64_t forest_seed =
        derive_stream(config.seed, 23, static_cast<std::uint64_t>(r));
    double best_val_acc = -1.0;
    int best_depth = config.depth_grid.front();
    ForestModel best_model;
    for (const int depth : config.depth_grid) {
      ForestHyperParams hp = config.hp;
      hp.max_depth = depth;
      ForestModel model = forest_fit(Ttr, ytr, hp, forest_seed, config.workers);
      const double acc = accuracy_of(forest_predict_proba(model, Tva), yva);
      if (acc > best_val_acc) {
        best_val_acc = acc;
        best_depth = depth;
        best_model = std::move(model);
      }
    }

    const Eigen::VectorXd probs = forest_predict_proba(best_model, Tte);
    RepeatResult rr;
    rr.repeat = r;
    rr.selected_depth = best_depth;
    rr.accuracy = accuracy_of(probs, yte);
    rr.auc = auc_roc(probs, yte).auc;
    report.repeats.push_back(rr);
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      pooled_scores.push_back(probs[i]);
      pooled_labels.push_back(yte[i]);
    }
  }

  std::vector<double> accs, aucs;
  for (const RepeatResult& rr : report.repeats) {
    accs.push_back(rr.accuracy);
    aucs.push_back(rr.auc);
  }
  const MeanSd acc_ms = mean_sd(accs), auc_ms = mean_sd(aucs);
  report.accuracy_mean = acc_ms.mean;
  report.accuracy_sd = acc_ms.sd;
  report.auc_mean = auc_ms.mean;
  report.auc_sd = auc_ms.sd;

  Eigen::VectorXd ps(static_cast<Eigen::Index>(pooled_scores.size()));
  Eigen::VectorXi pl(static_cast<Eigen::Index>(pooled_labels.size()));
  for (std::size_t i = 0; i < pooled_scores.size(); ++i) {
    ps[static_cast<Eigen::Index>(i)] = pooled_scores[i];
    pl[static_cast<Eigen::Index>(i)] = pooled_labels[i];
  }
  const AucResult pooled = auc_roc(ps, pl);
  report.pooled_auc = pooled.auc;
  report.pooled_roc = pooled.points;
  return report;
}

}  // namespace radfid
