#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convodyn/features.hpp"

namespace convodyn::model {

// Internal nodes route x[feature] < threshold to `left`; a missing value
// follows the default direction learned during training. Leaves hold a raw
// log-odds weight that is scaled by the ensemble learning rate.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double leaf = 0.0;
  double cover = 0.0;  // hessian mass of the training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Index of the leaf that `x` lands in.
  int leaf_index(std::span<const double> x) const;
  double value(std::span<const double> x) const { return nodes[leaf_index(x)].leaf; }
  bool operator==(const Tree&) const = default;
};

struct TreeEnsemble {
  std::vector<Tree> trees;
  double learning_rate = 1.0;
  double base_score = 0.0;  // prior log-odds
  std::vector<std::string> schema;

  // base_score + learning_rate * sum of leaf weights.
  double margin(std::span<const double> x) const;
  // sigmoid(margin), kept strictly inside (0, 1).
  double predict_proba(std::span<const double> x) const;
  std::vector<double> predict_proba(const FeatureMatrix& matrix) const;

  // Throws ValidationError when the matrix columns differ from the schema.
  void check_schema(std::span<const std::string> names) const;
  void check_width(std::size_t width) const;

  bool operator==(const TreeEnsemble&) const = default;
};

double sigmoid(double margin);

struct HyperParams {
  int n_trees = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double subsample_ratio = 1.0;
  double colsample_ratio = 1.0;
  double l2_lambda = 1.0;
  double gamma_min_gain = 0.0;

  void validate() const;
  bool operator==(const HyperParams&) const = default;
};

// Downsamples the majority class without replacement to the minority count.
// Selected rows keep their original relative order.
FeatureMatrix undersample(const FeatureMatrix& matrix, std::uint64_t seed);

// Second-order boosting of regression trees on logistic loss with exact
// greedy split enumeration and learned missing-value directions.
TreeEnsemble fit_gbt(const FeatureMatrix& matrix, const HyperParams& params, std::uint64_t seed);

// Mean logistic loss of the ensemble over the matrix.
double log_loss(const TreeEnsemble& ensemble, const FeatureMatrix& matrix);

// Inclusive sampling ranges for random search. Integer ranges are uniform;
// learning_rate and l2_lambda are sampled log-uniformly.
struct SearchSpace {
  int max_depth_lo = 2, max_depth_hi = 8;
  double learning_rate_lo = 0.01, learning_rate_hi = 0.3;
  int n_trees_lo = 50, n_trees_hi = 400;
  double min_child_weight_lo = 1, min_child_weight_hi = 10;  // integer draws unless lo == hi
  double subsample_lo = 0.6, subsample_hi = 1.0;
  double colsample_lo = 0.6, colsample_hi = 1.0;
  double l2_lambda_lo = 0.1, l2_lambda_hi = 10.0;
  double gamma_lo = 0.0, gamma_hi = 1.0;

  static SearchSpace single_point(const HyperParams& params);
};

struct CandidateResult {
  HyperParams params;
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
  double std_auc = 0.0;
};

struct CvReport {
  std::vector<CandidateResult> candidates;  // in sampling order
  std::size_t best = 0;                     // first candidate with the top mean AUC
  std::uint64_t seed = 0;
  int folds = 0;
};

struct SearchResult {
  HyperParams best;
  CvReport report;
};

std::vector<HyperParams> sample_candidates(const SearchSpace& space, int n_candidates, std::uint64_t seed);

// Fold index per row; each class is shuffled and dealt round-robin so fold
// class counts differ by at most one. Throws if a class has fewer rows than
// folds.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

SearchResult random_search(const FeatureMatrix& matrix, const SearchSpace& space, int n_candidates, int folds,
                           std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const TreeEnsemble& ensemble);
TreeEnsemble parse_model(std::string_view json_text);
void save_model(const TreeEnsemble& ensemble, const std::filesystem::path& path);
TreeEnsemble load_model(const std::filesystem::path& path);

}  // namespace convodyn::model
