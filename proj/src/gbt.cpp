#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "convodyn/error.hpp"
#include "convodyn/model.hpp"
#include "convodyn/rng.hpp"

namespace convodyn::model {

double sigmoid(double margin) {
  const double p = 1.0 / (1.0 + std::exp(-margin));
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

int Tree::leaf_index(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    const double v = x[static_cast<std::size_t>(n.feature)];
    if (is_missing(v)) {
      i = n.default_left ? n.left : n.right;
    } else {
      i = v < n.threshold ? n.left : n.right;
    }
  }
  return i;
}

double TreeEnsemble::margin(std::span<const double> x) const {
  check_width(x.size());
  double sum = 0.0;
  for (const auto& t : trees) sum += t.value(x);
  return base_score + learning_rate * sum;
}

double TreeEnsemble::predict_proba(std::span<const double> x) const { return sigmoid(margin(x)); }

std::vector<double> TreeEnsemble::predict_proba(const FeatureMatrix& matrix) const {
  check_schema(matrix.schema);
  std::vector<double> out;
  out.reserve(matrix.n_rows());
  for (const auto& row : matrix.rows) out.push_back(predict_proba(row));
  return out;
}

void TreeEnsemble::check_schema(std::span<const std::string> names) const {
  if (!std::equal(names.begin(), names.end(), schema.begin(), schema.end())) {
    throw ValidationError("feature schema does not match the model schema");
  }
}

void TreeEnsemble::check_width(std::size_t width) const {
  if (width != schema.size()) {
    throw ValidationError("feature vector has " + std::to_string(width) + " values, model expects " +
                          std::to_string(schema.size()));
  }
}

void HyperParams::validate() const {
  if (n_trees < 0) throw ValidationError("n_trees must be non-negative");
  if (max_depth < 1) throw ValidationError("max_depth must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(min_child_weight >= 0.0)) throw ValidationError("min_child_weight must be non-negative");
  if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0)) throw ValidationError("subsample_ratio must be in (0, 1]");
  if (!(colsample_ratio > 0.0 && colsample_ratio <= 1.0)) throw ValidationError("colsample_ratio must be in (0, 1]");
  if (!(l2_lambda >= 0.0)) throw ValidationError("l2_lambda must be non-negative");
  if (!(gamma_min_gain >= 0.0)) throw ValidationError("gamma_min_gain must be non-negative");
}

namespace {

void require_both_classes(const FeatureMatrix& m, const char* what) {
  const std::size_t pos = m.count_label(1);
  if (pos == 0 || pos == m.n_rows()) {
    throw ValidationError(std::string(what) + " needs both classes present");
  }
}

std::vector<std::size_t> choose(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;
  double left_g = 0.0, left_h = 0.0;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

// Grows trees level by level. Each feature column is pre-sorted once per fit;
// a level scans every sorted column once, accumulating left statistics per
// open node.
class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& matrix, const HyperParams& params) : params_(params) {
    n_rows_ = matrix.n_rows();
    n_features_ = matrix.n_features();
    columns_.assign(n_features_, std::vector<double>(n_rows_));
    sorted_.resize(n_features_);
    missing_.resize(n_features_);
    for (std::size_t f = 0; f < n_features_; ++f) {
      for (std::size_t r = 0; r < n_rows_; ++r) {
        const double v = matrix.rows[r][f];
        columns_[f][r] = v;
        (is_missing(v) ? missing_[f] : sorted_[f]).push_back(static_cast<int>(r));
      }
      std::stable_sort(sorted_[f].begin(), sorted_[f].end(),
                       [&](int a, int b) { return columns_[f][a] < columns_[f][b]; });
    }
  }

  double column(std::size_t f, std::size_t r) const { return columns_[f][r]; }

  Tree grow(std::span<const double> grad, std::span<const double> hess, std::span<const std::size_t> sample,
            std::span<const std::size_t> features) {
    Tree tree;
    node_of_.assign(n_rows_, -1);
    NodeStats root;
    for (std::size_t r : sample) {
      node_of_[r] = 0;
      root.g += grad[r];
      root.h += hess[r];
    }
    tree.nodes.push_back(make_leaf(root));
    std::vector<NodeStats> stats{root};
    std::vector<int> frontier{0};

    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      slot_of_.assign(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot_of_[frontier[s]] = static_cast<int>(s);
      std::vector<Split> best(frontier.size());
      std::vector<NodeStats> open(frontier.size());
      for (std::size_t s = 0; s < frontier.size(); ++s) open[s] = stats[frontier[s]];

      for (std::size_t f : features) scan_feature(f, grad, hess, open, best);

      std::vector<int> next;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        const Split& sp = best[s];
        if (sp.feature < 0) continue;
        const int id = frontier[s];
        const NodeStats left{sp.left_g, sp.left_h};
        const NodeStats right{open[s].g - sp.left_g, open[s].h - sp.left_h};
        TreeNode& node = tree.nodes[id];
        node.feature = sp.feature;
        node.threshold = sp.threshold;
        node.default_left = sp.default_left;
        node.leaf = 0.0;
        const int child = static_cast<int>(tree.nodes.size());
        node.left = child;
        node.right = child + 1;
        // push_back may reallocate, so `node` is dead from here on.
        tree.nodes.push_back(make_leaf(left));
        tree.nodes.push_back(make_leaf(right));
        stats.push_back(left);
        stats.push_back(right);
        next.push_back(child);
        next.push_back(child + 1);
      }
      if (next.empty()) break;
      for (std::size_t r : sample) {
        const int id = node_of_[r];
        const TreeNode& n = tree.nodes[id];
        if (n.is_leaf()) continue;
        const double v = columns_[n.feature][r];
        const bool go_left = is_missing(v) ? n.default_left : v < n.threshold;
        node_of_[r] = go_left ? n.left : n.right;
      }
      frontier = std::move(next);
    }
    return tree;
  }

 private:
  TreeNode make_leaf(const NodeStats& s) const {
    TreeNode leaf;
    const double denom = s.h + params_.l2_lambda;
    leaf.leaf = denom > 0.0 ? -s.g / denom : 0.0;
    leaf.cover = s.h;
    return leaf;
  }

  double score(double g, double h) const {
    const double denom = h + params_.l2_lambda;
    return denom > 0.0 ? g * g / denom : 0.0;
  }

  void consider(Split& best, const NodeStats& node, int feature, double threshold, bool default_left, double gl,
                double hl) const {
    const double hr = node.h - hl;
    if (hl < params_.min_child_weight || hr < params_.min_child_weight) return;
    const double gr = node.g - gl;
    const double gain =
        0.5 * (score(gl, hl) + score(gr, hr) - score(node.g, node.h)) - params_.gamma_min_gain;
    if (gain > best.gain) {
      best = Split{feature, threshold, default_left, gain, gl, hl};
    }
  }

  void scan_feature(std::size_t f, std::span<const double> grad, std::span<const double> hess,
                    const std::vector<NodeStats>& open, std::vector<Split>& best) {
    const std::size_t slots = open.size();
    std::vector<NodeStats> miss(slots);
    for (int r : missing_[f]) {
      const int s = slot(r);
      if (s < 0) continue;
      miss[s].g += grad[r];
      miss[s].h += hess[r];
    }
    std::vector<NodeStats> acc(slots);
    std::vector<double> last(slots, 0.0);
    std::vector<char> seen(slots, 0);
    const int feature = static_cast<int>(f);
    for (int r : sorted_[f]) {
      const int s = slot(r);
      if (s < 0) continue;
      const double v = columns_[f][r];
      if (seen[s] && v != last[s]) {
        double threshold = last[s] + (v - last[s]) / 2.0;
        if (!(threshold > last[s])) threshold = v;  // adjacent doubles
        // Missing-left is tried first so it wins ties.
        consider(best[s], open[s], feature, threshold, true, acc[s].g + miss[s].g, acc[s].h + miss[s].h);
        consider(best[s], open[s], feature, threshold, false, acc[s].g, acc[s].h);
      }
      acc[s].g += grad[r];
      acc[s].h += hess[r];
      last[s] = v;
      seen[s] = 1;
    }
  }

  int slot(int row) const {
    const int id = node_of_[row];
    return id < 0 ? -1 : slot_of_[id];
  }

  const HyperParams& params_;
  std::size_t n_rows_ = 0;
  std::size_t n_features_ = 0;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<int>> sorted_;
  std::vector<std::vector<int>> missing_;
  std::vector<int> node_of_;
  std::vector<int> slot_of_;
};

}  // namespace

FeatureMatrix undersample(const FeatureMatrix& matrix, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) by_class[matrix.labels[r] == 1 ? 1 : 0].push_back(r);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ValidationError("undersampling needs both classes present");
  }
  const int majority = by_class[1].size() > by_class[0].size() ? 1 : 0;
  const std::size_t keep = by_class[1 - majority].size();
  Rng rng(seed);
  std::vector<std::size_t> picked = choose(rng, by_class[majority].size(), keep);
  std::vector<std::size_t> rows = by_class[1 - majority];
  for (std::size_t i : picked) rows.push_back(by_class[majority][i]);
  std::sort(rows.begin(), rows.end());
  return matrix.select_rows(rows);
}

TreeEnsemble fit_gbt(const FeatureMatrix& matrix, const HyperParams& params, std::uint64_t seed) {
  params.validate();
  if (matrix.n_rows() < 2) throw ValidationError("training needs at least two rows");
  require_both_classes(matrix, "training");
  for (const auto& row : matrix.rows) {
    if (row.size() != matrix.n_features()) throw ValidationError("training matrix is not rectangular");
  }

  TreeEnsemble ensemble;
  ensemble.schema = matrix.schema;
  ensemble.learning_rate = params.learning_rate;
  const double prior = static_cast<double>(matrix.count_label(1)) / static_cast<double>(matrix.n_rows());
  ensemble.base_score = std::log(prior / (1.0 - prior));
  if (params.n_trees == 0 || matrix.n_features() == 0) return ensemble;

  const std::size_t n = matrix.n_rows();
  const std::size_t m = matrix.n_features();
  const std::size_t sample_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.subsample_ratio * static_cast<double>(n))));
  const std::size_t feature_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.colsample_ratio * static_cast<double>(m))));

  TreeGrower grower(matrix, params);
  Rng rng(seed);
  std::vector<double> margin(n, ensemble.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<double> row_buf(m);
  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      const double p = 1.0 / (1.0 + std::exp(-margin[r]));
      grad[r] = p - static_cast<double>(matrix.labels[r]);
      hess[r] = p * (1.0 - p);
    }
    const auto sample = choose(rng, n, sample_size);
    const auto features = choose(rng, m, feature_count);
    Tree tree = grower.grow(grad, hess, sample, features);
    for (std::size_t r = 0; r < n; ++r) margin[r] += params.learning_rate * tree.value(matrix.rows[r]);
    ensemble.trees.push_back(std::move(tree));
  }
  return ensemble;
}

double log_loss(const TreeEnsemble& ensemble, const FeatureMatrix& matrix) {
  ensemble.check_schema(matrix.schema);
  double total = 0.0;
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    const double m = ensemble.margin(matrix.rows[r]);
    // log(1 + exp(-y*m)) with y in {-1, +1}, evaluated stably.
    const double z = matrix.labels[r] == 1 ? m : -m;
    total += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return total / static_cast<double>(matrix.n_rows());
}

}  // namespace convodyn::model
