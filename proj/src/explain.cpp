#include "convodyn/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convodyn/error.hpp"
#include "convodyn/io.hpp"

namespace convodyn::explain {

namespace {

// One entry of the unique feature path from the root to the current node.
// zero_fraction: share of cover flowing this way when the feature is unknown;
// one_fraction: 1 if x itself flows this way, else 0; weight: the permutation
// weight of subsets of the given size.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction, int feature) {
  path[depth] = PathElement{feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      next_one_portion = tmp - path[i].weight * zero_fraction * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero_fraction * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total permutation weight of the path with element `index` removed.
double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      total += tmp;
      next_one_portion = path[i].weight - tmp * zero_fraction * ((depth - i) / static_cast<double>(depth + 1));
    } else if (zero_fraction != 0.0) {
      total += (path[i].weight / zero_fraction) / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

class ShapWalker {
 public:
  ShapWalker(const model::Tree& tree, std::span<const double> x, std::span<double> phi)
      : tree_(tree), x_(x), phi_(phi) {
    const int max_depth = depth_of(0);
    storage_.resize(static_cast<std::size_t>((max_depth + 2) * (max_depth + 3) / 2));
  }

  void run() { recurse(0, 0, storage_.data(), 1.0, 1.0, -1); }

 private:
  int depth_of(int id) const {
    const auto& n = tree_.nodes[id];
    return n.is_leaf() ? 0 : 1 + std::max(depth_of(n.left), depth_of(n.right));
  }

  void recurse(int id, int depth, PathElement* parent_path, double parent_zero, double parent_one,
               int parent_feature) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, parent_zero, parent_one, parent_feature);

    const model::TreeNode& node = tree_.nodes[id];
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const PathElement& el = path[i];
        phi_[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * node.leaf;
      }
      return;
    }

    const double v = x_[static_cast<std::size_t>(node.feature)];
    const bool go_left = is_missing(v) ? node.default_left : v < node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;
    const double hot_zero = tree_.nodes[hot].cover / node.cover;
    const double cold_zero = tree_.nodes[cold].cover / node.cover;

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    int index = 0;
    for (; index <= depth; ++index) {
      if (path[index].feature == node.feature) break;
    }
    // A feature already on the path is removed and re-added with the
    // combined fractions of both of its splits.
    if (index != depth + 1) {
      incoming_zero = path[index].zero_fraction;
      incoming_one = path[index].one_fraction;
      unwind_path(path, depth, index);
      depth -= 1;
    }
    recurse(hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, node.feature);
    recurse(cold, depth + 1, path, cold_zero * incoming_zero, 0.0, node.feature);
  }

  const model::Tree& tree_;
  std::span<const double> x_;
  std::span<double> phi_;
  std::vector<PathElement> storage_;
};

void require_cover(const model::Tree& tree) {
  for (const auto& n : tree.nodes) {
    if (!n.is_leaf() && !(n.cover > 0.0)) {
      throw ValidationError("tree lacks cover statistics needed for attribution");
    }
  }
}

}  // namespace

double expected_value(const model::Tree& tree) {
  require_cover(tree);
  auto walk = [&](auto&& self, int id) -> double {
    const auto& n = tree.nodes[id];
    if (n.is_leaf()) return n.leaf;
    return (tree.nodes[n.left].cover * self(self, n.left) + tree.nodes[n.right].cover * self(self, n.right)) /
           n.cover;
  };
  return walk(walk, 0);
}

double expected_margin(const model::TreeEnsemble& ensemble) {
  double sum = 0.0;
  for (const auto& t : ensemble.trees) sum += expected_value(t);
  return ensemble.base_score + ensemble.learning_rate * sum;
}

std::vector<double> tree_shap_single(const model::Tree& tree, std::span<const double> x, std::size_t n_features) {
  require_cover(tree);
  std::vector<double> phi(n_features, 0.0);
  ShapWalker(tree, x, phi).run();
  return phi;
}

Attribution tree_shap(const model::TreeEnsemble& ensemble, std::span<const double> x) {
  ensemble.check_width(x.size());
  Attribution a;
  a.base_value = expected_margin(ensemble);
  a.contributions.assign(x.size(), 0.0);
  std::vector<double> phi(x.size());
  for (const auto& tree : ensemble.trees) {
    std::fill(phi.begin(), phi.end(), 0.0);
    ShapWalker(tree, x, phi).run();
    for (std::size_t f = 0; f < phi.size(); ++f) a.contributions[f] += ensemble.learning_rate * phi[f];
  }
  return a;
}

const FeatureSummary& ShapSummary::at(std::string_view name) const {
  for (const auto& f : features) {
    if (f.feature == name) return f;
  }
  throw ValidationError("feature '" + std::string(name) + "' not in SHAP summary");
}

std::vector<Attribution> attribute(const model::TreeEnsemble& ensemble, const FeatureMatrix& matrix) {
  ensemble.check_schema(matrix.schema);
  std::vector<Attribution> out;
  out.reserve(matrix.n_rows());
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    Attribution a = tree_shap(ensemble, matrix.rows[r]);
    a.user_id = matrix.user_ids[r];
    out.push_back(std::move(a));
  }
  return out;
}

ShapSummary summarize(const FeatureMatrix& matrix, std::span<const Attribution> attributions) {
  if (attributions.size() != matrix.n_rows()) throw ValidationError("one attribution per matrix row required");
  if (matrix.n_rows() == 0) throw ContractError("SHAP summary of an empty matrix");
  ShapSummary summary;
  const double n = static_cast<double>(matrix.n_rows());
  for (std::size_t f = 0; f < matrix.n_features(); ++f) {
    FeatureSummary fs;
    fs.feature = matrix.schema[f];
    std::vector<double> xs, phis;
    for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
      const double phi = attributions[r].contributions[f];
      fs.mean_abs += std::abs(phi);
      if (!is_missing(matrix.rows[r][f])) {
        xs.push_back(matrix.rows[r][f]);
        phis.push_back(phi);
      }
    }
    fs.mean_abs /= n;
    if (xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      const double mp = std::accumulate(phis.begin(), phis.end(), 0.0) / static_cast<double>(phis.size());
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (phis[i] - mp);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (phis[i] - mp) * (phis[i] - mp);
      }
      if (sxx > 0.0 && syy > 0.0) fs.sign_alignment = sxy / std::sqrt(sxx * syy);
    }
    summary.features.push_back(std::move(fs));
  }
  std::stable_sort(summary.features.begin(), summary.features.end(),
                   [](const FeatureSummary& a, const FeatureSummary& b) { return a.mean_abs > b.mean_abs; });
  return summary;
}

ShapSummary shap_summary(const model::TreeEnsemble& ensemble, const FeatureMatrix& matrix) {
  const auto attributions = attribute(ensemble, matrix);
  return summarize(matrix, attributions);
}

std::string attributions_csv(std::span<const std::string> schema, std::span<const Attribution> attributions) {
  std::string out = "user_id,base_value";
  for (const auto& name : schema) out += "," + io::csv_escape(name);
  out += '\n';
  for (const auto& a : attributions) {
    out += io::csv_escape(a.user_id) + "," + io::format_double(a.base_value);
    for (double c : a.contributions) out += "," + io::format_double(c);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const ShapSummary& summary) {
  std::string out = "rank,feature,mean_abs_contribution,sign_alignment\n";
  for (std::size_t i = 0; i < summary.features.size(); ++i) {
    const auto& f = summary.features[i];
    out += std::to_string(i + 1) + "," + io::csv_escape(f.feature) + "," + io::format_double(f.mean_abs) + "," +
           io::format_double(f.sign_alignment) + "\n";
  }
  return out;
}

}  // namespace convodyn::explain
