#pragma once

// Slow, obviously-correct reference implementations used to check the
// library. None of them share code with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "convodyn/features.hpp"
#include "convodyn/model.hpp"
#include "convodyn/rng.hpp"

namespace oracle {

using convodyn::is_missing;

// P(random positive outranks random negative), ties count half.
inline double pair_count_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (int y : labels) (y == 1 ? pos : neg) += 1.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

inline double squared_error(std::span<const double> y, double slope, double intercept) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - (intercept + slope * static_cast<double>(i));
    s += r * r;
  }
  return s;
}

// Slope minimizing squared error, found by zooming a grid over the slope with
// the intercept profiled out (best intercept for a fixed slope is the mean
// residual). The profile is a convex parabola, so the minimizer always lies
// within one grid step of the best grid point.
inline double grid_search_slope(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  auto profile = [&](double slope) {
    double mean_resid = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) mean_resid += y[i] - slope * static_cast<double>(i);
    return squared_error(y, slope, mean_resid / n);
  };
  double lo = -100.0, hi = 100.0;
  constexpr int kSteps = 40;
  while (hi - lo > 1e-10) {
    const double step = (hi - lo) / kSteps;
    double best = lo, best_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kSteps; ++k) {
      const double s = lo + step * k;
      const double e = profile(s);
      if (e < best_err) {
        best_err = e;
        best = s;
      }
    }
    lo = best - step;
    hi = best + step;
  }
  return 0.5 * (lo + hi);
}

// One candidate split of the exhaustive depth-1 search.
struct Split {
  int feature = -1;
  std::vector<bool> goes_left;  // per row
  double gain = 0.0;
};

// Every partition of rows expressible as "value below a cut between two
// adjacent distinct values", with missing rows sent either way, scored by the
// second-order logistic gain at the prior log-odds. Returns the best gain
// (0 when no split beats the leaf) and all splits achieving it.
inline std::vector<Split> best_depth1_splits(const convodyn::FeatureMatrix& m, double lambda,
                                             double min_child_weight, double& best_gain) {
  const std::size_t n = m.n_rows();
  double pos = 0.0;
  for (int y : m.labels) pos += y;
  const double p = pos / static_cast<double>(n);
  std::vector<double> g(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = p - m.labels[i];
    h[i] = p * (1.0 - p);
  }
  auto score = [&](double G, double H) { return G * G / (H + lambda); };
  double G = 0.0, H = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    G += g[i];
    H += h[i];
  }

  std::vector<Split> all;
  for (std::size_t f = 0; f < m.n_features(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_missing(m.rows[i][f])) values.push_back(m.rows[i][f]);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t cut = 1; cut < values.size(); ++cut) {
      for (int missing_left = 0; missing_left < 2; ++missing_left) {
        Split s;
        s.feature = static_cast<int>(f);
        s.goes_left.resize(n);
        double GL = 0.0, HL = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = m.rows[i][f];
          const bool left = is_missing(v) ? missing_left == 1 : v < values[cut];
          s.goes_left[i] = left;
          if (left) {
            GL += g[i];
            HL += h[i];
          }
        }
        const double GR = G - GL, HR = H - HL;
        if (HL < min_child_weight || HR < min_child_weight) continue;
        s.gain = 0.5 * (score(GL, HL) + score(GR, HR) - score(G, H));
        all.push_back(std::move(s));
      }
    }
  }
  best_gain = 0.0;
  for (const auto& s : all) best_gain = std::max(best_gain, s.gain);
  std::vector<Split> best;
  for (auto& s : all) {
    if (best_gain > 0.0 && s.gain >= best_gain - 1e-12 * std::max(1.0, best_gain)) best.push_back(std::move(s));
  }
  return best;
}

// Expected margin of one tree when only the features in `known` are
// observed: known features route like prediction, unknown ones average the
// children by cover.
inline double conditional_value(const convodyn::model::Tree& tree, std::span<const double> x,
                                const std::vector<bool>& known, int id = 0) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  if (node.is_leaf()) return node.leaf;
  const auto f = static_cast<std::size_t>(node.feature);
  if (known[f]) {
    const double v = x[f];
    const bool left = is_missing(v) ? node.default_left : v < node.threshold;
    return conditional_value(tree, x, known, left ? node.left : node.right);
  }
  const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
  const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
  return (l.cover * conditional_value(tree, x, known, node.left) +
          r.cover * conditional_value(tree, x, known, node.right)) /
         (l.cover + r.cover);
}

inline double ensemble_value(const convodyn::model::TreeEnsemble& e, std::span<const double> x,
                             const std::vector<bool>& known) {
  double s = 0.0;
  for (const auto& t : e.trees) s += conditional_value(t, x, known);
  return e.base_score + e.learning_rate * s;
}

// Shapley values by enumerating all 2^m coalitions.
inline std::vector<double> brute_force_shapley(const convodyn::model::TreeEnsemble& e, std::span<const double> x) {
  const std::size_t m = x.size();
  std::vector<double> fact(m + 1, 1.0);
  for (std::size_t k = 1; k <= m; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);
  std::vector<double> phi(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      if (mask & (std::size_t{1} << i)) continue;
      std::vector<bool> known(m);
      std::size_t size = 0;
      for (std::size_t j = 0; j < m; ++j) {
        known[j] = (mask >> j) & 1;
        size += known[j];
      }
      const double without = ensemble_value(e, x, known);
      known[i] = true;
      const double with = ensemble_value(e, x, known);
      phi[i] += fact[size] * fact[m - size - 1] / fact[m] * (with - without);
    }
  }
  return phi;
}

// Random tree of depth <= max_depth over n_features features, with cover
// consistent top-down (children covers sum to the parent's).
inline convodyn::model::Tree random_tree(convodyn::Rng& rng, std::size_t n_features, int max_depth) {
  convodyn::model::Tree t;
  auto grow = [&](auto&& self, int depth, double cover) -> int {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[id].cover = cover;
    if (depth == max_depth || (depth > 0 && rng.bernoulli(0.25))) {
      t.nodes[id].leaf = rng.uniform(-1.0, 1.0);
      return id;
    }
    const double share = rng.uniform(0.1, 0.9);
    t.nodes[id].feature = static_cast<int>(rng.below(n_features));
    t.nodes[id].threshold = rng.uniform(-1.0, 1.0);
    t.nodes[id].default_left = rng.bernoulli(0.5);
    const int l = self(self, depth + 1, cover * share);
    const int r = self(self, depth + 1, cover * (1.0 - share));
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
  };
  grow(grow, 0, rng.uniform(10.0, 100.0));
  return t;
}

inline convodyn::model::TreeEnsemble random_ensemble(convodyn::Rng& rng, std::size_t n_features, int n_trees,
                                                     int max_depth) {
  convodyn::model::TreeEnsemble e;
  for (std::size_t f = 0; f < n_features; ++f) e.schema.push_back("f" + std::to_string(f));
  e.base_score = rng.uniform(-1.0, 1.0);
  e.learning_rate = rng.uniform(0.05, 1.0);
  for (int k = 0; k < n_trees; ++k) e.trees.push_back(random_tree(rng, n_features, max_depth));
  return e;
}

// x with values in [-1.2, 1.2] and the given chance of each being missing.
inline std::vector<double> random_input(convodyn::Rng& rng, std::size_t n, double missing_rate) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.bernoulli(missing_rate) ? convodyn::kMissing : rng.uniform(-1.2, 1.2);
  return x;
}

// Random labeled matrix with a weak dependence of the label on feature 0.
inline convodyn::FeatureMatrix random_matrix(convodyn::Rng& rng, std::size_t rows, std::size_t features,
                                             double missing_rate) {
  convodyn::FeatureMatrix m;
  for (std::size_t f = 0; f < features; ++f) m.schema.push_back("f" + std::to_string(f));
  do {
    m.rows.clear();
    m.labels.clear();
    m.user_ids.clear();
    for (std::size_t r = 0; r < rows; ++r) {
      auto x = random_input(rng, features, missing_rate);
      const double signal = is_missing(x[0]) ? 0.0 : x[0];
      m.labels.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-2.0 * signal))) ? 1 : 0);
      m.rows.push_back(std::move(x));
      m.user_ids.push_back("r" + std::to_string(r));
    }
  } while (m.count_label(1) == 0 || m.count_label(0) == 0);
  return m;
}

}  // namespace oracle
