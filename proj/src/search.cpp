#include <algorithm>
#include <cmath>
#include <numeric>

#include "convodyn/error.hpp"
#include "convodyn/eval.hpp"
#include "convodyn/model.hpp"
#include "convodyn/rng.hpp"

namespace convodyn::model {

SearchSpace SearchSpace::single_point(const HyperParams& p) {
  SearchSpace s;
  s.max_depth_lo = s.max_depth_hi = p.max_depth;
  s.learning_rate_lo = s.learning_rate_hi = p.learning_rate;
  s.n_trees_lo = s.n_trees_hi = p.n_trees;
  s.subsample_lo = s.subsample_hi = p.subsample_ratio;
  s.colsample_lo = s.colsample_hi = p.colsample_ratio;
  s.l2_lambda_lo = s.l2_lambda_hi = p.l2_lambda;
  s.gamma_lo = s.gamma_hi = p.gamma_min_gain;
  s.min_child_weight_lo = s.min_child_weight_hi = p.min_child_weight;
  return s;
}

std::vector<HyperParams> sample_candidates(const SearchSpace& space, int n_candidates, std::uint64_t seed) {
  if (n_candidates < 1) throw ValidationError("random search needs at least one candidate");
  Rng rng(seed);
  auto log_uniform = [&](double lo, double hi) { return lo == hi ? lo : rng.log_uniform(lo, hi); };
  auto uniform = [&](double lo, double hi) { return lo == hi ? lo : rng.uniform(lo, hi); };
  std::vector<HyperParams> out;
  for (int i = 0; i < n_candidates; ++i) {
    HyperParams p;
    p.max_depth = static_cast<int>(rng.between(space.max_depth_lo, space.max_depth_hi));
    p.learning_rate = log_uniform(space.learning_rate_lo, space.learning_rate_hi);
    p.n_trees = static_cast<int>(rng.between(space.n_trees_lo, space.n_trees_hi));
    p.min_child_weight = space.min_child_weight_lo == space.min_child_weight_hi
                             ? space.min_child_weight_lo
                             : static_cast<double>(rng.between(static_cast<std::int64_t>(std::ceil(space.min_child_weight_lo)),
                                                               static_cast<std::int64_t>(std::floor(space.min_child_weight_hi))));
    p.subsample_ratio = uniform(space.subsample_lo, space.subsample_hi);
    p.colsample_ratio = uniform(space.colsample_lo, space.colsample_hi);
    p.l2_lambda = log_uniform(space.l2_lambda_lo, space.l2_lambda_hi);
    p.gamma_min_gain = uniform(space.gamma_lo, space.gamma_hi);
    p.validate();
    out.push_back(p);
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least two folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(folds)) {
      throw ValidationError("stratified " + std::to_string(folds) + "-fold split impossible: class " +
                            std::to_string(c) + " has only " + std::to_string(by_class[c].size()) + " rows");
    }
  }
  Rng rng(seed);
  std::vector<int> fold_of(labels.size(), 0);
  int offset = 0;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span<std::size_t>(by_class[c]));
    for (std::size_t k = 0; k < by_class[c].size(); ++k) {
      fold_of[by_class[c][k]] = static_cast<int>((k + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
    }
    // Continue the deal where the previous class stopped so fold sizes balance.
    offset = static_cast<int>((static_cast<std::size_t>(offset) + by_class[c].size()) % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

SearchResult random_search(const FeatureMatrix& matrix, const SearchSpace& space, int n_candidates, int folds,
                           std::uint64_t seed) {
  const auto fold_of = stratified_folds(matrix.labels, folds, Rng::derive(seed, 0));
  auto candidates = sample_candidates(space, n_candidates, Rng::derive(seed, 1));

  std::vector<FeatureMatrix> train_parts, valid_parts;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t r = 0; r < matrix.n_rows(); ++r) (fold_of[r] == f ? valid_rows : train_rows).push_back(r);
    train_parts.push_back(matrix.select_rows(train_rows));
    valid_parts.push_back(matrix.select_rows(valid_rows));
  }

  SearchResult result;
  result.report.seed = seed;
  result.report.folds = folds;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    CandidateResult cr;
    cr.params = candidates[c];
    for (int f = 0; f < folds; ++f) {
      const std::uint64_t fit_seed = Rng::derive(seed, 1000 + c * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f));
      const TreeEnsemble ens = fit_gbt(train_parts[f], cr.params, fit_seed);
      cr.fold_auc.push_back(eval::auc(ens.predict_proba(valid_parts[f]), valid_parts[f].labels));
    }
    const double n = static_cast<double>(cr.fold_auc.size());
    cr.mean_auc = std::accumulate(cr.fold_auc.begin(), cr.fold_auc.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : cr.fold_auc) ss += (a - cr.mean_auc) * (a - cr.mean_auc);
    cr.std_auc = std::sqrt(ss / n);
    result.report.candidates.push_back(std::move(cr));
  }
  for (std::size_t c = 1; c < result.report.candidates.size(); ++c) {
    if (result.report.candidates[c].mean_auc > result.report.candidates[result.report.best].mean_auc) {
      result.report.best = c;
    }
  }
  result.best = result.report.candidates[result.report.best].params;
  return result;
}

}  // namespace convodyn::model
