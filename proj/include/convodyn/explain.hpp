#pragma once

#include <span>
#include <string>
#include <vector>

#include "convodyn/features.hpp"
#include "convodyn/model.hpp"

namespace convodyn::explain {

// Shapley attribution of the ensemble margin (log-odds). base_value is the
// margin expected under the cover-weighted path distribution of the trees, so
// base_value + sum(contributions) equals the margin of the explained row.
struct Attribution {
  std::string user_id;
  double base_value = 0.0;
  std::vector<double> contributions;  // one per schema feature
};

// Cover-weighted mean leaf value of a tree.
double expected_value(const model::Tree& tree);
double expected_margin(const model::TreeEnsemble& ensemble);

// Exact TreeSHAP over the path-dependent (cover-weighted) game. Missing
// values follow default directions as in prediction.
Attribution tree_shap(const model::TreeEnsemble& ensemble, std::span<const double> x);

// Contributions of a single tree before learning-rate scaling.
std::vector<double> tree_shap_single(const model::Tree& tree, std::span<const double> x, std::size_t n_features);

struct FeatureSummary {
  std::string feature;
  double mean_abs = 0.0;
  // Pearson correlation between feature value and contribution over rows
  // where the feature is present; 0 when undefined.
  double sign_alignment = 0.0;
};

// Features ranked by mean |contribution|, largest first (schema order on ties).
struct ShapSummary {
  std::vector<FeatureSummary> features;

  const FeatureSummary& at(std::string_view name) const;
};

std::vector<Attribution> attribute(const model::TreeEnsemble& ensemble, const FeatureMatrix& matrix);
ShapSummary summarize(const FeatureMatrix& matrix, std::span<const Attribution> attributions);
ShapSummary shap_summary(const model::TreeEnsemble& ensemble, const FeatureMatrix& matrix);

std::string attributions_csv(std::span<const std::string> schema, std::span<const Attribution> attributions);
std::string summary_csv(const ShapSummary& summary);

}  // namespace convodyn::explain
