#pragma once

#include <span>
#include <string>
#include <vector>

#include "convodyn/features.hpp"
#include "convodyn/model.hpp"

namespace convodyn::eval {

// Probability that a random positive outranks a random negative, ties
// counting one half.
double auc(std::span<const double> scores, std::span<const int> labels);

// Largest gap between the per-class empirical CDFs of the scores.
double ks(std::span<const double> scores, std::span<const int> labels);

struct ClassificationMetrics {
  double macro_f1 = 0.0;
  double specificity = 0.0;
};

// Predicts promoter when score >= threshold. Non-promoter is the negative
// class for specificity.
ClassificationMetrics macro_f1_and_specificity(std::span<const double> scores, std::span<const int> labels,
                                               double threshold = 0.5);

struct ScorecardBin {
  double lo = 0.0;
  double hi = 0.0;
  int count_promoter = 0;
  int count_non_promoter = 0;

  int total() const { return count_promoter + count_non_promoter; }
};

// Ten bins of width 0.1 over [0, 1]; the last bin also holds 1.0.
std::vector<ScorecardBin> scorecard(std::span<const double> scores, std::span<const int> labels);

struct MonotonicityCheck {
  bool holds = true;
  std::vector<std::size_t> bins_checked;        // bins with at least min_count samples
  std::vector<double> non_promoter_fraction;  // parallel to bins_checked
};

// Whether the non-promoter share does not increase with score across bins
// holding at least `min_count` samples.
MonotonicityCheck scorecard_monotonicity(std::span<const ScorecardBin> bins, int min_count = 30);

struct EvaluationReport {
  std::string experiment;
  double auc = 0.0;
  double ks = 0.0;
  double macro_f1 = 0.0;
  double specificity = 0.0;
  double threshold = 0.5;
  std::size_t n_test = 0;
};

struct Evaluation {
  EvaluationReport report;
  std::vector<ScorecardBin> scorecard;
  std::vector<double> scores;
};

Evaluation evaluate(const model::TreeEnsemble& ensemble, const FeatureMatrix& test, double threshold = 0.5);

std::string report_json(const EvaluationReport& report);
std::string scorecard_csv(std::span<const ScorecardBin> bins);

}  // namespace convodyn::eval
