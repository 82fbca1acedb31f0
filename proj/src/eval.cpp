#include "convodyn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "convodyn/error.hpp"
#include "convodyn/io.hpp"

namespace convodyn::eval {

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels, const char* metric) {
  if (scores.size() != labels.size()) {
    throw ValidationError(std::string(metric) + ": scores and labels differ in length");
  }
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) {
      ++c.pos;
    } else if (y == 0) {
      ++c.neg;
    } else {
      throw ValidationError(std::string(metric) + ": labels must be 0 or 1");
    }
  }
  if (c.pos == 0 || c.neg == 0) throw ValidationError(std::string(metric) + " is undefined with a single class");
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "AUC");
  const auto idx = order_by_score(scores);
  // Doubled win count keeps the half-credit for ties in integers.
  unsigned long long twice_wins = 0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos_here = 0, neg_here = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? pos_here : neg_here)++;
      ++j;
    }
    twice_wins += 2ULL * pos_here * neg_below + static_cast<unsigned long long>(pos_here) * neg_here;
    neg_below += neg_here;
    i = j;
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

double ks(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "KS");
  const auto idx = order_by_score(scores);
  std::size_t pos_seen = 0, neg_seen = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? pos_seen : neg_seen)++;
      ++j;
    }
    const double gap = std::abs(static_cast<double>(pos_seen) / static_cast<double>(c.pos) -
                                static_cast<double>(neg_seen) / static_cast<double>(c.neg));
    best = std::max(best, gap);
    i = j;
  }
  return best;
}

ClassificationMetrics macro_f1_and_specificity(std::span<const double> scores, std::span<const int> labels,
                                               double threshold) {
  check_inputs(scores, labels, "Macro F1");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && !actual) ++tn;
    if (!predicted && actual) ++fn;
  }
  auto f1 = [](std::size_t t, std::size_t false_pos, std::size_t false_neg) {
    const std::size_t denom = 2 * t + false_pos + false_neg;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(denom);
  };
  ClassificationMetrics m;
  // For the negative class the roles of the confusion cells swap.
  m.macro_f1 = (f1(tp, fp, fn) + f1(tn, fn, fp)) / 2.0;
  m.specificity = tn + fp == 0 ? 0.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
  return m;
}

std::vector<ScorecardBin> scorecard(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scorecard: scores and labels differ in length");
  std::vector<ScorecardBin> bins(10);
  for (int k = 0; k < 10; ++k) {
    bins[k].lo = k / 10.0;
    bins[k].hi = (k + 1) / 10.0;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("scorecard: score outside [0, 1]");
    int k = static_cast<int>(std::floor(s * 10.0));
    k = std::clamp(k, 0, 9);
    // Keep binning consistent with the printed [lo, hi) edges.
    if (k > 0 && s < bins[k].lo) --k;
    if (k < 9 && s >= bins[k].hi) ++k;
    (labels[i] == 1 ? bins[k].count_promoter : bins[k].count_non_promoter)++;
  }
  return bins;
}

MonotonicityCheck scorecard_monotonicity(std::span<const ScorecardBin> bins, int min_count) {
  MonotonicityCheck check;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (bins[k].total() < min_count) continue;
    const double frac = static_cast<double>(bins[k].count_non_promoter) / static_cast<double>(bins[k].total());
    if (!check.non_promoter_fraction.empty() && frac > check.non_promoter_fraction.back()) check.holds = false;
    check.bins_checked.push_back(k);
    check.non_promoter_fraction.push_back(frac);
  }
  return check;
}

Evaluation evaluate(const model::TreeEnsemble& ensemble, const FeatureMatrix& test, double threshold) {
  Evaluation out;
  out.scores = ensemble.predict_proba(test);
  out.report.experiment = std::string(to_string(test.experiment));
  out.report.auc = auc(out.scores, test.labels);
  out.report.ks = ks(out.scores, test.labels);
  const auto cls = macro_f1_and_specificity(out.scores, test.labels, threshold);
  out.report.macro_f1 = cls.macro_f1;
  out.report.specificity = cls.specificity;
  out.report.threshold = threshold;
  out.report.n_test = test.n_rows();
  out.scorecard = scorecard(out.scores, test.labels);
  return out;
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["auc"] = report.auc;
  j["ks"] = report.ks;
  j["macro_f1"] = report.macro_f1;
  j["specificity"] = report.specificity;
  j["threshold"] = report.threshold;
  j["n_test"] = report.n_test;
  return j.dump(2) + "\n";
}

std::string scorecard_csv(std::span<const ScorecardBin> bins) {
  std::string out = "lo,hi,promoter_count,non_promoter_count\n";
  for (const auto& b : bins) {
    out += io::format_double(b.lo) + "," + io::format_double(b.hi) + "," + std::to_string(b.count_promoter) + "," +
           std::to_string(b.count_non_promoter) + "\n";
  }
  return out;
}

}  // namespace convodyn::eval
