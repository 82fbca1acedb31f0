#pragma once

#include <array>
#include <span>
#include <vector>

#include "convodyn/sentiment.hpp"

namespace convodyn::dynamics {

// Per-message continuous sentiment (star + probability) alongside the
// discrete star line it was built from.
struct SentimentSeries {
  std::vector<double> values;
  std::vector<int> stars;

  std::size_t size() const { return values.size(); }
};

SentimentSeries continuous_curve(std::span<const SentimentScore> scores);

// MA_0 = v_0, MA_j = alpha * v_j + (1 - alpha) * MA_{j-1}.
std::vector<double> ewma(std::span<const double> values, double alpha);

inline constexpr double kDefaultAlpha = 2.0 / 3.0;

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool defined = false;  // false for fewer than two points

  double at(double x) const { return intercept + slope * x; }
};

// Ordinary least squares of values against x = 0..N-1.
TrendFit linear_trend(std::span<const double> values);

struct Concavity {
  double mean = 0.0;
  bool defined = false;  // false for fewer than three points
};

// Mean of the central second difference v[j+1] - 2 v[j] + v[j-1].
Concavity second_derivative_mean(std::span<const double> values);

struct SeriesStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  double std = 0.0;  // population
  double cv = 0.0;   // std / mean, 0 when mean is 0
};

SeriesStats descriptive_stats(std::span<const double> values);

// The trailing ceil(N/3) elements.
std::span<const double> last_third(std::span<const double> values);

std::array<int, kNumStars> star_counts(const SentimentSeries& series);

// One row per customer message of the curve export.
struct CurvePoint {
  int message_index = 0;
  int star = 0;
  double continuous = 0.0;
  double ewma = 0.0;
  double trend_fit = 0.0;
};

// Export rows for plotting: per message the star and continuous value, plus
// the smoothed curve with its linear fit.
std::vector<CurvePoint> curve_points(const SentimentSeries& series, double alpha = kDefaultAlpha);

}  // namespace convodyn::dynamics
