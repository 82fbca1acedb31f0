#include "convodyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convodyn/error.hpp"

namespace convodyn::dynamics {

SentimentSeries continuous_curve(std::span<const SentimentScore> scores) {
  if (scores.empty()) throw ContractError("continuous curve of an empty series");
  SentimentSeries series;
  series.values.reserve(scores.size());
  series.stars.reserve(scores.size());
  for (const auto& s : scores) {
    series.values.push_back(static_cast<double>(s.star) + s.prob);
    series.stars.push_back(s.star);
  }
  return series;
}

std::vector<double> ewma(std::span<const double> values, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("EWMA alpha must be in (0, 1]");
  if (values.empty()) throw ContractError("EWMA of an empty series");
  std::vector<double> out;
  out.reserve(values.size());
  double ma = values.front();
  out.push_back(ma);
  for (std::size_t j = 1; j < values.size(); ++j) {
    ma = alpha * values[j] + (1.0 - alpha) * ma;
    out.push_back(ma);
  }
  return out;
}

TrendFit linear_trend(std::span<const double> values) {
  if (values.empty()) throw ContractError("linear trend of an empty series");
  TrendFit fit;
  const std::size_t n = values.size();
  if (n < 2) {
    fit.intercept = values.front();
    return fit;
  }
  // Centered form: slope = sum((x - x_bar) * y) / sum((x - x_bar)^2).
  const double x_bar = static_cast<double>(n - 1) / 2.0;
  const double y_bar = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_bar;
    sxy += dx * (values[i] - y_bar);
    sxx += dx * dx;
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_bar - fit.slope * x_bar;
  fit.defined = true;
  return fit;
}

Concavity second_derivative_mean(std::span<const double> values) {
  Concavity c;
  if (values.size() < 3) return c;
  double sum = 0.0;
  for (std::size_t j = 1; j + 1 < values.size(); ++j) {
    sum += values[j + 1] - 2.0 * values[j] + values[j - 1];
  }
  c.mean = sum / static_cast<double>(values.size() - 2);
  c.defined = true;
  return c;
}

SeriesStats descriptive_stats(std::span<const double> values) {
  if (values.empty()) throw ContractError("descriptive statistics of an empty series");
  const auto n = static_cast<double>(values.size());
  SeriesStats s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;

  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  s.cv = s.mean == 0.0 ? 0.0 : s.std / s.mean;
  return s;
}

std::span<const double> last_third(std::span<const double> values) {
  const std::size_t keep = (values.size() + 2) / 3;
  return values.subspan(values.size() - keep);
}

std::array<int, kNumStars> star_counts(const SentimentSeries& series) {
  std::array<int, kNumStars> counts{};
  for (int star : series.stars) {
    if (star < 0 || star >= kNumStars) throw ValidationError("star outside 0..4");
    ++counts[star];
  }
  return counts;
}

std::vector<CurvePoint> curve_points(const SentimentSeries& series, double alpha) {
  const auto smoothed = ewma(series.values, alpha);
  const TrendFit fit = linear_trend(smoothed);
  std::vector<CurvePoint> points;
  points.reserve(series.size());
  for (std::size_t j = 0; j < series.size(); ++j) {
    points.push_back(CurvePoint{static_cast<int>(j), series.stars[j], series.values[j], smoothed[j],
                                fit.at(static_cast<double>(j))});
  }
  return points;
}

}  // namespace convodyn::dynamics
