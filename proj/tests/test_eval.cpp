#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "convodyn/error.hpp"
#include "convodyn/eval.hpp"
#include "oracles.hpp"

using namespace convodyn;
using namespace convodyn::eval;

namespace {

using Scores = std::vector<double>;
using Labels = std::vector<int>;

// Scores on a coarse grid so ties are common.
void random_set(Rng& rng, Scores& s, Labels& y) {
  const std::size_t n = 2 + rng.below(199);
  do {
    s.assign(n, 0.0);
    y.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(20)) / 19.0;
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
  } while (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0);
}

}  // namespace

TEST_CASE("auc basics") {
  CHECK(auc(Scores{0.9, 0.1}, Labels{1, 0}) == 1.0);
  CHECK(auc(Scores{0.1, 0.9}, Labels{1, 0}) == 0.0);
  CHECK(auc(Scores{0.5, 0.5}, Labels{1, 0}) == 0.5);
  CHECK_THROWS_AS(auc(Scores{0.1, 0.2}, Labels{1, 1}), ValidationError);
  CHECK_THROWS_AS(auc(Scores{0.1}, Labels{1, 0}), ValidationError);
  CHECK_THROWS_AS(auc(Scores{0.1, 0.2}, Labels{1, 2}), ValidationError);
}

TEST_CASE("auc equals brute-force pair counting exactly") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Scores s;
    Labels y;
    random_set(rng, s, y);
    CHECK(auc(s, y) == oracle::pair_count_auc(s, y));
  }
}

TEST_CASE("auc invariances") {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Scores s;
    Labels y;
    random_set(rng, s, y);
    Scores t = s;
    for (auto& v : t) v = std::exp(3.0 * v) - 7.0;
    CHECK(auc(t, y) == auc(s, y));
    // Flip labels on tie-free scores.
    Scores distinct(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) distinct[k] = rng.uniform();
    Labels flipped = y;
    for (auto& v : flipped) v = 1 - v;
    CHECK(auc(distinct, flipped) == doctest::Approx(1.0 - auc(distinct, y)));
  }
}

TEST_CASE("ks examples") {
  CHECK(ks(Scores{0.8, 0.9, 0.1, 0.2}, Labels{1, 1, 0, 0}) == 1.0);
  CHECK(ks(Scores{0.3, 0.7, 0.3, 0.7}, Labels{1, 1, 0, 0}) == 0.0);
  CHECK(ks(Scores{0.8, 0.4, 0.6, 0.2}, Labels{1, 1, 0, 0}) == 0.5);
  CHECK_THROWS_AS(ks(Scores{0.8}, Labels{1}), ValidationError);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Scores s;
    Labels y;
    random_set(rng, s, y);
    const double k = ks(s, y);
    CHECK(k >= 0.0);
    CHECK(k <= 1.0);
  }
}

TEST_CASE("macro f1 and specificity from confusion matrices") {
  auto m = macro_f1_and_specificity(Scores{0.9, 0.8, 0.1, 0.2}, Labels{1, 1, 0, 0});
  CHECK(m.macro_f1 == 1.0);
  CHECK(m.specificity == 1.0);
  m = macro_f1_and_specificity(Scores{0.9, 0.8, 0.7, 0.6}, Labels{1, 1, 0, 0});
  CHECK(m.macro_f1 == doctest::Approx(1.0 / 3.0));
  CHECK(m.specificity == 0.0);
  m = macro_f1_and_specificity(Scores{0.1, 0.9}, Labels{1, 0});
  CHECK(m.macro_f1 == 0.0);
  CHECK(m.specificity == 0.0);
  // Score equal to the threshold is predicted positive.
  m = macro_f1_and_specificity(Scores{0.5, 0.4}, Labels{1, 0});
  CHECK(m.macro_f1 == 1.0);
  CHECK_THROWS_AS(macro_f1_and_specificity(Scores{0.5}, Labels{0}), ValidationError);
}

TEST_CASE("scorecard binning") {
  const auto bins = scorecard(Scores{0.05, 0.15, 0.15}, Labels{0, 1, 1});
  REQUIRE(bins.size() == 10);
  CHECK(bins[0].count_promoter == 0);
  CHECK(bins[0].count_non_promoter == 1);
  CHECK(bins[1].count_promoter == 2);
  CHECK(bins[1].count_non_promoter == 0);
  const auto edge = scorecard(Scores{1.0, 0.0, 0.3, 0.7, 0.1}, Labels{1, 0, 1, 0, 1});
  CHECK(edge[9].count_promoter == 1);
  CHECK(edge[0].count_non_promoter == 1);
  CHECK(edge[3].count_promoter == 1);
  CHECK(edge[7].count_non_promoter == 1);
  CHECK(edge[1].count_promoter == 1);
  CHECK_THROWS_AS(scorecard(Scores{1.2}, Labels{1}), ValidationError);

  Rng rng(9);
  Scores s(500);
  Labels y(500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = static_cast<int>(rng.below(2));
  }
  int total = 0;
  for (const auto& b : scorecard(s, y)) total += b.total();
  CHECK(total == 500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto one = scorecard(Scores{s[i]}, Labels{y[i]});
    for (const auto& b : one) {
      if (b.total() == 1) {
        CHECK(s[i] >= b.lo);
        CHECK((s[i] < b.hi || b.hi == 1.0));
      }
    }
  }
}

TEST_CASE("monotonicity diagnostic skips thin bins") {
  std::vector<ScorecardBin> bins(10);
  bins[1] = {0.1, 0.2, 5, 40};
  bins[4] = {0.4, 0.5, 20, 20};
  bins[5] = {0.5, 0.6, 2, 3};  // thin, would break the trend
  bins[8] = {0.8, 0.9, 35, 5};
  auto m = scorecard_monotonicity(bins);
  CHECK(m.holds);
  CHECK(m.bins_checked == std::vector<std::size_t>{1, 4, 8});
  bins[8] = {0.8, 0.9, 5, 35};
  CHECK_FALSE(scorecard_monotonicity(bins).holds);
}

TEST_CASE("report composition and export") {
  Rng rng(10);
  const auto test = oracle::random_matrix(rng, 120, 2, 0.1);
  const auto train = oracle::random_matrix(rng, 200, 2, 0.1);
  const auto e = model::fit_gbt(train, model::HyperParams{}, 1);
  const auto ev = evaluate(e, test);
  CHECK(ev.report.auc == auc(ev.scores, test.labels));
  CHECK(ev.report.ks == ks(ev.scores, test.labels));
  CHECK(ev.report.n_test == 120);
  const auto j = nlohmann::json::parse(report_json(ev.report));
  CHECK(j.at("auc").get<double>() == ev.report.auc);
  CHECK(j.at("threshold").get<double>() == 0.5);
  CHECK(scorecard_csv(ev.scorecard).rfind("lo,hi,promoter_count,non_promoter_count\n0,0.1,", 0) == 0);
}
