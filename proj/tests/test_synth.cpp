#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "convodyn/error.hpp"
#include "convodyn/features.hpp"
#include "convodyn/synth.hpp"

using namespace convodyn;
using namespace convodyn::synth;

namespace {

SynthConfig config(double signal, std::size_t users, std::uint64_t seed = 3) {
  SynthConfig c;
  c.signal_strength = signal;
  c.n_users = users;
  c.seed = seed;
  return c;
}

struct SlopeStats {
  double mean = 0.0;
  double se = 0.0;
};

SlopeStats slope_stats(const SynthOutput& out, NpsClass klass) {
  const PrecomputedScorer scorer = PrecomputedScorer::parse(serialize_precomputed(out.scores));
  std::vector<double> v;
  for (std::size_t i = 0; i < out.users.size(); ++i) {
    if (out.users[i].klass != klass) continue;
    const auto slope = linewise_features(out.corpus.users[i], scorer).get("lw_slope");
    if (slope && !is_missing(*slope)) v.push_back(*slope);
  }
  SlopeStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return s;
}

}  // namespace

TEST_CASE("same seed gives byte-identical output") {
  const auto a = generate(config(0.8, 200));
  const auto b = generate(config(0.8, 200));
  CHECK(serialize_corpus(a.corpus) == serialize_corpus(b.corpus));
  CHECK(serialize_precomputed(a.scores) == serialize_precomputed(b.scores));
  CHECK(serialize_corpus(generate(config(0.8, 200, 4)).corpus) != serialize_corpus(a.corpus));
}

TEST_CASE("class frequencies follow the priors") {
  const SynthConfig c = config(0.8, 2000);
  const auto out = generate(c);
  std::map<NpsClass, double> count;
  for (const auto& u : out.corpus.users) count[u.label->klass] += 1.0;
  const double total = c.promoter_weight + c.detractor_weight + c.passive_weight;
  const std::pair<NpsClass, double> priors[] = {{NpsClass::promoter, c.promoter_weight / total},
                                                {NpsClass::detractor, c.detractor_weight / total},
                                                {NpsClass::passive, c.passive_weight / total}};
  for (const auto& [klass, p] : priors) {
    const double n = 2000.0;
    CHECK(std::abs(count[klass] - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
  }
}

TEST_CASE("generated corpus shape") {
  const SynthConfig c = config(0.8, 2000);
  const auto out = generate(c);
  double convs = 0.0, longest = 0.0;
  for (const auto& u : out.corpus.users) {
    REQUIRE(!u.conversations.empty());
    convs += static_cast<double>(u.conversations.size());
    longest += static_cast<double>(longest_conversation(u).customer_message_count());
    for (const auto& conv : u.conversations) CHECK(conv.customer_message_count() >= 1);
  }
  CHECK(convs / 2000.0 == doctest::Approx(c.mean_conversations).epsilon(0.05));
  CHECK(longest / 2000.0 == doctest::Approx(c.mean_longest_messages).epsilon(0.05));
  for (std::size_t i = 0; i < out.users.size(); ++i) {
    CHECK(longest_conversation(out.corpus.users[i]).conversation_id == out.users[i].longest_conversation_id);
  }
  // Generated text is already clean, so message indices survive preprocessing.
  CHECK(preprocess(out.corpus) == out.corpus);
}

TEST_CASE("both scorer paths agree on the stars") {
  const auto out = generate(config(0.8, 500));
  const PrecomputedScorer pre = PrecomputedScorer::parse(serialize_precomputed(out.scores));
  std::size_t agree = 0, total = 0;
  for (const auto& u : out.corpus.users) {
    for (const auto& conv : u.conversations) {
      for (const Message* m : conv.customer_messages()) {
        const auto d = pre.score_one({conv.conversation_id, m->index, m->text});
        CHECK_NOTHROW(d.validate());
        ++total;
        agree += to_sentiment_score(d).star == to_sentiment_score(lexicon_score(m->text)).star;
      }
      CHECK_NOTHROW(pre.score_one({conv.conversation_id, kConversationIndex, ""}).validate());
    }
  }
  CHECK(static_cast<double>(agree) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("planted signal separates slopes; no signal does not") {
  const auto strong = generate(config(1.0, 2000));
  CHECK(slope_stats(strong, NpsClass::promoter).mean > slope_stats(strong, NpsClass::detractor).mean);

  const auto none = generate(config(0.0, 2000));
  const auto p = slope_stats(none, NpsClass::promoter);
  const auto d = slope_stats(none, NpsClass::detractor);
  CHECK(std::abs(p.mean - d.mean) < 3.0 * std::sqrt(p.se * p.se + d.se * d.se));
}

TEST_CASE("trajectory shapes") {
  CHECK(target_star(Shape::rising, 0.0, 0) == 2.0);
  CHECK(target_star(Shape::rising, 1.0, 0) == 4.0);
  CHECK(target_star(Shape::falling, 1.0, 0) == 0.0);
  CHECK(target_star(Shape::flat, 0.3, 1.7) == 1.7);
  // Rising dips below its start before climbing (convex).
  CHECK(target_star(Shape::rising, 1.0 / 3.0, 0) < 2.0);
}

TEST_CASE("invalid configurations") {
  auto c = config(0.8, 10);
  c.signal_strength = 1.5;
  CHECK_THROWS_AS(generate(c), ValidationError);
  c = config(0.8, 10);
  c.mean_conversations = 0.5;
  CHECK_THROWS_AS(generate(c), ValidationError);
  c = config(0.8, 10);
  c.promoter_weight = c.detractor_weight = c.passive_weight = 0;
  CHECK_THROWS_AS(generate(c), ValidationError);
  c = config(0.8, 10);
  c.mean_longest_messages = 4;
  CHECK_THROWS_AS(generate(c), ValidationError);
  c = config(0.8, 0);
  CHECK_THROWS_AS(generate(c), ValidationError);
}
