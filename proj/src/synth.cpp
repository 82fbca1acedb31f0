#include "convodyn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "convodyn/error.hpp"
#include "convodyn/rng.hpp"

namespace convodyn::synth {

void SynthConfig::validate() const {
  if (n_users == 0) throw ValidationError("synthetic corpus needs at least one user");
  if (promoter_weight < 0 || detractor_weight < 0 || passive_weight < 0 ||
      promoter_weight + detractor_weight + passive_weight <= 0) {
    throw ValidationError("class weights must be non-negative with a positive sum");
  }
  if (!(mean_conversations >= 1.0)) throw ValidationError("mean_conversations must be at least 1");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) throw ValidationError("signal_strength must be in [0, 1]");
  if (!(star_noise > 0.0)) throw ValidationError("star_noise must be positive");
  if (!(length_gap >= 0.0)) throw ValidationError("length_gap must be non-negative");
  const double total = promoter_weight + detractor_weight + passive_weight;
  const double promoter_share = promoter_weight / total;
  const double shortest_mean = mean_longest_messages - length_gap * (1.0 - promoter_share);
  if (!(shortest_mean >= 3.0)) {
    throw ValidationError("mean_longest_messages too small for length_gap (class means must stay >= 3)");
  }
  if (max_chars == 0) throw ValidationError("max_chars must be positive");
}

double target_star(Shape shape, double u, double flat_level) {
  const double rising = 2.0 - 4.0 * u + 6.0 * u * u;
  switch (shape) {
    case Shape::rising:
      return rising;
    case Shape::falling:
      return 4.0 - rising;
    case Shape::flat:
      return flat_level;
  }
  return flat_level;
}

namespace {

constexpr int kMinLongest = 3;

template <typename T>
const T& pick(Rng& rng, std::span<const T> items) {
  return items[rng.below(items.size())];
}

StarDistribution star_profile(double target, double noise) {
  StarDistribution d;
  double sum = 0.0;
  for (int k = 0; k < kNumStars; ++k) {
    const double z = (k - target) / noise;
    d.probs[k] = std::exp(-0.5 * z * z);
    sum += d.probs[k];
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

int draw_star(Rng& rng, const StarDistribution& d) {
  double u = rng.uniform();
  for (int k = 0; k < kNumStars - 1; ++k) {
    if (u < d.probs[k]) return k;
    u -= d.probs[k];
  }
  return kNumStars - 1;
}

// Half a point mass on the drawn star plus half the profile: the drawn star
// is the strict argmax.
StarDistribution emitted_distribution(int star, const StarDistribution& profile) {
  StarDistribution d;
  for (int k = 0; k < kNumStars; ++k) d.probs[k] = 0.5 * profile.probs[k] + (k == star ? 0.5 : 0.0);
  return d;
}

// Valence words per star so that the lexicon scorer lands on the same star:
// (pos, neg) = 4:(2,0) 3:(2,1) 2:(0,0)|(1,1) 1:(1,2) 0:(0,2).
std::string message_text(Rng& rng, int star) {
  int pos = 0, neg = 0;
  switch (star) {
    case 4: pos = 2; break;
    case 3: pos = 2; neg = 1; break;
    case 2: if (rng.bernoulli(0.5)) { pos = 1; neg = 1; } break;
    case 1: pos = 1; neg = 2; break;
    default: neg = 2; break;
  }
  std::vector<std::string_view> tokens;
  for (int i = 0; i < pos; ++i) tokens.push_back(pick(rng, positive_words()));
  for (int i = 0; i < neg; ++i) tokens.push_back(pick(rng, negative_words()));
  const int filler = static_cast<int>(rng.between(2, 4));
  for (int i = 0; i < filler; ++i) tokens.push_back(pick(rng, neutral_words()));
  rng.shuffle(std::span<std::string_view>(tokens));

  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  static constexpr const char* kEndings[] = {".", "!", "?", ""};
  out += kEndings[rng.below(4)];
  return out;
}

std::string agent_text(Rng& rng) {
  std::string out = "agent:";
  const int n = static_cast<int>(rng.between(3, 6));
  for (int i = 0; i < n; ++i) {
    out.push_back(' ');
    out += pick(rng, neutral_words());
  }
  return out;
}

Conversation make_conversation(Rng& rng, const std::string& id, const std::string& user_id, int customer_messages,
                               Shape shape, double noise, std::vector<PrecomputedRecord>& scores) {
  Conversation conv;
  conv.conversation_id = id;
  conv.user_id = user_id;
  const double flat_level = rng.uniform(1.0, 3.0);
  for (int j = 0; j < customer_messages; ++j) {
    const double u = customer_messages > 1 ? static_cast<double>(j) / (customer_messages - 1) : 0.5;
    const StarDistribution profile = star_profile(target_star(shape, u, flat_level), noise);
    const int star = draw_star(rng, profile);
    Message m;
    m.index = static_cast<int>(conv.messages.size());
    m.sender = Sender::customer;
    m.text = message_text(rng, star);
    scores.push_back(PrecomputedRecord{id, m.index, emitted_distribution(star, profile)});
    conv.messages.push_back(std::move(m));
    if (j + 1 < customer_messages && rng.bernoulli(0.5)) {
      Message a;
      a.index = static_cast<int>(conv.messages.size());
      a.sender = Sender::agent;
      a.text = agent_text(rng);
      conv.messages.push_back(std::move(a));
    }
  }
  return conv;
}

std::string numbered(const char* prefix, std::size_t n, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const double total = config.promoter_weight + config.detractor_weight + config.passive_weight;
  const double p_promoter = config.promoter_weight / total;
  const double p_detractor = config.detractor_weight / total;
  const double promoter_len = config.mean_longest_messages - config.length_gap * (1.0 - p_promoter);
  const double other_len = config.mean_longest_messages + config.length_gap * p_promoter;

  SynthOutput out;
  out.corpus.provenance = "synthetic seed=" + std::to_string(config.seed);
  const int width = std::max(5, static_cast<int>(std::to_string(config.n_users).size()));
  for (std::size_t i = 0; i < config.n_users; ++i) {
    SynthUser info;
    info.user_id = numbered("u", i, width);

    const double draw = rng.uniform();
    info.klass = draw < p_promoter ? NpsClass::promoter
                 : draw < p_promoter + p_detractor ? NpsClass::detractor
                                                   : NpsClass::passive;
    int raw = 0;
    switch (info.klass) {
      case NpsClass::promoter: raw = static_cast<int>(rng.between(9, 10)); break;
      case NpsClass::passive: raw = static_cast<int>(rng.between(7, 8)); break;
      case NpsClass::detractor: raw = static_cast<int>(rng.between(0, 6)); break;
    }

    info.planted = rng.bernoulli(config.signal_strength);
    static constexpr Shape kShapes[] = {Shape::rising, Shape::falling, Shape::flat};
    double mean_len = config.mean_longest_messages;
    if (info.planted) {
      if (info.klass == NpsClass::promoter) {
        info.shape = Shape::rising;
        mean_len = promoter_len;
      } else {
        info.shape = info.klass == NpsClass::detractor ? Shape::falling : kShapes[rng.below(3)];
        mean_len = other_len;
      }
    } else {
      info.shape = kShapes[rng.below(3)];
    }

    const int longest_len = kMinLongest + rng.poisson(mean_len - kMinLongest);
    const int n_conv = 1 + rng.poisson(config.mean_conversations - 1.0);
    const std::size_t longest_slot = rng.below(static_cast<std::size_t>(n_conv));

    UserRecord user;
    user.user_id = info.user_id;
    user.label = label_from_nps(raw);
    for (int c = 0; c < n_conv; ++c) {
      const std::string conv_id = info.user_id + "_c" + std::to_string(c);
      const bool is_longest = static_cast<std::size_t>(c) == longest_slot;
      // Other conversations are strictly shorter, so the planted one is the
      // unique longest.
      const int len = is_longest ? longest_len : static_cast<int>(rng.between(1, longest_len - 1));
      const Shape shape = is_longest ? info.shape : kShapes[rng.below(3)];
      user.conversations.push_back(
          make_conversation(rng, conv_id, info.user_id, len, shape, config.star_noise, out.scores));
      if (is_longest) info.longest_conversation_id = conv_id;
    }
    for (const auto& conv : user.conversations) {
      out.scores.push_back(
          PrecomputedRecord{conv.conversation_id, kConversationIndex, lexicon_score(conversation_text(conv, config.max_chars))});
    }
    out.corpus.users.push_back(std::move(user));
    out.users.push_back(std::move(info));
  }
  return out;
}

}  // namespace convodyn::synth
