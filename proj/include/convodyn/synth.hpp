#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convodyn/corpus.hpp"
#include "convodyn/sentiment.hpp"

namespace convodyn::synth {

// Sentiment trajectory planted in a user's longest conversation, as a target
// star level over normalized conversation time u in [0, 1]:
//   rising:  2 - 4u + 6u^2  (convex: dips below neutral, ends positive)
//   falling: 4 - rising     (mirror image; concave)
//   flat:    a constant level drawn per conversation
// rising and falling both average star 2, so they share the same expected
// whole-conversation sentiment and differ only in their dynamics.
enum class Shape { rising, falling, flat };

struct SynthConfig {
  std::size_t n_users = 2000;
  // Relative class weights; normalized internally.
  double promoter_weight = 10701;
  double detractor_weight = 3230;
  double passive_weight = 2470;
  double mean_conversations = 2.39;       // per user, at least 1
  double mean_longest_messages = 13.85;   // customer messages in the longest conversation
  // Promoters' longest conversations are shorter than non-promoters' by this
  // many messages on average when the signal is planted.
  double length_gap = 5.0;
  double signal_strength = 0.8;  // probability that a user carries the planted signal
  double star_noise = 0.7;       // spread of the per-message star draw around the target
  std::size_t max_chars = 2000;  // truncation used for whole-conversation scores
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthUser {
  std::string user_id;
  NpsClass klass = NpsClass::detractor;
  bool planted = false;
  Shape shape = Shape::flat;
  std::string longest_conversation_id;
};

struct SynthOutput {
  Corpus corpus;
  // Message-level distributions plus one whole-conversation record (index -1)
  // per conversation.
  std::vector<PrecomputedRecord> scores;
  std::vector<SynthUser> users;
};

double target_star(Shape shape, double u, double flat_level);

SynthOutput generate(const SynthConfig& config);

}  // namespace convodyn::synth
