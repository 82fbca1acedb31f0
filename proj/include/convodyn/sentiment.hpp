#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "convodyn/corpus.hpp"
#include "convodyn/error.hpp"

namespace convodyn {

inline constexpr int kNumStars = 5;

// Probability over star classes 0..4.
struct StarDistribution {
  std::array<double, kNumStars> probs{};

  // Throws ValidationError unless every prob is in [0,1] and they sum to 1
  // within 1e-6.
  void validate() const;
  bool operator==(const StarDistribution&) const = default;
};

struct SentimentScore {
  int star = 0;             // argmax star, lowest index on ties
  double prob = 0.0;        // probability of that star
  double continuous = 0.0;  // star + prob

  bool operator==(const SentimentScore&) const = default;
};

SentimentScore to_sentiment_score(const StarDistribution& dist);

// Identifies one scorable unit. Message-level units carry the message index
// within the conversation; whole-conversation units use kConversationIndex.
struct ScoreRequest {
  std::string_view conversation_id;
  int message_index = 0;
  std::string_view text;
};

inline constexpr int kConversationIndex = -1;

// Pluggable 5-star scorer. Implementations must return one distribution per
// request, in request order.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<StarDistribution> score(std::span<const ScoreRequest> requests) const = 0;

  StarDistribution score_one(const ScoreRequest& request) const {
    return score(std::span<const ScoreRequest>(&request, 1)).front();
  }
};

// Valence-lexicon reference scorer. With v = (pos - neg) / max(1, pos + neg),
// star = round((v + 1) * 2) gets 0.6 + 0.3|v|; the rest is spread evenly.
StarDistribution lexicon_score(std::string_view text);

std::span<const std::string_view> positive_words();
std::span<const std::string_view> negative_words();
// Tokens with no valence; used as filler by the synthetic generator.
std::span<const std::string_view> neutral_words();

class LexiconScorer final : public Scorer {
 public:
  std::vector<StarDistribution> score(std::span<const ScoreRequest> requests) const override;
};

// Looks distributions up by (conversation_id, message_index). Whole
// conversation scores are stored under message_index -1.
class PrecomputedScorer final : public Scorer {
 public:
  using Key = std::pair<std::string, int>;

  explicit PrecomputedScorer(std::map<Key, StarDistribution> table) : table_(std::move(table)) {}

  static PrecomputedScorer load(const std::filesystem::path& path);
  static PrecomputedScorer parse(std::string_view jsonl);

  std::vector<StarDistribution> score(std::span<const ScoreRequest> requests) const override;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<Key, StarDistribution> table_;
};

// Raised when a precomputed table has no entry for a request.
class MissingScoreError : public ValidationError {
 public:
  MissingScoreError(std::string conversation_id, int message_index);
  const std::string& conversation_id() const { return conversation_id_; }
  int message_index() const { return message_index_; }

 private:
  std::string conversation_id_;
  int message_index_;
};

struct PrecomputedRecord {
  std::string conversation_id;
  int message_index = 0;
  StarDistribution dist;
};

std::string serialize_precomputed(std::span<const PrecomputedRecord> records);

// HTTP client for the scorer wire protocol: POST /score {"texts": [...]}
// answered by {"results": [{"probs": [5 floats]}, ...]} in input order.
// Any failure is fatal; no neutral fill-in.
class RemoteScorer final : public Scorer {
 public:
  struct Options {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::size_t batch_size = 32;
    int timeout_seconds = 30;
  };

  explicit RemoteScorer(Options options);

  std::vector<StarDistribution> score(std::span<const ScoreRequest> requests) const override;
  bool healthy() const;

 private:
  Options options_;
  std::string host_;
};

enum class ScorerKind { lexicon, precomputed, remote };

std::string_view to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(std::string_view name);

struct ScorerBackend {
  ScorerKind kind = ScorerKind::lexicon;
  std::filesystem::path scores_path;  // precomputed
  std::string endpoint;               // remote
  std::size_t batch_size = 32;        // remote
  std::size_t max_chars = 2000;       // whole-conversation truncation
};

std::unique_ptr<Scorer> make_scorer(const ScorerBackend& backend);

// Scores each customer message of `conv`, in order.
std::vector<SentimentScore> message_wise_series(const Scorer& scorer, const Conversation& conv);

// The customer messages joined by '\n' and cut to `max_chars` code points.
std::string conversation_text(const Conversation& conv, std::size_t max_chars);

// Scores the whole conversation as one text built by conversation_text.
SentimentScore static_conversation_sentiment(const Scorer& scorer, const Conversation& conv,
                                             std::size_t max_chars = 2000);

}  // namespace convodyn
