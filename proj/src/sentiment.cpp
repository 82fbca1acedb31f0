#include "convodyn/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "convodyn/io.hpp"
#include "convodyn/text.hpp"

namespace convodyn {

using nlohmann::json;

void StarDistribution::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("star probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("star probabilities sum to " + io::format_double(sum) + ", expected 1");
  }
}

SentimentScore to_sentiment_score(const StarDistribution& dist) {
  int star = 0;
  for (int s = 1; s < kNumStars; ++s) {
    if (dist.probs[s] > dist.probs[star]) star = s;
  }
  SentimentScore score;
  score.star = star;
  score.prob = dist.probs[star];
  score.continuous = static_cast<double>(star) + score.prob;
  return score;
}

namespace {

// English and Spanish support-chat vocabulary. The three lists are disjoint.
constexpr std::string_view kPositive[] = {
    "good",      "great",    "excellent", "thanks",    "thank",     "perfect",  "happy",
    "amazing",   "awesome",  "love",      "helpful",   "solved",    "resolved", "fast",
    "wonderful", "nice",     "glad",      "appreciate", "fantastic", "pleased", "gracias",
    "excelente", "bueno",    "buena",     "genial",    "perfecto",  "feliz",    "rapido",
    "resuelto",  "amable",   "encantado", "increible", "agradecido", "satisfecho",
};

constexpr std::string_view kNegative[] = {
    "bad",      "terrible",  "awful",    "angry",     "slow",      "problem",  "broken",
    "worst",    "hate",      "useless",  "frustrated", "annoyed",  "wrong",    "never",
    "horrible", "disappointed", "unacceptable", "fraud", "complaint", "error", "malo",
    "mala",     "pesimo",    "problema", "lento",     "enojado",   "molesto",  "nunca",
    "fraude",   "queja",     "decepcionado", "inaceptable", "reclamo",
};

constexpr std::string_view kNeutral[] = {
    "hello",   "account", "card",    "payment", "transfer", "please", "order",  "number",
    "today",   "check",   "status",  "balance", "app",      "hola",   "cuenta", "tarjeta",
    "pago",    "saldo",   "pedido",  "estado",  "hoy",      "favor",  "numero", "dinero",
};

const std::unordered_set<std::string_view>& positive_set() {
  static const std::unordered_set<std::string_view> set(std::begin(kPositive), std::end(kPositive));
  return set;
}

const std::unordered_set<std::string_view>& negative_set() {
  static const std::unordered_set<std::string_view> set(std::begin(kNegative), std::end(kNegative));
  return set;
}

}  // namespace

std::span<const std::string_view> positive_words() { return kPositive; }
std::span<const std::string_view> negative_words() { return kNegative; }
std::span<const std::string_view> neutral_words() { return kNeutral; }

StarDistribution lexicon_score(std::string_view input) {
  int pos = 0;
  int neg = 0;
  for (const auto& token : text::tokenize(input)) {
    if (positive_set().contains(token)) ++pos;
    if (negative_set().contains(token)) ++neg;
  }
  const double valence = static_cast<double>(pos - neg) / std::max(1, pos + neg);
  const int star = static_cast<int>(std::lround((valence + 1.0) * 2.0));
  const double peak = 0.6 + 0.3 * std::abs(valence);
  StarDistribution dist;
  dist.probs.fill((1.0 - peak) / 4.0);
  dist.probs[star] = peak;
  return dist;
}

std::vector<StarDistribution> LexiconScorer::score(std::span<const ScoreRequest> requests) const {
  std::vector<StarDistribution> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(lexicon_score(r.text));
  return out;
}

MissingScoreError::MissingScoreError(std::string conversation_id, int message_index)
    : ValidationError("no precomputed score for conversation '" + conversation_id + "' message " +
                      std::to_string(message_index)),
      conversation_id_(std::move(conversation_id)),
      message_index_(message_index) {}

PrecomputedScorer PrecomputedScorer::parse(std::string_view jsonl) {
  std::map<Key, StarDistribution> table;
  const auto lines = io::split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (text::is_blank(lines[i])) continue;
    try {
      const json record = json::parse(lines[i]);
      const auto& probs = record.at("probs");
      if (!probs.is_array() || probs.size() != kNumStars) throw ParseError("probs must have 5 entries", line_no);
      StarDistribution dist;
      for (int s = 0; s < kNumStars; ++s) dist.probs[s] = probs[s].get<double>();
      dist.validate();
      Key key{record.at("conversation_id").get<std::string>(), record.at("message_index").get<int>()};
      if (!table.emplace(std::move(key), dist).second) throw ParseError("duplicate score record", line_no);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid score record: ") + e.what(), line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return PrecomputedScorer(std::move(table));
}

PrecomputedScorer PrecomputedScorer::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::vector<StarDistribution> PrecomputedScorer::score(std::span<const ScoreRequest> requests) const {
  std::vector<StarDistribution> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    auto it = table_.find(Key{std::string(r.conversation_id), r.message_index});
    if (it == table_.end()) throw MissingScoreError(std::string(r.conversation_id), r.message_index);
    out.push_back(it->second);
  }
  return out;
}

std::string serialize_precomputed(std::span<const PrecomputedRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json record;
    record["conversation_id"] = r.conversation_id;
    record["message_index"] = r.message_index;
    record["probs"] = r.dist.probs;
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::lexicon:
      return "lexicon";
    case ScorerKind::precomputed:
      return "precomputed";
    case ScorerKind::remote:
      return "remote";
  }
  return "lexicon";
}

ScorerKind scorer_kind_from_string(std::string_view name) {
  if (name == "lexicon") return ScorerKind::lexicon;
  if (name == "precomputed") return ScorerKind::precomputed;
  if (name == "remote") return ScorerKind::remote;
  throw ValidationError("unknown scorer '" + std::string(name) + "'");
}

std::unique_ptr<Scorer> make_scorer(const ScorerBackend& backend) {
  switch (backend.kind) {
    case ScorerKind::lexicon:
      return std::make_unique<LexiconScorer>();
    case ScorerKind::precomputed:
      if (backend.scores_path.empty()) throw ValidationError("precomputed scorer needs a scores file");
      return std::make_unique<PrecomputedScorer>(PrecomputedScorer::load(backend.scores_path));
    case ScorerKind::remote: {
      if (backend.endpoint.empty()) throw TransportError("remote scorer selected but no endpoint configured");
      RemoteScorer::Options options;
      options.endpoint = backend.endpoint;
      options.batch_size = backend.batch_size;
      return std::make_unique<RemoteScorer>(std::move(options));
    }
  }
  throw ValidationError("unsupported scorer kind");
}

std::vector<SentimentScore> message_wise_series(const Scorer& scorer, const Conversation& conv) {
  std::vector<ScoreRequest> requests;
  for (const Message* m : conv.customer_messages()) {
    requests.push_back(ScoreRequest{conv.conversation_id, m->index, m->text});
  }
  if (requests.empty()) {
    throw ContractError("conversation '" + conv.conversation_id + "' has no customer messages");
  }
  const auto dists = scorer.score(requests);
  if (dists.size() != requests.size()) throw TransportError("scorer returned a result count mismatch");
  std::vector<SentimentScore> series;
  series.reserve(dists.size());
  for (const auto& d : dists) series.push_back(to_sentiment_score(d));
  return series;
}

std::string conversation_text(const Conversation& conv, std::size_t max_chars) {
  std::string joined;
  bool first = true;
  for (const Message* m : conv.customer_messages()) {
    if (!first) joined.push_back('\n');
    joined += m->text;
    first = false;
  }
  return text::truncate_code_points(joined, max_chars);
}

SentimentScore static_conversation_sentiment(const Scorer& scorer, const Conversation& conv,
                                             std::size_t max_chars) {
  if (conv.customer_message_count() == 0) {
    throw ContractError("conversation '" + conv.conversation_id + "' has no customer messages");
  }
  const std::string joined = conversation_text(conv, max_chars);
  return to_sentiment_score(scorer.score_one(ScoreRequest{conv.conversation_id, kConversationIndex, joined}));
}

}  // namespace convodyn
