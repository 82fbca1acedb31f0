#include "convodyn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "convodyn/error.hpp"
#include "convodyn/io.hpp"
#include "convodyn/rng.hpp"
#include "convodyn/text.hpp"

namespace convodyn {

using nlohmann::json;

std::vector<const Message*> Conversation::customer_messages() const {
  std::vector<const Message*> out;
  for (const auto& m : messages) {
    if (m.sender == Sender::customer) out.push_back(&m);
  }
  return out;
}

std::size_t Conversation::customer_message_count() const {
  return static_cast<std::size_t>(std::count_if(messages.begin(), messages.end(),
                                                [](const Message& m) { return m.sender == Sender::customer; }));
}

std::string_view to_string(NpsClass klass) {
  switch (klass) {
    case NpsClass::promoter:
      return "promoter";
    case NpsClass::passive:
      return "passive";
    case NpsClass::detractor:
      return "detractor";
  }
  return "detractor";
}

NpsClass nps_class_from_string(std::string_view name) {
  if (name == "promoter") return NpsClass::promoter;
  if (name == "passive") return NpsClass::passive;
  if (name == "detractor") return NpsClass::detractor;
  throw ValidationError("unknown NPS class '" + std::string(name) + "'");
}

NpsLabel label_from_nps(int raw) {
  if (raw < 0 || raw > 10) throw ValidationError("NPS score out of range 0-10: " + std::to_string(raw));
  NpsLabel label;
  label.raw_score = raw;
  label.klass = raw >= 9 ? NpsClass::promoter : raw >= 7 ? NpsClass::passive : NpsClass::detractor;
  return label;
}

std::size_t Corpus::conversation_count() const {
  std::size_t n = 0;
  for (const auto& u : users) n += u.conversations.size();
  return n;
}

const Conversation* Corpus::find_conversation(std::string_view conversation_id) const {
  for (const auto& u : users) {
    for (const auto& c : u.conversations) {
      if (c.conversation_id == conversation_id) return &c;
    }
  }
  return nullptr;
}

namespace {

std::string required_string(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

Message parse_message(const json& m, int index, std::size_t line) {
  if (!m.is_object()) throw ParseError("message must be an object", line);
  Message msg;
  msg.index = index;
  const std::string sender = required_string(m, "sender", line);
  if (sender == "customer") {
    msg.sender = Sender::customer;
  } else if (sender == "agent") {
    msg.sender = Sender::agent;
  } else {
    throw ParseError("unknown sender '" + sender + "'", line);
  }
  msg.text = required_string(m, "text", line);
  if (auto ts = m.find("timestamp"); ts != m.end() && !ts->is_null()) {
    if (!ts->is_string()) throw ParseError("field 'timestamp' must be a string", line);
    msg.timestamp = ts->get<std::string>();
  }
  return msg;
}

std::optional<NpsLabel> parse_label(const json& record, std::size_t line) {
  const bool has_raw = record.contains("nps_raw") && !record["nps_raw"].is_null();
  const bool has_class = record.contains("nps_class") && !record["nps_class"].is_null();
  if (has_raw && has_class) throw ParseError("record carries both nps_raw and nps_class", line);
  try {
    if (has_raw) {
      const auto& raw = record["nps_raw"];
      if (!raw.is_number_integer()) throw ParseError("nps_raw must be an integer", line);
      return label_from_nps(raw.get<int>());
    }
    if (has_class) {
      const auto& cls = record["nps_class"];
      if (!cls.is_string()) throw ParseError("nps_class must be a string", line);
      NpsLabel label;
      label.klass = nps_class_from_string(cls.get<std::string>());
      return label;
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line);
  }
  return std::nullopt;
}

}  // namespace

Corpus parse_corpus(std::string_view jsonl) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> user_slot;
  std::set<std::string> conversation_ids;
  const auto lines = io::split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (text::is_blank(lines[i])) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw ParseError("record must be a JSON object", line_no);

    Conversation conv;
    conv.conversation_id = required_string(record, "conversation_id", line_no);
    conv.user_id = required_string(record, "user_id", line_no);
    auto msgs = record.find("messages");
    if (msgs == record.end() || !msgs->is_array()) throw ParseError("missing array field 'messages'", line_no);
    int index = 0;
    for (const auto& m : *msgs) conv.messages.push_back(parse_message(m, index++, line_no));

    if (!conversation_ids.insert(conv.conversation_id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate conversation_id '" +
                            conv.conversation_id + "'");
    }
    const std::optional<NpsLabel> label = parse_label(record, line_no);

    auto [it, inserted] = user_slot.emplace(conv.user_id, corpus.users.size());
    if (inserted) {
      UserRecord user;
      user.user_id = conv.user_id;
      user.label = label;
      corpus.users.push_back(std::move(user));
    } else if (corpus.users[it->second].label != label) {
      throw ValidationError("line " + std::to_string(line_no) + ": NPS label of user '" + conv.user_id +
                            "' disagrees with an earlier record");
    }
    corpus.users[it->second].conversations.push_back(std::move(conv));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  Corpus corpus = parse_corpus(io::read_file(path));
  corpus.provenance = path.string();
  return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& user : corpus.users) {
    for (const auto& conv : user.conversations) {
      json record;
      record["conversation_id"] = conv.conversation_id;
      record["user_id"] = user.user_id;
      if (user.label) {
        if (user.label->raw_score) {
          record["nps_raw"] = *user.label->raw_score;
        } else {
          record["nps_class"] = std::string(to_string(user.label->klass));
        }
      }
      json messages = json::array();
      for (const auto& m : conv.messages) {
        json jm;
        jm["sender"] = m.sender == Sender::customer ? "customer" : "agent";
        jm["text"] = m.text;
        if (m.timestamp) jm["timestamp"] = *m.timestamp;
        messages.push_back(std::move(jm));
      }
      record["messages"] = std::move(messages);
      out += record.dump();
      out += '\n';
    }
  }
  return out;
}

Corpus preprocess(const Corpus& corpus) {
  Corpus out;
  out.provenance = corpus.provenance;
  for (const auto& user : corpus.users) {
    UserRecord cleaned_user;
    cleaned_user.user_id = user.user_id;
    cleaned_user.label = user.label;
    for (const auto& conv : user.conversations) {
      Conversation cleaned;
      cleaned.conversation_id = conv.conversation_id;
      cleaned.user_id = conv.user_id;
      for (const auto& m : conv.messages) {
        std::string t = text::clean(m.text);
        if (t.empty()) continue;
        Message kept = m;
        kept.text = std::move(t);
        kept.index = static_cast<int>(cleaned.messages.size());
        cleaned.messages.push_back(std::move(kept));
      }
      if (cleaned.customer_message_count() == 0) continue;
      cleaned_user.conversations.push_back(std::move(cleaned));
    }
    if (!cleaned_user.conversations.empty()) out.users.push_back(std::move(cleaned_user));
  }
  return out;
}

const Conversation& longest_conversation(const UserRecord& user) {
  if (user.conversations.empty()) {
    throw ContractError("user '" + user.user_id + "' has no conversations");
  }
  const Conversation* best = &user.conversations.front();
  std::size_t best_len = best->customer_message_count();
  for (const auto& c : user.conversations) {
    const std::size_t len = c.customer_message_count();
    if (len > best_len || (len == best_len && c.conversation_id < best->conversation_id)) {
      best = &c;
      best_len = len;
    }
  }
  return *best;
}

std::size_t split_test_target(std::size_t total_users, double test_fraction) {
  return static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total_users)));
}

SplitResult split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie strictly between 0 and 1");
  }
  // Class 0 = non-promoter, class 1 = promoter; users ordered by id so the
  // draw does not depend on input order.
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < corpus.users.size(); ++i) {
    const auto& u = corpus.users[i];
    if (!u.label) throw ValidationError("cannot stratify unlabeled user '" + u.user_id + "'");
    by_class[u.label->is_promoter() ? 1 : 0].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw ValidationError(std::string("stratified split needs both classes; no ") +
                            (c == 1 ? "promoter" : "non-promoter") + " users");
    }
  }

  Rng rng(seed);
  std::size_t take[2];
  bool has_remainder[2];
  std::size_t floor_total = 0;
  for (int c = 0; c < 2; ++c) {
    auto& ids = by_class[c];
    std::sort(ids.begin(), ids.end(),
              [&](std::size_t a, std::size_t b) { return corpus.users[a].user_id < corpus.users[b].user_id; });
    rng.shuffle(std::span<std::size_t>(ids));
    const double exact = test_fraction * static_cast<double>(ids.size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    has_remainder[c] = exact > static_cast<double>(take[c]) && take[c] < ids.size();
    floor_total += take[c];
  }

  const std::size_t target = split_test_target(corpus.users.size(), test_fraction);
  std::vector<int> eligible;
  for (int c = 0; c < 2; ++c) {
    if (has_remainder[c]) eligible.push_back(c);
  }
  rng.shuffle(std::span<int>(eligible));
  for (std::size_t k = 0; floor_total + k < target && k < eligible.size(); ++k) ++take[eligible[k]];

  std::vector<bool> in_test(corpus.users.size(), false);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < take[c]; ++k) in_test[by_class[c][k]] = true;
  }

  SplitResult result;
  result.train.provenance = corpus.provenance;
  result.test.provenance = corpus.provenance;
  for (std::size_t i = 0; i < corpus.users.size(); ++i) {
    (in_test[i] ? result.test : result.train).users.push_back(corpus.users[i]);
  }
  return result;
}

}  // namespace convodyn
