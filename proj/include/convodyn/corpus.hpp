#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace convodyn {

enum class Sender { customer, agent };

struct Message {
  int index = 0;  // position within the conversation, contiguous from 0
  Sender sender = Sender::customer;
  std::string text;
  std::optional<std::string> timestamp;

  bool operator==(const Message&) const = default;
};

struct Conversation {
  std::string conversation_id;
  std::string user_id;
  std::vector<Message> messages;

  // Customer messages in send order. Agent turns never enter features.
  std::vector<const Message*> customer_messages() const;
  std::size_t customer_message_count() const;

  bool operator==(const Conversation&) const = default;
};

enum class NpsClass { promoter, passive, detractor };

std::string_view to_string(NpsClass klass);
NpsClass nps_class_from_string(std::string_view name);

struct NpsLabel {
  std::optional<int> raw_score;
  NpsClass klass = NpsClass::detractor;

  bool is_promoter() const { return klass == NpsClass::promoter; }
  bool operator==(const NpsLabel&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::vector<Conversation> conversations;
  std::optional<NpsLabel> label;  // absent for unlabeled corpora

  bool operator==(const UserRecord&) const = default;
};

struct Corpus {
  std::vector<UserRecord> users;
  std::string provenance;

  std::size_t conversation_count() const;
  const Conversation* find_conversation(std::string_view conversation_id) const;

  bool operator==(const Corpus&) const = default;
};

// Segments a 0-10 survey answer: 9-10 promoter, 7-8 passive, 0-6 detractor.
NpsLabel label_from_nps(int raw);

// Reads conversation JSONL. Records are grouped by user_id in order of first
// appearance; message indices are assigned from array position.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view jsonl);

// Canonical JSONL form: one line per conversation, users in corpus order.
std::string serialize_corpus(const Corpus& corpus);

// Strips characters outside letters, digits, whitespace and . , ; : ! ? ' " ( ) -
// then trims; drops blank messages, conversations without customer turns and
// users without conversations; re-indexes messages.
Corpus preprocess(const Corpus& corpus);

// The conversation with the most customer messages; ties go to the smallest
// conversation_id.
const Conversation& longest_conversation(const UserRecord& user);

struct SplitResult {
  Corpus train;
  Corpus test;
};

// User-wise split stratified on promoter vs non-promoter. Each class sends
// floor(fraction * n) users to test; the remaining shortfall against
// round(fraction * N) is filled one user per class by seeded draw.
SplitResult split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

// Number of test users the split produces for the given class sizes.
std::size_t split_test_target(std::size_t total_users, double test_fraction);

}  // namespace convodyn
