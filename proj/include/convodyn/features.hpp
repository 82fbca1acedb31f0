#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convodyn/corpus.hpp"
#include "convodyn/sentiment.hpp"

namespace convodyn {

// Missing feature marker. Degenerate dynamics (too few messages for a slope
// or a second difference) are reported as missing, never as zero.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class ExperimentKind { B, B_LW, B_LW_NP };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(std::string_view name);

struct FeatureVector {
  std::string user_id;
  int label = 0;  // promoter = 1, passive and detractor = 0
  std::vector<std::string> names;
  std::vector<double> values;

  std::optional<double> get(std::string_view name) const;
};

struct FeatureMatrix {
  ExperimentKind experiment = ExperimentKind::B;
  std::vector<std::string> schema;
  std::vector<std::string> user_ids;
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_features() const { return schema.size(); }
  std::size_t count_label(int label) const;
  std::size_t column_of(std::string_view name) const;  // throws if absent

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  bool operator==(const FeatureMatrix&) const;  // NaN-aware
};

// Baseline: statistics of the whole-conversation sentiment over all of the
// user's conversations, plus the number of conversations.
std::vector<std::string> baseline_schema();
FeatureVector baseline_features(const UserRecord& user, const Scorer& scorer, std::size_t max_chars = 2000);

// Line-wise: dynamics of the customer-message curve of the longest
// conversation, plus the mean whole-conversation sentiment over all
// conversations.
std::vector<std::string> linewise_schema();
FeatureVector linewise_features(const UserRecord& user, const Scorer& scorer, std::size_t max_chars = 2000);

// Column set of an experiment. B_LW and B_LW_NP carry the average static
// sentiment once, under the baseline name static_mean.
std::vector<std::string> experiment_schema(ExperimentKind kind);

// Rows sorted by user_id. B_LW_NP drops passive users.
FeatureMatrix assemble_matrix(const Corpus& corpus, ExperimentKind kind, const Scorer& scorer,
                              std::size_t max_chars = 2000);

// CSV: header = schema then user_id,label; missing values are empty cells.
std::string serialize_matrix(const FeatureMatrix& matrix);
FeatureMatrix parse_matrix(std::string_view csv, ExperimentKind kind);
FeatureMatrix load_matrix(const std::filesystem::path& path, ExperimentKind kind);

}  // namespace convodyn
