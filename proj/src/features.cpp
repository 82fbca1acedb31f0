#include "convodyn/features.hpp"

#include <algorithm>
#include <numeric>

#include "convodyn/dynamics.hpp"
#include "convodyn/error.hpp"
#include "convodyn/io.hpp"

namespace convodyn {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::B:
      return "B";
    case ExperimentKind::B_LW:
      return "B_LW";
    case ExperimentKind::B_LW_NP:
      return "B_LW_NP";
  }
  return "B";
}

ExperimentKind experiment_from_string(std::string_view name) {
  if (name == "B") return ExperimentKind::B;
  if (name == "B_LW") return ExperimentKind::B_LW;
  if (name == "B_LW_NP") return ExperimentKind::B_LW_NP;
  throw ValidationError("unknown experiment '" + std::string(name) + "' (expected B, B_LW or B_LW_NP)");
}

std::optional<double> FeatureVector::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  return std::nullopt;
}

std::size_t FeatureMatrix::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

std::size_t FeatureMatrix::column_of(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i] == name) return i;
  }
  throw ValidationError("feature '" + std::string(name) + "' not in schema");
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.experiment = experiment;
  out.schema = schema;
  for (std::size_t i : indices) {
    out.user_ids.push_back(user_ids.at(i));
    out.labels.push_back(labels.at(i));
    out.rows.push_back(rows.at(i));
  }
  return out;
}

bool FeatureMatrix::operator==(const FeatureMatrix& other) const {
  if (experiment != other.experiment || schema != other.schema || user_ids != other.user_ids ||
      labels != other.labels || rows.size() != other.rows.size()) {
    return false;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != other.rows[r].size()) return false;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const double a = rows[r][c];
      const double b = other.rows[r][c];
      if (is_missing(a) != is_missing(b)) return false;
      if (!is_missing(a) && a != b) return false;
    }
  }
  return true;
}

namespace {

int binary_label(const UserRecord& user) {
  if (!user.label) throw ValidationError("user '" + user.user_id + "' has no NPS label");
  return user.label->is_promoter() ? 1 : 0;
}

std::vector<double> static_sentiments(const UserRecord& user, const Scorer& scorer, std::size_t max_chars) {
  std::vector<double> out;
  out.reserve(user.conversations.size());
  for (const auto& c : user.conversations) {
    out.push_back(static_conversation_sentiment(scorer, c, max_chars).continuous);
  }
  return out;
}

FeatureVector make_vector(const UserRecord& user, std::vector<std::string> names) {
  FeatureVector fv;
  fv.user_id = user.user_id;
  fv.label = user.label ? (user.label->is_promoter() ? 1 : 0) : 0;
  fv.names = std::move(names);
  fv.values.assign(fv.names.size(), kMissing);
  return fv;
}

void require_conversations(const UserRecord& user) {
  if (user.conversations.empty()) throw ContractError("user '" + user.user_id + "' has no conversations");
}

}  // namespace

std::vector<std::string> baseline_schema() {
  return {"static_mean", "static_min", "static_max", "static_median", "n_interactions"};
}

std::vector<std::string> linewise_schema() {
  return {"lw_slope",          "lw_concavity_mean", "lw_mean",
          "lw_min",            "lw_max",            "lw_median",
          "lw_std",            "lw_cv",             "lw_last_sentiment",
          "lw_n_messages",     "lw_star_count_0",   "lw_star_count_1",
          "lw_star_count_2",   "lw_star_count_3",   "lw_star_count_4",
          "lw_lastthird_mean", "lw_lastthird_min",  "lw_lastthird_max",
          "avg_static_sentiment_all_convs"};
}

FeatureVector baseline_features(const UserRecord& user, const Scorer& scorer, std::size_t max_chars) {
  require_conversations(user);
  const auto statics = static_sentiments(user, scorer, max_chars);
  const auto stats = dynamics::descriptive_stats(statics);
  FeatureVector fv = make_vector(user, baseline_schema());
  fv.values = {stats.mean, stats.min, stats.max, stats.median, static_cast<double>(user.conversations.size())};
  return fv;
}

FeatureVector linewise_features(const UserRecord& user, const Scorer& scorer, std::size_t max_chars) {
  require_conversations(user);
  const Conversation& longest = longest_conversation(user);
  const auto scores = message_wise_series(scorer, longest);
  const auto series = dynamics::continuous_curve(scores);
  const auto smoothed = dynamics::ewma(series.values, dynamics::kDefaultAlpha);

  const auto trend = dynamics::linear_trend(smoothed);
  const auto concavity = dynamics::second_derivative_mean(smoothed);
  const auto stats = dynamics::descriptive_stats(series.values);
  const auto tail = dynamics::descriptive_stats(dynamics::last_third(series.values));
  const auto counts = dynamics::star_counts(series);
  const auto statics = static_sentiments(user, scorer, max_chars);
  const double avg_static = std::accumulate(statics.begin(), statics.end(), 0.0) / static_cast<double>(statics.size());

  FeatureVector fv = make_vector(user, linewise_schema());
  fv.values = {trend.defined ? trend.slope : kMissing,
               concavity.defined ? concavity.mean : kMissing,
               stats.mean,
               stats.min,
               stats.max,
               stats.median,
               stats.std,
               stats.cv,
               series.values.back(),
               static_cast<double>(series.size()),
               static_cast<double>(counts[0]),
               static_cast<double>(counts[1]),
               static_cast<double>(counts[2]),
               static_cast<double>(counts[3]),
               static_cast<double>(counts[4]),
               tail.mean,
               tail.min,
               tail.max,
               avg_static};
  return fv;
}

std::vector<std::string> experiment_schema(ExperimentKind kind) {
  auto schema = baseline_schema();
  if (kind == ExperimentKind::B) return schema;
  for (auto& name : linewise_schema()) {
    if (name == "avg_static_sentiment_all_convs") continue;  // same value as static_mean
    schema.push_back(std::move(name));
  }
  return schema;
}

FeatureMatrix assemble_matrix(const Corpus& corpus, ExperimentKind kind, const Scorer& scorer,
                              std::size_t max_chars) {
  std::vector<const UserRecord*> users;
  for (const auto& u : corpus.users) {
    binary_label(u);
    if (kind == ExperimentKind::B_LW_NP && u.label->klass == NpsClass::passive) continue;
    users.push_back(&u);
  }
  std::sort(users.begin(), users.end(),
            [](const UserRecord* a, const UserRecord* b) { return a->user_id < b->user_id; });

  FeatureMatrix m;
  m.experiment = kind;
  m.schema = experiment_schema(kind);
  for (const UserRecord* u : users) {
    const FeatureVector base = baseline_features(*u, scorer, max_chars);
    std::vector<double> row = base.values;
    if (kind != ExperimentKind::B) {
      const FeatureVector lw = linewise_features(*u, scorer, max_chars);
      for (std::size_t i = 0; i < lw.names.size(); ++i) {
        if (lw.names[i] == "avg_static_sentiment_all_convs") continue;
        row.push_back(lw.values[i]);
      }
    }
    m.user_ids.push_back(u->user_id);
    m.labels.push_back(binary_label(*u));
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::string serialize_matrix(const FeatureMatrix& matrix) {
  std::string out;
  for (const auto& name : matrix.schema) {
    out += io::csv_escape(name);
    out += ',';
  }
  out += "user_id,label\n";
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    for (double v : matrix.rows[r]) {
      if (!is_missing(v)) out += io::format_double(v);
      out += ',';
    }
    out += io::csv_escape(matrix.user_ids[r]);
    out += ',';
    out += std::to_string(matrix.labels[r]);
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_matrix(std::string_view csv, ExperimentKind kind) {
  const auto lines = io::split_lines(csv);
  if (lines.empty()) throw ParseError("feature CSV has no header", 1);
  auto header = io::split_csv_line(lines[0]);
  if (header.size() < 2 || header[header.size() - 2] != "user_id" || header.back() != "label") {
    throw ParseError("feature CSV header must end with user_id,label", 1);
  }
  FeatureMatrix m;
  m.experiment = kind;
  m.schema.assign(header.begin(), header.end() - 2);
  if (m.schema != experiment_schema(kind)) {
    throw ParseError("feature CSV columns do not match experiment " + std::string(to_string(kind)), 1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = io::split_csv_line(lines[i]);
    if (cells.size() != header.size()) throw ParseError("row width differs from header", i + 1);
    std::vector<double> row;
    row.reserve(m.schema.size());
    try {
      for (std::size_t c = 0; c < m.schema.size(); ++c) {
        row.push_back(cells[c].empty() ? kMissing : io::parse_double(cells[c]));
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), i + 1);
    }
    const std::string& label = cells.back();
    if (label != "0" && label != "1") throw ParseError("label must be 0 or 1", i + 1);
    m.user_ids.push_back(cells[cells.size() - 2]);
    m.labels.push_back(label == "1" ? 1 : 0);
    m.rows.push_back(std::move(row));
  }
  return m;
}

FeatureMatrix load_matrix(const std::filesystem::path& path, ExperimentKind kind) {
  return parse_matrix(io::read_file(path), kind);
}

}  // namespace convodyn
