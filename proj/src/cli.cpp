#include "convodyn/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "convodyn/corpus.hpp"
#include "convodyn/dynamics.hpp"
#include "convodyn/error.hpp"
#include "convodyn/eval.hpp"
#include "convodyn/explain.hpp"
#include "convodyn/features.hpp"
#include "convodyn/io.hpp"
#include "convodyn/model.hpp"
#include "convodyn/rng.hpp"
#include "convodyn/sentiment.hpp"
#include "convodyn/synth.hpp"

namespace convodyn {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct RunConfig {
  fs::path out = "out";
  fs::path corpus;  // raw corpus; defaults to <out>/corpus.jsonl
  fs::path scores;  // precomputed scores for the score stage; defaults to <out>/scores.jsonl
  ScorerKind scorer = ScorerKind::lexicon;
  std::string endpoint;
  std::size_t batch_size = 32;
  std::size_t max_chars = 2000;
  ExperimentKind experiment = ExperimentKind::B_LW;
  double test_fraction = 0.2;
  int candidates = 10;
  int folds = 10;
  double threshold = 0.5;
  std::uint64_t split_seed = 1;
  std::uint64_t sample_seed = 2;
  std::uint64_t search_seed = 3;
  std::uint64_t synth_seed = 4;
  synth::SynthConfig synth;
  std::string conversation;  // curve
};

// Artifact locations inside the output directory.
fs::path raw_corpus_path(const RunConfig& c) { return c.corpus.empty() ? c.out / "corpus.jsonl" : c.corpus; }
fs::path clean_corpus_path(const RunConfig& c) { return c.out / "corpus.clean.jsonl"; }
fs::path input_scores_path(const RunConfig& c) { return c.scores.empty() ? c.out / "scores.jsonl" : c.scores; }
fs::path sentiment_path(const RunConfig& c) { return c.out / "sentiment.jsonl"; }
std::string exp_name(const RunConfig& c) { return std::string(to_string(c.experiment)); }
fs::path train_features_path(const RunConfig& c) { return c.out / ("features_" + exp_name(c) + "_train.csv"); }
fs::path test_features_path(const RunConfig& c) { return c.out / ("features_" + exp_name(c) + "_test.csv"); }
fs::path model_path(const RunConfig& c) { return c.out / ("model_" + exp_name(c) + ".json"); }

void note(const std::string& line) { std::cerr << line << '\n'; }

void wrote(const fs::path& p) { note("wrote " + p.string()); }

template <typename T>
T json_get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

void apply_config_file(const fs::path& path, RunConfig& c) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "out") c.out = json_get<std::string>(j, k);
    else if (key == "corpus") c.corpus = json_get<std::string>(j, k);
    else if (key == "scores") c.scores = json_get<std::string>(j, k);
    else if (key == "scorer") c.scorer = scorer_kind_from_string(json_get<std::string>(j, k));
    else if (key == "endpoint") c.endpoint = json_get<std::string>(j, k);
    else if (key == "batch_size") c.batch_size = json_get<std::size_t>(j, k);
    else if (key == "max_chars") c.max_chars = json_get<std::size_t>(j, k);
    else if (key == "experiment") c.experiment = experiment_from_string(json_get<std::string>(j, k));
    else if (key == "test_fraction") c.test_fraction = json_get<double>(j, k);
    else if (key == "candidates") c.candidates = json_get<int>(j, k);
    else if (key == "folds") c.folds = json_get<int>(j, k);
    else if (key == "threshold") c.threshold = json_get<double>(j, k);
    else if (key == "split_seed") c.split_seed = json_get<std::uint64_t>(j, k);
    else if (key == "sample_seed") c.sample_seed = json_get<std::uint64_t>(j, k);
    else if (key == "search_seed") c.search_seed = json_get<std::uint64_t>(j, k);
    else if (key == "synth_seed") c.synth_seed = json_get<std::uint64_t>(j, k);
    else if (key == "conversation") c.conversation = json_get<std::string>(j, k);
    else if (key == "synth") {
      if (!value.is_object()) throw ValidationError("config key 'synth' must be an object");
      for (const auto& [skey, svalue] : value.items()) {
        const char* s = skey.c_str();
        auto& sc = c.synth;
        if (skey == "n_users") sc.n_users = json_get<std::size_t>(value, s);
        else if (skey == "promoter_weight") sc.promoter_weight = json_get<double>(value, s);
        else if (skey == "detractor_weight") sc.detractor_weight = json_get<double>(value, s);
        else if (skey == "passive_weight") sc.passive_weight = json_get<double>(value, s);
        else if (skey == "mean_conversations") sc.mean_conversations = json_get<double>(value, s);
        else if (skey == "mean_longest_messages") sc.mean_longest_messages = json_get<double>(value, s);
        else if (skey == "length_gap") sc.length_gap = json_get<double>(value, s);
        else if (skey == "signal_strength") sc.signal_strength = json_get<double>(value, s);
        else if (skey == "star_noise") sc.star_noise = json_get<double>(value, s);
        else throw ValidationError("unknown synth config key '" + skey + "'");
      }
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
}

std::unique_ptr<Scorer> backend_scorer(const RunConfig& c, const fs::path& scores) {
  ScorerBackend b;
  b.kind = c.scorer;
  b.scores_path = scores;
  b.endpoint = c.endpoint;
  b.batch_size = c.batch_size;
  b.max_chars = c.max_chars;
  return make_scorer(b);
}

Corpus load_clean(const RunConfig& c) { return load_corpus(clean_corpus_path(c)); }

// ---- stages ----

void stage_synth(const RunConfig& c) {
  synth::SynthConfig sc = c.synth;
  sc.seed = c.synth_seed;
  sc.max_chars = c.max_chars;
  const auto generated = synth::generate(sc);
  const fs::path corpus = raw_corpus_path(c);
  const fs::path scores = input_scores_path(c);
  io::write_atomic(corpus, serialize_corpus(generated.corpus));
  io::write_atomic(scores, serialize_precomputed(generated.scores));
  wrote(corpus);
  wrote(scores);
}

void stage_ingest(const RunConfig& c) {
  const Corpus raw = load_corpus(raw_corpus_path(c));
  const Corpus clean = preprocess(raw);
  io::write_atomic(clean_corpus_path(c), serialize_corpus(clean));
  note("ingest: " + std::to_string(clean.users.size()) + " of " + std::to_string(raw.users.size()) + " users, " +
       std::to_string(clean.conversation_count()) + " of " + std::to_string(raw.conversation_count()) +
       " conversations kept");
  wrote(clean_corpus_path(c));
}

// Scores every customer message and every whole conversation once, so later
// stages (and repeated runs) never call the backend again.
void stage_score(const RunConfig& c) {
  const Corpus corpus = load_clean(c);
  const auto scorer = backend_scorer(c, input_scores_path(c));
  std::vector<PrecomputedRecord> records;
  std::vector<std::string> texts;
  std::vector<ScoreRequest> requests;
  for (const auto& user : corpus.users) {
    for (const auto& conv : user.conversations) {
      for (const Message* m : conv.customer_messages()) {
        records.push_back({conv.conversation_id, m->index, {}});
        texts.push_back(m->text);
      }
      records.push_back({conv.conversation_id, kConversationIndex, {}});
      texts.push_back(conversation_text(conv, c.max_chars));
    }
  }
  requests.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    requests.push_back({records[i].conversation_id, records[i].message_index, texts[i]});
  }
  const auto dists = scorer->score(requests);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].dist = dists[i];
  io::write_atomic(sentiment_path(c), serialize_precomputed(records));
  note("score: " + std::to_string(records.size()) + " texts scored with " + std::string(to_string(c.scorer)));
  wrote(sentiment_path(c));
}

void stage_featurize(const RunConfig& c) {
  const Corpus corpus = load_clean(c);
  const PrecomputedScorer scorer = PrecomputedScorer::load(sentiment_path(c));
  const SplitResult parts = split(corpus, c.test_fraction, c.split_seed);
  const FeatureMatrix train = assemble_matrix(parts.train, c.experiment, scorer, c.max_chars);
  const FeatureMatrix test = assemble_matrix(parts.test, c.experiment, scorer, c.max_chars);

  ordered_json s;
  s["split_seed"] = c.split_seed;
  s["test_fraction"] = c.test_fraction;
  s["train"] = json::array();
  s["test"] = json::array();
  for (const auto& u : parts.train.users) s["train"].push_back(u.user_id);
  for (const auto& u : parts.test.users) s["test"].push_back(u.user_id);
  const fs::path split_file = c.out / "split.json";
  io::write_atomic(split_file, s.dump(1) + "\n");
  io::write_atomic(train_features_path(c), serialize_matrix(train));
  io::write_atomic(test_features_path(c), serialize_matrix(test));
  note("featurize " + exp_name(c) + ": " + std::to_string(train.n_rows()) + " train rows, " +
       std::to_string(test.n_rows()) + " test rows, " + std::to_string(train.n_features()) + " features");
  wrote(split_file);
  wrote(train_features_path(c));
  wrote(test_features_path(c));
}

ordered_json params_json(const model::HyperParams& p) {
  ordered_json j;
  j["n_trees"] = p.n_trees;
  j["max_depth"] = p.max_depth;
  j["learning_rate"] = p.learning_rate;
  j["min_child_weight"] = p.min_child_weight;
  j["subsample_ratio"] = p.subsample_ratio;
  j["colsample_ratio"] = p.colsample_ratio;
  j["l2_lambda"] = p.l2_lambda;
  j["gamma_min_gain"] = p.gamma_min_gain;
  return j;
}

void stage_train(const RunConfig& c) {
  const FeatureMatrix train = load_matrix(train_features_path(c), c.experiment);
  const FeatureMatrix balanced = model::undersample(train, c.sample_seed);
  note("train " + exp_name(c) + ": " + std::to_string(balanced.n_rows()) + " rows after undersampling " +
       std::to_string(train.n_rows()));
  const auto search =
      model::random_search(balanced, model::SearchSpace{}, c.candidates, c.folds, c.search_seed);
  const model::TreeEnsemble ensemble = model::fit_gbt(balanced, search.best, Rng::derive(c.search_seed, 2));

  ordered_json cv;
  cv["experiment"] = exp_name(c);
  cv["seed"] = search.report.seed;
  cv["folds"] = search.report.folds;
  cv["best"] = search.report.best;
  cv["candidates"] = json::array();
  for (const auto& cand : search.report.candidates) {
    ordered_json e;
    e["params"] = params_json(cand.params);
    e["fold_auc"] = cand.fold_auc;
    e["mean_auc"] = cand.mean_auc;
    e["std_auc"] = cand.std_auc;
    cv["candidates"].push_back(std::move(e));
  }
  const fs::path cv_file = c.out / ("cv_" + exp_name(c) + ".json");
  io::write_atomic(cv_file, cv.dump(2) + "\n");
  model::save_model(ensemble, model_path(c));
  note("train " + exp_name(c) + ": best cv auc " +
       io::format_double(search.report.candidates[search.report.best].mean_auc));
  wrote(cv_file);
  wrote(model_path(c));
}

void stage_evaluate(const RunConfig& c) {
  const model::TreeEnsemble ensemble = model::load_model(model_path(c));
  const FeatureMatrix test = load_matrix(test_features_path(c), c.experiment);
  const eval::Evaluation result = eval::evaluate(ensemble, test, c.threshold);
  const auto mono = eval::scorecard_monotonicity(result.scorecard);

  const fs::path report = c.out / ("report_" + exp_name(c) + ".json");
  const fs::path card = c.out / ("scorecard_" + exp_name(c) + ".csv");
  const fs::path mono_file = c.out / ("monotonicity_" + exp_name(c) + ".json");
  ordered_json m;
  m["holds"] = mono.holds;
  m["bins_checked"] = mono.bins_checked;
  m["non_promoter_fraction"] = mono.non_promoter_fraction;
  io::write_atomic(report, eval::report_json(result.report));
  io::write_atomic(card, eval::scorecard_csv(result.scorecard));
  io::write_atomic(mono_file, m.dump(2) + "\n");
  note("evaluate " + exp_name(c) + ": auc " + io::format_double(result.report.auc) + ", ks " +
       io::format_double(result.report.ks) + ", macro_f1 " + io::format_double(result.report.macro_f1) +
       ", specificity " + io::format_double(result.report.specificity) + ", scorecard monotone " +
       (mono.holds ? "yes" : "no"));
  wrote(report);
  wrote(card);
  wrote(mono_file);
}

void stage_explain(const RunConfig& c) {
  const model::TreeEnsemble ensemble = model::load_model(model_path(c));
  const FeatureMatrix test = load_matrix(test_features_path(c), c.experiment);
  const auto attributions = explain::attribute(ensemble, test);
  const auto summary = explain::summarize(test, attributions);
  const fs::path rows = c.out / ("shap_" + exp_name(c) + ".csv");
  const fs::path ranked = c.out / ("shap_summary_" + exp_name(c) + ".csv");
  io::write_atomic(rows, explain::attributions_csv(test.schema, attributions));
  io::write_atomic(ranked, explain::summary_csv(summary));
  wrote(rows);
  wrote(ranked);
}

void stage_curve(const RunConfig& c) {
  if (c.conversation.empty()) throw ValidationError("curve needs --conversation");
  const fs::path clean = clean_corpus_path(c);
  const Corpus corpus = load_corpus(fs::exists(clean) ? clean : raw_corpus_path(c));
  const Conversation* conv = corpus.find_conversation(c.conversation);
  if (conv == nullptr) throw ValidationError("conversation '" + c.conversation + "' not in corpus");

  // Reuse the scored cache when the score stage already ran.
  std::unique_ptr<Scorer> scorer;
  if (fs::exists(sentiment_path(c))) {
    scorer = std::make_unique<PrecomputedScorer>(PrecomputedScorer::load(sentiment_path(c)));
  } else {
    scorer = backend_scorer(c, input_scores_path(c));
  }
  const auto series = dynamics::continuous_curve(message_wise_series(*scorer, *conv));
  std::string csv = "message_index,star,continuous,ewma,trend_fit\n";
  for (const auto& p : dynamics::curve_points(series)) {
    csv += std::to_string(p.message_index) + "," + std::to_string(p.star) + "," + io::format_double(p.continuous) +
           "," + io::format_double(p.ewma) + "," + io::format_double(p.trend_fit) + "\n";
  }
  const fs::path file = c.out / ("curve_" + c.conversation + ".csv");
  io::write_atomic(file, csv);
  wrote(file);
}

void stage_pipeline(const RunConfig& c) {
  if (c.corpus.empty() && !fs::exists(raw_corpus_path(c))) stage_synth(c);
  stage_ingest(c);
  stage_score(c);
  stage_featurize(c);
  stage_train(c);
  stage_evaluate(c);
  stage_explain(c);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Promoter detection from conversation sentiment dynamics", "convodyn"};
  app.require_subcommand(1);

  std::string config_path, experiment, scorer, endpoint, out, corpus, scores, conversation;
  std::uint64_t seed = 0, split_seed = 0, sample_seed = 0, search_seed = 0, synth_seed = 0;
  double test_fraction = 0, signal = 0, threshold = 0;
  int candidates = 0, folds = 0;
  std::size_t users = 0, batch_size = 0, max_chars = 0;

  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_exp = app.add_option("--experiment", experiment, "B, B_LW or B_LW_NP");
  auto* o_scorer = app.add_option("--scorer", scorer, "lexicon, precomputed or remote");
  auto* o_endpoint = app.add_option("--endpoint", endpoint, "remote scorer base URL (else $CONVODYN_ENDPOINT)");
  auto* o_seed = app.add_option("--seed", seed, "sets every seed");
  auto* o_split_seed = app.add_option("--split-seed", split_seed);
  auto* o_sample_seed = app.add_option("--sample-seed", sample_seed);
  auto* o_search_seed = app.add_option("--search-seed", search_seed);
  auto* o_synth_seed = app.add_option("--synth-seed", synth_seed);
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_corpus = app.add_option("--corpus", corpus, "raw corpus JSONL");
  auto* o_scores = app.add_option("--scores", scores, "precomputed score JSONL");
  auto* o_test = app.add_option("--test-fraction", test_fraction);
  auto* o_cand = app.add_option("--candidates", candidates, "random-search candidates");
  auto* o_folds = app.add_option("--folds", folds, "cross-validation folds");
  auto* o_threshold = app.add_option("--threshold", threshold, "classification threshold");
  auto* o_users = app.add_option("--users", users, "synthetic user count");
  auto* o_signal = app.add_option("--signal", signal, "synthetic signal strength");
  auto* o_batch = app.add_option("--batch-size", batch_size, "remote scorer batch size");
  auto* o_chars = app.add_option("--max-chars", max_chars, "whole-conversation truncation");
  auto* o_conv = app.add_option("--conversation", conversation, "conversation id for curve");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  static constexpr Command kCommands[] = {
      {"synth", "generate a synthetic corpus and precomputed scores", stage_synth},
      {"ingest", "clean the raw corpus", stage_ingest},
      {"score", "score messages and conversations", stage_score},
      {"featurize", "split users and build feature matrices", stage_featurize},
      {"train", "undersample, random search, fit", stage_train},
      {"evaluate", "test-set metrics and scorecard", stage_evaluate},
      {"explain", "SHAP attributions on the test set", stage_explain},
      {"curve", "sentiment curve of one conversation", stage_curve},
      {"pipeline", "all stages in order", stage_pipeline},
  };
  for (const auto& cmd : kCommands) app.add_subcommand(cmd.name, cmd.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig c;
    if (*o_config) apply_config_file(config_path, c);
    if (*o_out) c.out = out;
    if (*o_corpus) c.corpus = corpus;
    if (*o_scores) c.scores = scores;
    if (*o_exp) c.experiment = experiment_from_string(experiment);
    if (*o_scorer) c.scorer = scorer_kind_from_string(scorer);
    if (*o_endpoint) c.endpoint = endpoint;
    if (*o_seed) c.split_seed = c.sample_seed = c.search_seed = c.synth_seed = seed;
    if (*o_split_seed) c.split_seed = split_seed;
    if (*o_sample_seed) c.sample_seed = sample_seed;
    if (*o_search_seed) c.search_seed = search_seed;
    if (*o_synth_seed) c.synth_seed = synth_seed;
    if (*o_test) c.test_fraction = test_fraction;
    if (*o_cand) c.candidates = candidates;
    if (*o_folds) c.folds = folds;
    if (*o_threshold) c.threshold = threshold;
    if (*o_users) c.synth.n_users = users;
    if (*o_signal) c.synth.signal_strength = signal;
    if (*o_batch) c.batch_size = batch_size;
    if (*o_chars) c.max_chars = max_chars;
    if (*o_conv) c.conversation = conversation;
    if (c.endpoint.empty()) {
      if (const char* env = std::getenv("CONVODYN_ENDPOINT")) c.endpoint = env;
    }

    for (const auto& cmd : kCommands) {
      if (app.got_subcommand(cmd.name)) cmd.run(c);
    }
    return 0;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace convodyn
