#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "convodyn/cli.hpp"
#include "convodyn/io.hpp"

using namespace convodyn;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "convodyn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("convodyn_cli_" + name);
  fs::remove_all(p);
  return p;
}

const std::vector<std::string> kSmall = {"--users", "300", "--candidates", "2", "--folds", "3", "--seed", "7"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_CASE("pipeline equals the stages run one by one") {
  const auto a = fresh_dir("pipeline");
  const auto b = fresh_dir("stages");
  REQUIRE(run(with({"pipeline", "--out", a.string(), "--experiment", "B_LW"}, kSmall)) == 0);
  for (const char* stage : {"synth", "ingest", "score", "featurize", "train", "evaluate", "explain"}) {
    REQUIRE(run(with({stage, "--out", b.string(), "--experiment", "B_LW"}, kSmall)) == 0);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(io::read_file(entry.path()) == io::read_file(other), entry.path().filename().string());
    ++files;
  }
  CHECK(files >= 12);
  for (const char* f : {"model_B_LW.json", "report_B_LW.json", "scorecard_B_LW.csv", "shap_B_LW.csv",
                        "shap_summary_B_LW.csv", "cv_B_LW.json"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  const auto report = nlohmann::json::parse(io::read_file(a / "report_B_LW.json"));
  CHECK(report.at("experiment") == "B_LW");
  CHECK(report.at("n_test").get<int>() == 60);
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK_MESSAGE(e.path().filename().string().find(".tmp") == std::string::npos, e.path().string());
  }
  fs::remove_all(b);

  SUBCASE("curve export") {
    REQUIRE(run({"curve", "--out", a.string(), "--conversation", "u00000_c0"}) == 0);
    const auto lines = io::split_lines(io::read_file(a / "curve_u00000_c0.csv"));
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "message_index,star,continuous,ewma,trend_fit");
    CHECK(run({"curve", "--out", a.string(), "--conversation", "nope"}) == 1);
    CHECK(run({"curve", "--out", a.string()}) == 1);
  }
}

TEST_CASE("lexicon and precomputed scoring of the synthetic corpus agree") {
  const auto a = fresh_dir("lex");
  const auto b = fresh_dir("pre");
  REQUIRE(run(with({"pipeline", "--out", a.string(), "--experiment", "B", "--scorer", "lexicon"}, kSmall)) == 0);
  REQUIRE(run(with({"pipeline", "--out", b.string(), "--experiment", "B", "--scorer", "precomputed"}, kSmall)) == 0);
  // Both paths produce the same artifact schema.
  CHECK(io::split_lines(io::read_file(a / "features_B_train.csv"))[0] ==
        io::split_lines(io::read_file(b / "features_B_train.csv"))[0]);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("codes");
  REQUIRE(run(with({"synth", "--out", dir.string()}, kSmall)) == 0);
  REQUIRE(run({"ingest", "--out", dir.string()}) == 0);

  ::unsetenv("CONVODYN_ENDPOINT");
  CHECK(run({"score", "--out", dir.string(), "--scorer", "remote"}) == 2);

  int port = 0;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  const std::string dead = "http://127.0.0.1:" + std::to_string(port);
  CHECK(run({"score", "--out", dir.string(), "--scorer", "remote", "--endpoint", dead}) == 2);
  ::setenv("CONVODYN_ENDPOINT", dead.c_str(), 1);
  CHECK(run({"score", "--out", dir.string(), "--scorer", "remote"}) == 2);
  ::unsetenv("CONVODYN_ENDPOINT");

  CHECK(run({"train", "--out", dir.string(), "--experiment", "LW"}) == 1);
  CHECK(run({"ingest", "--out", dir.string(), "--corpus", (dir / "missing.jsonl").string()}) == 2);
  CHECK(run({"ingest", "--out", dir.string(), "--bogus"}) == 1);
  CHECK(run({}) == 1);
  CHECK(run({"--help"}) == 0);

  io::write_atomic(dir / "bad.jsonl", "{\"conversation_id\":\"x\"}\n");
  CHECK(run({"ingest", "--out", dir.string(), "--corpus", (dir / "bad.jsonl").string()}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("config file with flag overrides") {
  const auto dir = fresh_dir("config");
  const auto cfg = dir.string() + "_cfg.json";
  io::write_atomic(cfg, R"({"out": ")" + dir.string() + R"(", "synth": {"n_users": 120}, "synth_seed": 5})");
  REQUIRE(run({"synth", "--config", cfg}) == 0);
  CHECK(io::split_lines(io::read_file(dir / "corpus.jsonl")).size() > 120);
  const auto first = io::read_file(dir / "corpus.jsonl");
  REQUIRE(run({"synth", "--config", cfg, "--users", "50"}) == 0);
  const auto second = io::read_file(dir / "corpus.jsonl");
  CHECK(second != first);
  CHECK(second.find("u00050") == std::string::npos);

  io::write_atomic(cfg, R"({"out": ")" + dir.string() + R"(", "colour": 1})");
  CHECK(run({"synth", "--config", cfg}) == 1);
  io::write_atomic(cfg, "{broken");
  CHECK(run({"synth", "--config", cfg}) == 1);
  CHECK(run({"synth", "--config", dir.string() + "_absent.json"}) == 2);
  fs::remove_all(dir);
  fs::remove(cfg);
}
