// Exercises the shared library through its C interface only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "topicforge/topicforge.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  tf_free_string(s);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tf_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

const char* kSpec =
    R"({"topics": [{"id": "A", "size": 80}, {"id": "B", "size": 80}, {"id": "C", "size": 80}],
        "overlaps": [{"a": "A", "b": "C", "fraction": 0.7}], "prevalence": 0.3})";

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(tf_status_name(TF_OK)) == "Ok");
  CHECK(std::string(tf_status_name(TF_ERR_INVALID_BUDGET)) == "InvalidBudget");
  CHECK(std::string(tf_status_name(TF_ERR_TOPIC_FAILURE)) == "TopicFailure");
  CHECK(std::string(tf_status_name(TF_ERR_INTERNAL)) == "Internal");
  CHECK(std::string(tf_status_name(static_cast<tf_status>(999))) == "Unknown");
  CHECK(std::strlen(tf_version()) > 0);

  size_t d = 0;
  CHECK(tf_divisor(0, &d) == TF_ERR_INVALID_STAGES);
  CHECK(std::string(tf_last_error()).find("InvalidStages") != std::string::npos);
  CHECK(tf_divisor(6, &d) == TF_OK);
  CHECK(d == 23);
  CHECK(tf_divisor(6, nullptr) == TF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("allocation sizes") {
  size_t out[10];
  REQUIRE(tf_incremental_sizes(200, 6, out, 6) == TF_OK);
  CHECK(std::vector<size_t>(out, out + 6) == std::vector<size_t>{8, 17, 26, 34, 43, 72});
  REQUIRE(tf_incremental_sizes(200, 10, out, 10) == TF_OK);
  CHECK(out[9] == 45);
  CHECK(tf_incremental_sizes(200, 6, out, 5) == TF_ERR_INVALID_ARGUMENT);
  CHECK(tf_incremental_sizes(3, 4, out, 4) == TF_ERR_INVALID_BUDGET);
  REQUIRE(tf_decremental_source_sizes(1000, 3, out, 3) == TF_OK);
  CHECK(std::vector<size_t>(out, out + 3) == std::vector<size_t>{800, 200, 0});
  REQUIRE(tf_equivalent_source_sizes(1003, 3, out, 3) == TF_OK);
  CHECK(std::vector<size_t>(out, out + 3) == std::vector<size_t>{502, 501, 0});
  CHECK(tf_equivalent_source_sizes(10, 2, nullptr, 2) == TF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("normalization") {
  char* out = nullptr;
  REQUIRE(tf_normalize_text("@user Hello https://t.co/x WORLD!!", nullptr, &out) == TF_OK);
  CHECK(take(out) == "[مستخدم] Hello [رابط] WORLD");
  REQUIRE(tf_normalize_text("@user Hello", R"({"user_token": "USER"})", &out) == TF_OK);
  CHECK(take(out) == "USER Hello");
  CHECK(tf_normalize_text("x", R"({"lowercase": true})", &out) == TF_ERR_CONFIG);
  CHECK(tf_normalize_text("x", "{not json", &out) == TF_ERR_INVALID_ARGUMENT);
  CHECK(tf_normalize_text(nullptr, nullptr, &out) == TF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("corpus handles") {
  tf_corpus* c = nullptr;
  REQUIRE(tf_corpus_load(TF_FIXTURE_DIR "/three.jsonl", nullptr, &c) == TF_OK);
  CHECK(tf_corpus_size(c) == 3);
  CHECK(tf_corpus_topic_count(c) == 1);
  const char* topic = nullptr;
  REQUIRE(tf_corpus_topic_id(c, 0, &topic) == TF_OK);
  CHECK(std::string(topic) == "T1");
  CHECK(tf_corpus_topic_id(c, 1, &topic) == TF_ERR_INVALID_ARGUMENT);
  tf_corpus_free(c);

  CHECK(tf_corpus_load(TF_FIXTURE_DIR "/dup_id.jsonl", nullptr, &c) == TF_ERR_DUPLICATE_ID);
  CHECK(tf_corpus_load(TF_FIXTURE_DIR "/bad_label.jsonl", nullptr, &c) == TF_ERR_UNKNOWN_LABEL);
  CHECK(tf_corpus_load("/nonexistent.jsonl", nullptr, &c) == TF_ERR_IO);
  CHECK(tf_corpus_size(nullptr) == 0);
  tf_corpus_free(nullptr);

  const char* cols = R"({"format": "tsv", "columns": {"id": "tweet_id", "topic": "topic_id", "text": "tweet_text",
                         "label": "claim_worthiness"}})";
  REQUIRE(tf_corpus_load(TF_FIXTURE_DIR "/columns.tsv", cols, &c) == TF_OK);
  CHECK(tf_corpus_topic_count(c) == 2);
  tf_corpus* merged = nullptr;
  REQUIRE(tf_corpus_merge(c, R"({"M": ["T1", "T2"]})", &merged) == TF_OK);
  CHECK(tf_corpus_topic_count(merged) == 1);
  tf_corpus_free(merged);
  CHECK(tf_corpus_merge(c, R"({"M": ["T1"], "N": ["T1"]})", &merged) == TF_ERR_OVERLAPPING_GROUPS);
  tf_corpus_free(c);

  tf_corpus* g1 = nullptr;
  tf_corpus* g2 = nullptr;
  REQUIRE(tf_corpus_generate(kSpec, 7, &g1) == TF_OK);
  REQUIRE(tf_corpus_generate(kSpec, 7, &g2) == TF_OK);
  CHECK(tf_corpus_size(g1) == 240);
  const fs::path p1 = scratch("g1.jsonl"), p2 = scratch("g2.jsonl");
  REQUIRE(tf_corpus_write(g1, p1.c_str()) == TF_OK);
  REQUIRE(tf_corpus_write(g2, p2.c_str()) == TF_OK);
  CHECK(fs::file_size(p1) == fs::file_size(p2));
  tf_corpus* back = nullptr;
  REQUIRE(tf_corpus_load(p1.c_str(), nullptr, &back) == TF_OK);
  CHECK(tf_corpus_size(back) == 240);
  tf_corpus_free(back);
  CHECK(tf_corpus_generate(R"({"topics": [], "prevalence": 2})", 1, &g2) != TF_OK);
  tf_corpus_free(g1);
  tf_corpus_free(g2);
}

TEST_CASE("plans and similarity") {
  tf_corpus* c = nullptr;
  REQUIRE(tf_corpus_generate(kSpec, 2, &c) == TF_OK);
  char* csv = nullptr;
  REQUIRE(tf_similarity_order(c, "A", 40, 20, 1, &csv) == TF_OK);
  const std::string order = take(csv);
  CHECK(order.rfind("topic_id,similarity\nB,", 0) == 0);
  CHECK(order.find("\nC,") != std::string::npos);

  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(tf_plan_build(c, "A", "gtl-dec-inc", 2, 40, 20, 3, &a) == TF_OK);
  REQUIRE(tf_plan_build(c, "A", "gtl-equ-inc", 2, 40, 20, 3, &b) == TF_OK);
  const std::string pa = take(a), pb = take(b);
  CHECK(pa.find("\"stages\"") != std::string::npos);
  // same stage contents; only the scheme name differs
  CHECK(pa.substr(pa.find("\"stages\"")) == pb.substr(pb.find("\"stages\"")));
  CHECK(tf_plan_build(c, "A", "nope", 2, 40, 20, 3, &a) == TF_ERR_INVALID_ARGUMENT);
  CHECK(tf_plan_build(c, "Z", "gtl-dec-inc", 2, 40, 20, 3, &a) == TF_ERR_UNKNOWN_TOPIC);
  CHECK(tf_plan_build(c, "A", "gtl-dec-inc", 2, 70, 20, 3, &a) == TF_ERR_TARGET_TOO_SMALL);
  tf_corpus_free(c);
}

TEST_CASE("trainer handles") {
  tf_trainer* t = nullptr;
  REQUIRE(tf_trainer_create(R"({"hash_dim": 1024, "seed": 5})", &t) == TF_OK);
  const char* texts[] = {"refund fraud alert", "nice weather today", "fraud alert again", "lovely weather"};
  const int labels[] = {1, 0, 1, 0};
  double before[4], after[4];
  REQUIRE(tf_trainer_score(t, texts, 4, before) == TF_OK);
  REQUIRE(tf_trainer_train_stage(t, texts, labels, 4) == TF_OK);
  CHECK(tf_trainer_stage_counter(t) == 1);
  REQUIRE(tf_trainer_score(t, texts, 4, after) == TF_OK);
  CHECK(after[0] > after[1]);
  CHECK(after[2] > after[3]);
  CHECK(tf_trainer_train_stage(t, texts, labels, 0) == TF_ERR_EMPTY_STAGE);
  const int bad[] = {1, 0, 2, 0};
  CHECK(tf_trainer_train_stage(t, texts, bad, 4) == TF_ERR_UNKNOWN_LABEL);
  REQUIRE(tf_trainer_reset(t) == TF_OK);
  CHECK(tf_trainer_stage_counter(t) == 0);
  double again[4];
  REQUIRE(tf_trainer_score(t, texts, 4, again) == TF_OK);
  for (int i = 0; i < 4; ++i) CHECK(again[i] == before[i]);
  tf_trainer_free(t);
  CHECK(tf_trainer_stage_counter(nullptr) == -1);
  CHECK(tf_trainer_create(R"({"learning_rate": 0})", &t) == TF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("evaluation and comparison") {
  const int rel[] = {1, 0, 1, 1};
  double ap = 0;
  REQUIRE(tf_average_precision(rel, 4, nullptr, &ap) == TF_OK);
  CHECK(std::abs(ap - 0.805555555556) <= 1e-9);
  const int none[] = {0, 0};
  CHECK(tf_average_precision(none, 2, nullptr, &ap) == TF_ERR_NO_RELEVANT_CLAIMS);
  CHECK(tf_average_precision(rel, 4, "bogus", &ap) == TF_ERR_INVALID_ARGUMENT);

  const fs::path scores = scratch("scores.csv");
  std::ofstream(scores) << "id,score\nc1,0.9\nc2,0.8\n3,0.1\n";
  char* report = nullptr;
  char* warnings = nullptr;
  REQUIRE(tf_evaluate(scores.c_str(), TF_FIXTURE_DIR "/three.jsonl", nullptr, "csv", &report, &warnings) == TF_OK);
  CHECK(take(report) == "topic_id,avep,n_test,n_relevant\nT1,0.833333,3,2\nMAP,0.833333,3,2\n");
  CHECK(take(warnings).empty());

  const fs::path base = scratch("base.json"), cand = scratch("cand.json");
  std::ofstream(base) << R"({"scheme": "baseline", "stages": 1, "map": 0.5,
      "per_topic": [{"topic_id": "x", "avep": 0.4, "n_test": 10, "n_relevant": 2},
                    {"topic_id": "y", "avep": 0.6, "n_test": 10, "n_relevant": 2}]})";
  std::ofstream(cand) << R"({"scheme": "sgtl-equ-inc", "stages": 6, "map": 0.6,
      "per_topic": [{"topic_id": "x", "avep": 0.5, "n_test": 10, "n_relevant": 2},
                    {"topic_id": "y", "avep": 0.7, "n_test": 10, "n_relevant": 2}]})";
  char* cmp = nullptr;
  REQUIRE(tf_compare_reports(base.c_str(), cand.c_str(), "table", &cmp) == TF_OK);
  const std::string table = take(cmp);
  CHECK(table.find("10%") != std::string::npos);
  CHECK(tf_compare_reports(base.c_str(), TF_FIXTURE_DIR "/three.jsonl", "json", &cmp) != TF_OK);
}

TEST_CASE("experiment run") {
  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"synthetic": )" << kSpec << R"(, "schemes": ["gtl-dec-inc", "baseline"],
      "stage_counts": [2], "budget": 40, "min_test": 20, "seeds": [1], "trainer": {"hash_dim": 4096},
      "output_dir": "out"})";
  char* summary = nullptr;
  REQUIRE(tf_run_experiment(cfg.c_str(), 0, 1, &summary) == TF_OK);
  const std::string s = take(summary);
  CHECK(s.find("gtl-dec-inc") != std::string::npos);
  CHECK(fs::exists(cfg.parent_path() / "out" / "sweep.csv"));
  CHECK(fs::exists(cfg.parent_path() / "out" / "run.json"));

  std::ofstream(cfg) << R"({"budget": 40, "surprise": true})";
  CHECK(tf_run_experiment(cfg.c_str(), 0, 1, nullptr) == TF_ERR_CONFIG);
  CHECK(std::string(tf_last_error()).find("surprise") != std::string::npos);
  fs::remove_all(cfg.parent_path());
}
