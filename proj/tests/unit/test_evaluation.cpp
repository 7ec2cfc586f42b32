#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "check_code.hpp"
#include "doctest.h"
#include "topicforge/evaluation.hpp"
#include "topicforge/rng.hpp"

using namespace topicforge;

namespace {

// Oracle: precision at every cut-off recomputed from scratch.
double brute_ap(const std::vector<int>& rel, bool by_total) {
  double sum = 0.0;
  int relevant = 0;
  for (std::size_t k = 1; k <= rel.size(); ++k) {
    if (!rel[k - 1]) continue;
    int hits = 0;
    for (std::size_t j = 0; j < k; ++j) hits += rel[j];
    sum += static_cast<double>(hits) / static_cast<double>(k);
  }
  for (int r : rel) relevant += r;
  return sum / static_cast<double>(by_total ? rel.size() : relevant);
}

Claim claim(const std::string& id, bool cw, const std::string& topic = "T") {
  Claim c;
  c.id = id;
  c.topic_id = topic;
  c.text = c.raw_text = id;
  c.label = cw ? Label::kCheckWorthy : Label::kNotCheckWorthy;
  return c;
}

const std::vector<std::string> kPublishedTopics = {"CT20-AR-01", "CT20-AR-02", "CT20-AR-05", "CT20-AR-08", "CT20-AR-10",
                                                "CT20-AR-12", "CT20-AR-14", "CT20-AR-19", "CT20-AR-23", "CT20-AR-27",
                                                "CT20-AR-30", "Covid-19",   "CT21-AR-01", "CT21-AR-02"};
const std::vector<double> kPublishedBaseline = {.6883, .6935, .6002, .3796, .4660, .8467, .7354,
                                             .8497, .3723, .6403, .5730, .7101, .6471, .8554};
const std::vector<double> kPublishedSgtlD6 = {.7022, .9231, .9207, .5439, .6146, .8778, .7816,
                                           .8945, .3073, .6392, .7085, .7092, .7717, .88};

RunReport report_of(const std::vector<double>& values) {
  RunReport r;
  r.scheme = "sgtl-equ-inc";
  r.stages = 6;
  for (std::size_t i = 0; i < values.size(); ++i) r.per_topic.push_back({kPublishedTopics[i], values[i], 100, 30});
  r.map = mean_average_precision(r.per_topic);
  return r;
}

std::string temp_file(const std::string& suffix, const std::string& content) {
  static int n = 0;
  const std::string path = "/tmp/tf_eval_" + std::to_string(::getpid()) + "_" + std::to_string(n++) + suffix;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("rank: ordering and ties") {
  const std::vector<Claim> claims = {claim("c", false), claim("a", true), claim("b", false)};
  const std::vector<double> scores = {0.2, 0.9, 0.9};
  const RankedList r = rank(claims, scores);
  REQUIRE(r.entries.size() == 3);
  CHECK(r.entries[0].claim_id == "a");
  CHECK(r.entries[1].claim_id == "b");
  CHECK(r.entries[2].claim_id == "c");
  CHECK(r.relevance() == std::vector<int>{1, 0, 0});
  CHECK(rank(std::vector<Claim>{}, std::vector<double>{}).entries.empty());
  CHECK_CODE(rank(claims, std::vector<double>{0.1}), ErrorCode::kLengthMismatch);
  CHECK_CODE(rank(claims, std::vector<double>{0.1, 1.5, 0.2}), ErrorCode::kInvalidArgument);
  CHECK_CODE(rank(claims, std::vector<double>{0.1, NAN, 0.2}), ErrorCode::kInvalidArgument);
}

TEST_CASE("average_precision: worked values") {
  CHECK(average_precision(std::vector<int>{1, 1, 1}) == 1.0);
  CHECK(std::abs(average_precision(std::vector<int>{1, 0, 1, 1}) - 0.805555555556) <= 1e-9);
  CHECK_CODE(average_precision(std::vector<int>{0, 0, 0}), ErrorCode::kNoRelevantClaims);
  CHECK_CODE(average_precision(std::vector<int>{}), ErrorCode::kNoRelevantClaims);
  CHECK(std::abs(average_precision(std::vector<int>{1, 0, 1, 1}, ApDenominator::kTotal) - (1 + 2.0 / 3 + 0.75) / 4) <=
        1e-12);
}

TEST_CASE("average_precision: exhaustive oracle agreement") {
  std::size_t checked = 0;
  for (int len = 1; len <= 12; ++len) {
    for (int bits = 0; bits < (1 << len); ++bits) {
      std::vector<int> rel(len);
      for (int i = 0; i < len; ++i) rel[i] = (bits >> i) & 1;
      if (bits == 0) continue;
      REQUIRE(std::abs(average_precision(rel) - brute_ap(rel, false)) <= 1e-12);
      REQUIRE(std::abs(average_precision(rel, ApDenominator::kTotal) - brute_ap(rel, true)) <= 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 8178);
}

TEST_CASE("average_precision: permutation extremes") {
  for (int n = 1; n <= 8; ++n) {
    for (int r = 1; r <= n; ++r) {
      std::vector<int> rel(n, 0);
      std::fill(rel.begin(), rel.begin() + r, 1);
      std::sort(rel.begin(), rel.end());  // all relevant last
      const double worst_expected = average_precision(rel);
      double lo = 2.0, hi = -1.0;
      do {
        const double ap = average_precision(rel);
        lo = std::min(lo, ap);
        hi = std::max(hi, ap);
      } while (std::next_permutation(rel.begin(), rel.end()));
      CHECK(hi == 1.0);
      CHECK(std::abs(lo - worst_expected) <= 1e-15);
      std::vector<int> best(n, 0);
      std::fill(best.begin(), best.begin() + r, 1);
      CHECK(average_precision(best) == 1.0);
    }
  }
}

TEST_CASE("average_precision: invariant under increasing score transforms") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Claim> claims;
    std::vector<double> s, t;
    const int n = 2 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      claims.push_back(claim("c" + std::to_string(i), i == 0 || rng.below(3) == 0));
      s.push_back(std::round(rng.uniform() * 10.0) / 10.0);
      t.push_back(0.1 + 0.8 * s.back() * s.back());
    }
    const RankedList a = rank(claims, s), b = rank(claims, t);
    CHECK(a.relevance() == b.relevance());
    CHECK(average_precision(a) == average_precision(b));
  }
}

TEST_CASE("mean_average_precision") {
  CHECK(mean_average_precision(std::vector<TopicResult>{{"a", 0.73, 1, 1}}) == 0.73);
  CHECK(mean_average_precision(std::vector<TopicResult>{{"a", 1.0, 1, 1}, {"b", 0.0, 1, 1}}) == 0.5);
  CHECK_CODE(mean_average_precision(std::vector<TopicResult>{}), ErrorCode::kEmptyResults);
  SplitMix64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TopicResult> r;
    for (int i = 0; i < 1 + static_cast<int>(rng.below(10)); ++i) r.push_back({"t", rng.uniform(), 1, 1});
    const double m = mean_average_precision(r);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end(), [](auto& x, auto& y) { return x.avep < y.avep; });
    CHECK(m >= lo->avep - 1e-15);
    CHECK(m <= hi->avep + 1e-15);
  }
}

TEST_CASE("published per-topic table averages") {
  const RunReport base = report_of(kPublishedBaseline), cand = report_of(kPublishedSgtlD6);
  CHECK(std::abs(base.map - 0.6470) <= 1e-4);
  CHECK(std::abs(cand.map - 0.7339) <= 1e-4);
}

TEST_CASE("emit_report shapes") {
  RunReport two;
  two.scheme = "gtl-dec-inc";
  two.stages = 3;
  two.per_topic = {{"A", 0.5, 10, 4}, {"B", 0.25, 20, 5}};
  two.map = 0.375;
  CHECK(emit_report(two, ReportFormat::kCsv) ==
        "topic_id,avep,n_test,n_relevant\nA,0.500000,10,4\nB,0.250000,20,5\nMAP,0.375000,30,9\n");
  const RunReport back = RunReport::from_json(nlohmann::json::parse(emit_report(two, ReportFormat::kJson)));
  CHECK(back == two);

  const std::string table = emit_report(report_of(kPublishedSgtlD6), ReportFormat::kTable);
  std::istringstream in(table);
  std::vector<std::string> lines;
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  REQUIRE(lines.size() == 17);  // title, header, 14 topics, average
  CHECK(lines[2].rfind("CT20-AR-01", 0) == 0);
  CHECK(lines[16].rfind("Average", 0) == 0);
  CHECK(lines[16].find("0.7339") != std::string::npos);
  for (std::size_t i = 2; i < lines.size(); ++i) CHECK(lines[i].size() == lines[1].size());

  RunReport empty;
  empty.map = NAN;
  CHECK(std::isnan(RunReport::from_json(empty.to_json()).map));
  CHECK(parse_report_format("csv") == ReportFormat::kCsv);
  CHECK_CODE(parse_report_format("xml"), ErrorCode::kInvalidArgument);
  CHECK(parse_ap_denominator("total") == ApDenominator::kTotal);
  CHECK_CODE(parse_ap_denominator("all"), ErrorCode::kInvalidArgument);
}

TEST_CASE("score files") {
  const Corpus labels = Corpus::from_claims(
      {claim("a1", true, "A"), claim("a2", false, "A"), claim("b1", false, "B"), claim("b2", true, "B"),
       claim("c1", false, "C")});
  const std::string csv = temp_file(".csv", "id,score\na1,0.9\na2,0.1\nb1,0.8\nb2,0.7\nc1,0.5\n");
  const auto scores = load_scores(csv);
  REQUIRE(scores.size() == 5);
  CHECK(scores[2] == std::pair<std::string, double>{"b1", 0.8});
  const ScoredEvaluation ev = evaluate_scores(labels, scores);
  REQUIRE(ev.report.per_topic.size() == 2);
  CHECK(ev.report.per_topic[0].avep == 1.0);
  CHECK(ev.report.per_topic[1].avep == 0.5);
  CHECK(ev.report.map == 0.75);
  CHECK(ev.skipped_topics == std::vector<std::string>{"C"});

  const std::string jsonl = temp_file(".jsonl", "{\"id\":\"a1\",\"score\":0.9}\n{\"id\":\"a2\",\"score\":0.1}\n");
  CHECK(load_scores(jsonl).size() == 2);
  CHECK_CODE(load_scores(temp_file(".csv", "id,score\na1,0.9\na1,0.3\n")), ErrorCode::kDuplicateId);
  CHECK_CODE(load_scores(temp_file(".csv", "id,value\na1,0.9\n")), ErrorCode::kMalformedRecord);
  CHECK_CODE(load_scores(temp_file(".csv", "id,score\na1,high\n")), ErrorCode::kMalformedRecord);
  CHECK_CODE(load_scores("/nonexistent/scores.csv"), ErrorCode::kIo);
  const std::vector<std::pair<std::string, double>> unknown = {{"zz", 0.5}};
  CHECK_CODE(evaluate_scores(labels, unknown), ErrorCode::kInvalidArgument);
  const std::vector<std::pair<std::string, double>> only_c = {{"c1", 0.5}};
  CHECK_CODE(evaluate_scores(labels, only_c), ErrorCode::kEmptyResults);

  const RunReport r = report_of(kPublishedBaseline);
  const std::string report_csv = temp_file(".csv", emit_report(r, ReportFormat::kCsv));
  const RunReport from_csv = load_report(report_csv);
  REQUIRE(from_csv.per_topic.size() == 14);
  CHECK(std::abs(from_csv.map - r.map) <= 1e-6);
  const std::string report_json = temp_file(".json", emit_report(r, ReportFormat::kJson));
  CHECK(load_report(report_json) == r);
}
