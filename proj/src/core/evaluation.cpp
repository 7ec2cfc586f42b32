#include "topicforge/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topicforge/error.hpp"

namespace topicforge {

std::vector<int> RankedList::relevance() const {
  std::vector<int> r;
  r.reserve(entries.size());
  for (const RankedEntry& e : entries) r.push_back(e.relevant ? 1 : 0);
  return r;
}

RankedList rank(std::span<const Claim> test_claims, std::span<const double> scores) {
  if (test_claims.size() != scores.size()) {
    raise(ErrorCode::kLengthMismatch, std::to_string(test_claims.size()) + " claims but " +
                                          std::to_string(scores.size()) + " scores");
  }
  RankedList list;
  list.entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      raise(ErrorCode::kInvalidArgument, "score for '" + test_claims[i].id + "' outside [0,1]");
    }
    list.entries.push_back({test_claims[i].id, scores[i], test_claims[i].check_worthy()});
  }
  std::stable_sort(list.entries.begin(), list.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.claim_id < b.claim_id;
  });
  return list;
}

std::string_view to_string(ApDenominator d) { return d == ApDenominator::kRelevant ? "relevant" : "total"; }

ApDenominator parse_ap_denominator(std::string_view name) {
  if (name == "relevant") return ApDenominator::kRelevant;
  if (name == "total") return ApDenominator::kTotal;
  raise(ErrorCode::kInvalidArgument, "ap denominator must be 'relevant' or 'total', got '" + std::string(name) + "'");
}

double average_precision(std::span<const int> relevance, ApDenominator denom) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (relevance[k] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  if (hits == 0) raise(ErrorCode::kNoRelevantClaims, "ranking contains no relevant claim");
  const std::size_t d = denom == ApDenominator::kRelevant ? hits : relevance.size();
  return sum / static_cast<double>(d);
}

double average_precision(const RankedList& ranked, ApDenominator denom) {
  const std::vector<int> rel = ranked.relevance();
  return average_precision(std::span<const int>(rel), denom);
}

double mean_average_precision(std::span<const TopicResult> results) {
  if (results.empty()) raise(ErrorCode::kEmptyResults, "no topic results to average");
  double sum = 0.0;
  for (const TopicResult& r : results) sum += r.avep;
  return sum / static_cast<double>(results.size());
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json topics = nlohmann::json::array();
  for (const TopicResult& r : per_topic) {
    topics.push_back({{"topic_id", r.topic_id}, {"avep", r.avep}, {"n_test", r.n_test}, {"n_relevant", r.n_relevant}});
  }
  return {{"scheme", scheme}, {"stages", stages}, {"per_topic", topics}, {"map", map}, {"fingerprint", fingerprint}};
}

RunReport RunReport::from_json(const nlohmann::json& j) {
  RunReport r;
  r.scheme = j.at("scheme").get<std::string>();
  r.stages = j.at("stages").get<int>();
  for (const auto& t : j.at("per_topic")) {
    r.per_topic.push_back({t.at("topic_id").get<std::string>(), t.at("avep").get<double>(),
                           t.at("n_test").get<std::size_t>(), t.at("n_relevant").get<std::size_t>()});
  }
  const auto& map = j.at("map");
  r.map = map.is_null() ? std::nan("") : map.get<double>();
  if (j.contains("fingerprint")) r.fingerprint = j["fingerprint"];
  return r;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "table") return ReportFormat::kTable;
  raise(ErrorCode::kInvalidArgument, "report format must be json, csv or table, got '" + std::string(name) + "'");
}

std::string format_score(double v) { return fmt::format("{:.4f}", v); }

std::string emit_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report.to_json().dump(2) + "\n";

  std::size_t total_test = 0, total_relevant = 0;
  for (const TopicResult& r : report.per_topic) {
    total_test += r.n_test;
    total_relevant += r.n_relevant;
  }

  if (format == ReportFormat::kCsv) {
    std::string out = "topic_id,avep,n_test,n_relevant\n";
    for (const TopicResult& r : report.per_topic) {
      out += fmt::format("{},{:.6f},{},{}\n", r.topic_id, r.avep, r.n_test, r.n_relevant);
    }
    out += fmt::format("MAP,{:.6f},{},{}\n", report.map, total_test, total_relevant);
    return out;
  }

  std::size_t width = std::string_view("Average").size();
  for (const TopicResult& r : report.per_topic) width = std::max(width, r.topic_id.size());
  const std::string title = report.stages > 0 ? fmt::format("{} s{}", report.scheme, report.stages) : report.scheme;
  std::string out = fmt::format("{:<{}}  {:>8}  {:>6}  {:>6}\n", "Topic", width, "AveP", "n_test", "n_rel");
  for (const TopicResult& r : report.per_topic) {
    out += fmt::format("{:<{}}  {:>8}  {:>6}  {:>6}\n", r.topic_id, width, format_score(r.avep), r.n_test, r.n_relevant);
  }
  out += fmt::format("{:<{}}  {:>8}  {:>6}  {:>6}\n", "Average", width, format_score(report.map), total_test, total_relevant);
  return title + "\n" + out;
}

}  // namespace topicforge
