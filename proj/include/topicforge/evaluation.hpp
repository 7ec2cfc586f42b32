#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicforge/corpus.hpp"

namespace topicforge {

struct RankedEntry {
  std::string claim_id;
  double score = 0.0;
  bool relevant = false;

  bool operator==(const RankedEntry&) const = default;
};

// Descending by score, ties by claim id ascending.
struct RankedList {
  std::vector<RankedEntry> entries;

  std::vector<int> relevance() const;
  bool operator==(const RankedList&) const = default;
};

// relevant := label is check-worthy. Throws kLengthMismatch, and
// kInvalidArgument for scores outside [0,1].
RankedList rank(std::span<const Claim> test_claims, std::span<const double> scores);

// What AveP divides by: the number of relevant claims (standard) or the
// length of the list.
enum class ApDenominator { kRelevant, kTotal };

std::string_view to_string(ApDenominator d);
ApDenominator parse_ap_denominator(std::string_view name);

// sum_k P(k) rel(k) / denominator, P(k) = relevant in top k / k.
// Throws kNoRelevantClaims.
double average_precision(std::span<const int> relevance, ApDenominator denom = ApDenominator::kRelevant);
double average_precision(const RankedList& ranked, ApDenominator denom = ApDenominator::kRelevant);

struct TopicResult {
  std::string topic_id;
  double avep = 0.0;
  std::size_t n_test = 0;
  std::size_t n_relevant = 0;

  bool operator==(const TopicResult&) const = default;
};

// Mean of per-topic AveP. Throws kEmptyResults.
double mean_average_precision(std::span<const TopicResult> results);

struct RunReport {
  std::string scheme;
  int stages = 0;
  std::vector<TopicResult> per_topic;
  double map = 0.0;
  // seed(s), budget, trainer settings
  nlohmann::json fingerprint = nlohmann::json::object();

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
  bool operator==(const RunReport&) const = default;
};

enum class ReportFormat { kJson, kCsv, kTable };
ReportFormat parse_report_format(std::string_view name);

// csv: topic_id,avep,n_test,n_relevant with a closing "MAP" row.
std::string emit_report(const RunReport& report, ReportFormat format);

// Four decimal places, as in published MAP tables.
std::string format_score(double v);

}  // namespace topicforge

namespace topicforge {

// Scores read from `id,score` CSV/TSV (header required) or JSON lines
// {"id":..., "score":...}. Throws kIo, kMalformedRecord, kDuplicateId.
std::vector<std::pair<std::string, double>> load_scores(const std::filesystem::path& path);

// A RunReport from its JSON form, or from the csv emitted by emit_report
// (the MAP row is recomputed). Throws kIo, kMalformedRecord.
RunReport load_report(const std::filesystem::path& path);

struct ScoredEvaluation {
  RunReport report;
  // topics with scored claims but no relevant one among them
  std::vector<std::string> skipped_topics;
};

// Groups the scored claims by their topic in `labels`, ranks each group and
// reports per-topic AveP. Throws kInvalidArgument for ids missing from the
// labels, kEmptyResults when no topic could be evaluated.
ScoredEvaluation evaluate_scores(const Corpus& labels, std::span<const std::pair<std::string, double>> scores,
                                 ApDenominator denom = ApDenominator::kRelevant);

}  // namespace topicforge
