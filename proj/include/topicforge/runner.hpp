#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/error.hpp"
#include "topicforge/evaluation.hpp"
#include "topicforge/schedule.hpp"
#include "topicforge/trainer.hpp"

namespace topicforge {

struct CorpusSource {
  std::optional<std::filesystem::path> path;
  LoadOptions load;
  std::optional<SyntheticSpec> synthetic;
  std::uint64_t synthetic_seed = 0;
};

struct ExperimentConfig {
  CorpusSource corpus;
  std::vector<Scheme> schemes = {Scheme::kGtlDecInc, Scheme::kGtlEquInc, Scheme::kSgtlDecInc, Scheme::kSgtlEquInc};
  std::vector<int> stage_counts = {2, 3, 6, 8, 10};
  std::size_t budget = kDefaultBudget;
  std::size_t min_test = kDefaultMinTest;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainerConfig trainer;
  TopicGroups merge_groups;
  ApDenominator ap_denominator = ApDenominator::kRelevant;
  std::filesystem::path output_dir = "topicforge_out";

  // Throws kConfig.
  void validate() const;

  // Unknown keys are rejected (kConfig). Relative corpus paths resolve
  // against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Loads or generates the corpus and applies the merge groups.
  Corpus load_corpus() const;
};

// Observation points for instrumentation. Both callbacks may be invoked from
// worker threads when the sweep runs in parallel.
struct RunHooks {
  std::function<std::unique_ptr<Trainer>(const TrainerConfig&)> trainer_factory;
  // stage index (1-based) and claim ids of the merged batch, in training order
  std::function<void(const std::string& target, int stage, const std::vector<std::string>& ids)> on_train;
  std::function<void(const std::string& target, const std::vector<std::string>& ids)> on_score;
};

struct TopicRun {
  TopicResult result;
  AllocationSizes sizes;
  int stages_executed = 0;
};

// Fresh trainer; each stage trains on its source and target claims merged
// and shuffled; after the last stage the held-out claims are ranked. Errors
// keep their code and gain a (target, scheme, S) prefix.
TopicRun run_topic(const Corpus& corpus, const std::string& target_id, Scheme scheme, int stages,
                   std::uint64_t seed, const ExperimentConfig& cfg, const RunHooks& hooks = {});

struct TopicFailure {
  std::string topic_id;
  std::uint64_t seed = 0;
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string message;
};

struct SeedRun {
  std::uint64_t seed = 0;
  RunReport report;  // successful topics only; map is NaN when none succeeded
  std::vector<TopicFailure> failures;
  std::vector<std::pair<std::string, AllocationSizes>> allocations;
};

struct SweepCell {
  Scheme scheme = Scheme::kGtlDecInc;
  int stages = 0;
  std::vector<SeedRun> runs;
  double map_mean = 0.0;  // over seeds with at least one successful topic
  double map_std = 0.0;   // sample standard deviation
  RunReport per_topic_mean;  // per-topic AveP averaged over seeds
};

struct SweepResult {
  std::vector<std::string> topics;
  std::vector<SweepCell> cells;

  const SweepCell* find(Scheme scheme, int stages) const;
  nlohmann::json to_json() const;
};

struct RunOptions {
  bool strict = false;
  unsigned jobs = 1;
  RunHooks hooks;
};

// Leave-one-topic-out over every (scheme, stage count, seed). Topic failures
// are recorded and the sweep continues, except that trainer process failures
// always abort and, with strict, any failure aborts (kTopicFailure).
SweepResult run_all(const Corpus& corpus, const ExperimentConfig& cfg, const RunOptions& options = {});

// sweep.csv, per_topic_<scheme>_<S>.csv, run.json.
void write_outputs(const SweepResult& sweep, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Sweep summary: one row per gradual scheme, a baseline column, one column
// per stage count.
std::string render_sweep_table(const SweepResult& sweep);
std::string render_sweep_csv(const SweepResult& sweep);

struct TopicDelta {
  std::string topic_id;
  double baseline = 0.0;
  double candidate = 0.0;
  double delta = 0.0;
  long points = 0;  // round(100 * delta)
};

struct Comparison {
  std::vector<TopicDelta> topics;
  double baseline_map = 0.0;
  double candidate_map = 0.0;
  double mean_delta = 0.0;
  long mean_points = 0;

  std::string render(ReportFormat format) const;
};

// Throws kTopicSetMismatch.
Comparison compare(const RunReport& baseline, const RunReport& candidate);

}  // namespace topicforge
