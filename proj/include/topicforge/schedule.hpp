#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/similarity.hpp"

namespace topicforge {

enum class Scheme {
  kGtlDecInc,
  kGtlEquInc,
  kSgtlDecInc,
  kSgtlEquInc,
  kBaselineSingleStage,
};

// "gtl-dec-inc", "gtl-equ-inc", "sgtl-dec-inc", "sgtl-equ-inc", "baseline".
std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

inline bool uses_similarity(Scheme s) { return s == Scheme::kSgtlDecInc || s == Scheme::kSgtlEquInc; }
inline bool decremental_sources(Scheme s) { return s == Scheme::kGtlDecInc || s == Scheme::kSgtlDecInc; }

// Number of subsets the budget is divided by: S(S+1)/2 + 2.
std::size_t divisor(int stages);

// floor(budget * i / divisor(S)) for stages 1..S-1; the last stage takes the
// remainder.
std::vector<std::size_t> incremental_sizes(std::size_t budget, int stages);

// Incremental sizes over S-1 stages, reversed, followed by an empty last
// stage.
std::vector<std::size_t> decremental_source_sizes(std::size_t n_src, int stages);

// n_src split evenly over the first S-1 stages, remainder one each to the
// earliest stages, empty last stage.
std::vector<std::size_t> equivalent_source_sizes(std::size_t n_src, int stages);

struct AllocationSizes {
  int stages = 0;
  std::vector<std::size_t> target_sizes;
  std::vector<std::size_t> source_sizes;

  bool operator==(const AllocationSizes&) const = default;
};

AllocationSizes allocation_sizes(Scheme scheme, int stages, std::size_t budget, std::size_t n_src);

struct TargetSplit {
  std::vector<std::string> train_ids;  // corpus order
  std::vector<std::string> test_ids;   // corpus order
};

inline constexpr std::size_t kDefaultBudget = 200;
inline constexpr std::size_t kDefaultMinTest = 50;

// Label-stratified few-shot draw of `budget` claims from the target topic.
// Throws kTargetTooSmall when fewer than min_test claims would remain.
TargetSplit split_target(const Corpus& corpus, std::string_view target_id, std::size_t budget,
                         std::uint64_t seed, std::size_t min_test = kDefaultMinTest);

struct StageAlloc {
  int index = 0;  // 1-based
  std::vector<std::string> source_ids;
  std::vector<std::string> target_ids;

  bool operator==(const StageAlloc&) const = default;
};

struct StagePlan {
  Scheme scheme = Scheme::kGtlDecInc;
  std::string target_id;
  std::uint64_t seed = 0;
  std::vector<StageAlloc> stages;
  std::vector<std::string> test_ids;

  AllocationSizes sizes() const;
  // Same stages and test set, regardless of the scheme label.
  bool same_allocation(const StagePlan& other) const;

  nlohmann::json to_json() const;
  static StagePlan from_json(const nlohmann::json& j);
  bool operator==(const StagePlan&) const = default;
};

struct PlanRequest {
  std::string target_id;
  Scheme scheme = Scheme::kGtlDecInc;
  int stages = 2;
  std::size_t budget = kDefaultBudget;
  std::size_t min_test = kDefaultMinTest;
  std::uint64_t seed = 0;
};

// ordering must be non-null exactly for SGTL schemes (kMissingOrdering).
StagePlan build_plan(const Corpus& corpus, const PlanRequest& request, const TopicOrdering* ordering = nullptr);

// Split the target, order the sources against the training sample when the
// scheme needs it, and build the plan.
StagePlan plan_for(const Corpus& corpus, const PlanRequest& request);

}  // namespace topicforge
