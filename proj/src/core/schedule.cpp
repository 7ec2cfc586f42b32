#include "topicforge/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "topicforge/error.hpp"
#include "topicforge/rng.hpp"

namespace topicforge {

namespace {

// Stream salts; plans for different provisioning rules share them, which
// makes Dec and Equ plans coincide whenever their sizes do.
constexpr std::uint64_t kSplitSalt = 0x5101;
constexpr std::uint64_t kTargetOrderSalt = 0x5102;
constexpr std::uint64_t kSourceOrderSalt = 0x5103;

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kGtlDecInc: return "gtl-dec-inc";
    case Scheme::kGtlEquInc: return "gtl-equ-inc";
    case Scheme::kSgtlDecInc: return "sgtl-dec-inc";
    case Scheme::kSgtlEquInc: return "sgtl-equ-inc";
    case Scheme::kBaselineSingleStage: return "baseline";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (n == "gtl-dec-inc" || n == "a") return Scheme::kGtlDecInc;
  if (n == "gtl-equ-inc" || n == "b") return Scheme::kGtlEquInc;
  if (n == "sgtl-dec-inc" || n == "c") return Scheme::kSgtlDecInc;
  if (n == "sgtl-equ-inc" || n == "d") return Scheme::kSgtlEquInc;
  if (n == "baseline" || n == "baseline-single-stage") return Scheme::kBaselineSingleStage;
  raise(ErrorCode::kInvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

std::size_t divisor(int stages) {
  if (stages < 1) raise(ErrorCode::kInvalidStages, "stage count " + std::to_string(stages) + " < 1");
  const auto s = static_cast<std::size_t>(stages);
  return s * (s + 1) / 2 + 2;
}

std::vector<std::size_t> incremental_sizes(std::size_t budget, int stages) {
  const std::size_t y = divisor(stages);
  if (budget < static_cast<std::size_t>(stages)) {
    raise(ErrorCode::kInvalidBudget,
          "budget " + std::to_string(budget) + " smaller than stage count " + std::to_string(stages));
  }
  std::vector<std::size_t> sizes;
  sizes.reserve(static_cast<std::size_t>(stages));
  std::size_t used = 0;
  for (int i = 1; i < stages; ++i) {
    const std::size_t x = budget * static_cast<std::size_t>(i) / y;
    sizes.push_back(x);
    used += x;
  }
  sizes.push_back(budget - used);
  return sizes;
}

std::vector<std::size_t> decremental_source_sizes(std::size_t n_src, int stages) {
  if (stages < 2) raise(ErrorCode::kInvalidStages, "source provisioning needs at least 2 stages");
  std::vector<std::size_t> sizes = incremental_sizes(n_src, stages - 1);
  std::reverse(sizes.begin(), sizes.end());
  sizes.push_back(0);
  return sizes;
}

std::vector<std::size_t> equivalent_source_sizes(std::size_t n_src, int stages) {
  if (stages < 2) raise(ErrorCode::kInvalidStages, "source provisioning needs at least 2 stages");
  const auto parts = static_cast<std::size_t>(stages - 1);
  if (n_src < parts) {
    raise(ErrorCode::kInvalidBudget,
          "source size " + std::to_string(n_src) + " smaller than " + std::to_string(parts) + " source stages");
  }
  const std::size_t base = n_src / parts;
  const std::size_t rem = n_src % parts;
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < parts; ++i) sizes.push_back(base + (i < rem ? 1 : 0));
  sizes.push_back(0);
  return sizes;
}

AllocationSizes allocation_sizes(Scheme scheme, int stages, std::size_t budget, std::size_t n_src) {
  AllocationSizes a;
  a.stages = stages;
  if (scheme == Scheme::kBaselineSingleStage) {
    if (stages != 1) raise(ErrorCode::kInvalidStages, "the single-stage baseline runs exactly 1 stage");
    a.target_sizes = {budget};
    a.source_sizes = {n_src};
    return a;
  }
  if (stages < 2) raise(ErrorCode::kInvalidStages, "gradual schemes need at least 2 stages");
  a.target_sizes = incremental_sizes(budget, stages);
  a.source_sizes = decremental_sources(scheme) ? decremental_source_sizes(n_src, stages)
                                                : equivalent_source_sizes(n_src, stages);
  return a;
}

TargetSplit split_target(const Corpus& corpus, std::string_view target_id, std::size_t budget,
                         std::uint64_t seed, std::size_t min_test) {
  const std::vector<std::size_t>& members = corpus.topic_members(target_id);
  const std::size_t n = members.size();
  if (n <= budget || n - budget < min_test) {
    raise(ErrorCode::kTargetTooSmall, "topic '" + std::string(target_id) + "' has " + std::to_string(n) +
                                          " claims; budget " + std::to_string(budget) + " needs at least " +
                                          std::to_string(min_test) + " left for testing");
  }
  std::vector<std::size_t> cw, ncw;
  for (std::size_t i : members) {
    (corpus.claims()[i].check_worthy() ? cw : ncw).push_back(i);
  }
  auto take_cw = static_cast<std::size_t>(
      std::llround(static_cast<double>(budget) * static_cast<double>(cw.size()) / static_cast<double>(n)));
  take_cw = std::min(take_cw, cw.size());
  if (budget - take_cw > ncw.size()) take_cw = budget - ncw.size();

  const std::uint64_t s = mix_seed(seed, kSplitSalt);
  shuffle(std::span<std::size_t>(cw), mix_seed(s, 1));
  shuffle(std::span<std::size_t>(ncw), mix_seed(s, 0));
  std::set<std::size_t> chosen(cw.begin(), cw.begin() + static_cast<std::ptrdiff_t>(take_cw));
  chosen.insert(ncw.begin(), ncw.begin() + static_cast<std::ptrdiff_t>(budget - take_cw));

  TargetSplit split;
  for (std::size_t i : members) {
    (chosen.contains(i) ? split.train_ids : split.test_ids).push_back(corpus.claims()[i].id);
  }
  return split;
}

AllocationSizes StagePlan::sizes() const {
  AllocationSizes a;
  a.stages = static_cast<int>(stages.size());
  for (const StageAlloc& st : stages) {
    a.target_sizes.push_back(st.target_ids.size());
    a.source_sizes.push_back(st.source_ids.size());
  }
  return a;
}

bool StagePlan::same_allocation(const StagePlan& other) const {
  return target_id == other.target_id && stages == other.stages && test_ids == other.test_ids;
}

nlohmann::json StagePlan::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const StageAlloc& s : stages) {
    st.push_back({{"index", s.index}, {"source_ids", s.source_ids}, {"target_ids", s.target_ids}});
  }
  return {{"scheme", to_string(scheme)}, {"target", target_id}, {"seed", seed}, {"stages", st}, {"test_ids", test_ids}};
}

StagePlan StagePlan::from_json(const nlohmann::json& j) {
  StagePlan p;
  p.scheme = parse_scheme(j.at("scheme").get<std::string>());
  p.target_id = j.at("target").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("stages")) {
    StageAlloc a;
    a.index = s.at("index").get<int>();
    a.source_ids = s.at("source_ids").get<std::vector<std::string>>();
    a.target_ids = s.at("target_ids").get<std::vector<std::string>>();
    p.stages.push_back(std::move(a));
  }
  p.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  return p;
}

namespace {

std::vector<std::string> shuffled_ids(const Corpus& corpus, std::string_view topic, std::uint64_t seed) {
  std::vector<std::string> ids = corpus.topic_claim_ids(topic);
  shuffle(std::span<std::string>(ids), seed);
  return ids;
}

// Consecutive slices of pool with the given sizes.
std::vector<std::vector<std::string>> slice(const std::vector<std::string>& pool,
                                            const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<std::string>> out;
  std::size_t pos = 0;
  for (std::size_t n : sizes) {
    out.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(pos),
                     pool.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

}  // namespace

StagePlan build_plan(const Corpus& corpus, const PlanRequest& req, const TopicOrdering* ordering) {
  if (!corpus.has_topic(req.target_id)) raise(ErrorCode::kUnknownTopic, "target '" + req.target_id + "'");
  if (uses_similarity(req.scheme) && ordering == nullptr) {
    raise(ErrorCode::kMissingOrdering, std::string(to_string(req.scheme)) + " needs a topic ordering");
  }
  if (!uses_similarity(req.scheme) && ordering != nullptr) {
    raise(ErrorCode::kInvalidArgument, std::string(to_string(req.scheme)) + " does not take a topic ordering");
  }
  if (ordering != nullptr) {
    std::vector<std::string> expected;
    for (const std::string& t : corpus.topic_ids()) {
      if (t != req.target_id) expected.push_back(t);
    }
    std::vector<std::string> got = ordering->topic_ids();
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    if (ordering->target_id != req.target_id || got != expected) {
      raise(ErrorCode::kInvalidArgument, "topic ordering does not cover exactly the source topics of '" +
                                             req.target_id + "'");
    }
  }

  const TargetSplit split = split_target(corpus, req.target_id, req.budget, req.seed, req.min_test);

  std::vector<std::string> target_pool = split.train_ids;
  shuffle(std::span<std::string>(target_pool), mix_seed(req.seed, kTargetOrderSalt));

  // GTL: one shuffled pool of every source claim. SGTL: topics in ascending
  // similarity, each shuffled on its own, concatenated.
  std::vector<std::string> source_pool;
  const std::uint64_t source_seed = mix_seed(req.seed, kSourceOrderSalt);
  if (ordering != nullptr) {
    for (const SourceSimilarity& s : ordering->ordered_sources) {
      std::vector<std::string> ids = shuffled_ids(corpus, s.topic_id, mix_seed(source_seed, fnv1a64(s.topic_id)));
      source_pool.insert(source_pool.end(), ids.begin(), ids.end());
    }
  } else {
    for (const std::string& t : corpus.topic_ids()) {
      if (t == req.target_id) continue;
      const auto ids = corpus.topic_claim_ids(t);
      source_pool.insert(source_pool.end(), ids.begin(), ids.end());
    }
    shuffle(std::span<std::string>(source_pool), source_seed);
  }

  const AllocationSizes sizes = allocation_sizes(req.scheme, req.stages, req.budget, source_pool.size());
  const auto target_slices = slice(target_pool, sizes.target_sizes);
  const auto source_slices = slice(source_pool, sizes.source_sizes);

  StagePlan plan;
  plan.scheme = req.scheme;
  plan.target_id = req.target_id;
  plan.seed = req.seed;
  for (int i = 0; i < req.stages; ++i) {
    plan.stages.push_back({i + 1, source_slices[static_cast<std::size_t>(i)], target_slices[static_cast<std::size_t>(i)]});
  }
  plan.test_ids = split.test_ids;
  return plan;
}

StagePlan plan_for(const Corpus& corpus, const PlanRequest& req) {
  if (!uses_similarity(req.scheme)) return build_plan(corpus, req, nullptr);
  const TargetSplit split = split_target(corpus, req.target_id, req.budget, req.seed, req.min_test);
  std::vector<Claim> reference;
  reference.reserve(split.train_ids.size());
  for (const std::string& id : split.train_ids) reference.push_back(corpus.at(id));
  const TopicOrdering ordering = order_sources(corpus, req.target_id, reference);
  return build_plan(corpus, req, &ordering);
}

}  // namespace topicforge
