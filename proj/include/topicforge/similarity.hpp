#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicforge/corpus.hpp"

namespace topicforge {

// Word counts of a topic over whitespace-separated tokens of normalized text.
// Stored counts are always >= 1.
struct TopicVector {
  std::string topic_id;
  std::map<std::string, std::uint64_t, std::less<>> counts;

  bool operator==(const TopicVector&) const = default;
};

struct SourceSimilarity {
  std::string topic_id;
  double similarity = 0.0;

  bool operator==(const SourceSimilarity&) const = default;
};

// Source topics, ascending by similarity to the target; ties by topic id.
struct TopicOrdering {
  std::string target_id;
  std::vector<SourceSimilarity> ordered_sources;

  std::vector<std::string> topic_ids() const;
  bool operator==(const TopicOrdering&) const = default;
};

// Throws kEmptyTopic when claims is empty.
TopicVector count_vector(std::span<const Claim> claims);
void add_counts(TopicVector& vec, std::string_view normalized_text);

// Cosine over the union vocabulary, clamped to [0,1]. Throws kZeroVector.
double cosine(const TopicVector& a, const TopicVector& b);

// Every topic other than target_id is vectorized over all of its claims and
// compared with the vector of target_reference (the few-shot sample, never
// the held-out claims).
TopicOrdering order_sources(const Corpus& corpus, std::string_view target_id,
                            std::span<const Claim> target_reference);

std::string ordering_csv(const TopicOrdering& ordering);

}  // namespace topicforge
