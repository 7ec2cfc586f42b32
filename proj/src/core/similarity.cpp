#include "topicforge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "topicforge/error.hpp"

namespace topicforge {

std::vector<std::string> TopicOrdering::topic_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ordered_sources.size());
  for (const auto& s : ordered_sources) ids.push_back(s.topic_id);
  return ids;
}

void add_counts(TopicVector& vec, std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) {
      std::string_view term = text.substr(i, j - i);
      auto it = vec.counts.find(term);
      if (it == vec.counts.end()) {
        vec.counts.emplace(std::string(term), 1);
      } else {
        ++it->second;
      }
    }
    i = j;
  }
}

TopicVector count_vector(std::span<const Claim> claims) {
  if (claims.empty()) raise(ErrorCode::kEmptyTopic, "cannot vectorize an empty claim set");
  TopicVector vec;
  vec.topic_id = claims.front().topic_id;
  for (const Claim& c : claims) {
    if (c.topic_id != vec.topic_id) {
      raise(ErrorCode::kInvalidArgument, "claims span topics '" + vec.topic_id + "' and '" + c.topic_id + "'");
    }
    add_counts(vec, c.text);
  }
  return vec;
}

namespace {

double squared_norm(const TopicVector& v) {
  double s = 0.0;
  for (const auto& [term, n] : v.counts) s += static_cast<double>(n) * static_cast<double>(n);
  return s;
}

}  // namespace

double cosine(const TopicVector& a, const TopicVector& b) {
  const double na = squared_norm(a);
  const double nb = squared_norm(b);
  if (na == 0.0) raise(ErrorCode::kZeroVector, "topic '" + a.topic_id + "' has no terms");
  if (nb == 0.0) raise(ErrorCode::kZeroVector, "topic '" + b.topic_id + "' has no terms");
  const TopicVector& small = a.counts.size() <= b.counts.size() ? a : b;
  const TopicVector& large = &small == &a ? b : a;
  double dot = 0.0;
  for (const auto& [term, n] : small.counts) {
    auto it = large.counts.find(term);
    if (it != large.counts.end()) dot += static_cast<double>(n) * static_cast<double>(it->second);
  }
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, 0.0, 1.0);
}

TopicOrdering order_sources(const Corpus& corpus, std::string_view target_id,
                            std::span<const Claim> target_reference) {
  if (!corpus.has_topic(target_id)) raise(ErrorCode::kUnknownTopic, "target '" + std::string(target_id) + "'");
  if (target_reference.empty()) raise(ErrorCode::kEmptyTopic, "empty target reference sample");

  TopicVector target;
  target.topic_id = std::string(target_id);
  for (const Claim& c : target_reference) add_counts(target, c.text);

  TopicOrdering ordering;
  ordering.target_id = std::string(target_id);
  for (const std::string& topic : corpus.topic_ids()) {
    if (topic == target_id) continue;
    TopicVector source;
    source.topic_id = topic;
    for (std::size_t i : corpus.topic_members(topic)) add_counts(source, corpus.claims()[i].text);
    if (source.counts.empty()) raise(ErrorCode::kEmptyTopic, "source topic '" + topic + "' has no terms");
    ordering.ordered_sources.push_back({topic, cosine(source, target)});
  }
  std::sort(ordering.ordered_sources.begin(), ordering.ordered_sources.end(),
            [](const SourceSimilarity& x, const SourceSimilarity& y) {
              if (x.similarity != y.similarity) return x.similarity < y.similarity;
              return x.topic_id < y.topic_id;
            });
  return ordering;
}

std::string ordering_csv(const TopicOrdering& ordering) {
  std::string out = "topic_id,similarity\n";
  char buf[64];
  for (const auto& s : ordering.ordered_sources) {
    std::snprintf(buf, sizeof buf, ",%.6f\n", s.similarity);
    out += s.topic_id;
    out += buf;
  }
  return out;
}

}  // namespace topicforge
