#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace topicforge {

enum class Label : std::uint8_t { kNotCheckWorthy = 0, kCheckWorthy = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }
Label parse_label(std::string_view value);

struct Claim {
  std::string id;
  std::string topic_id;
  std::string text;      // normalized
  std::string raw_text;  // as ingested
  Label label = Label::kNotCheckWorthy;

  bool check_worthy() const { return label == Label::kCheckWorthy; }
  bool operator==(const Claim&) const = default;
};

struct NormalizationConfig {
  std::string url_token = "[رابط]";
  std::string email_token = "[بريد]";
  std::string user_token = "[مستخدم]";
  std::string digit_token = "[رقم]";
  bool strip_punctuation = true;
  bool strip_emoji = true;
  bool strip_html = true;

  // Tokens must be non-empty and whitespace-free; throws kInvalidArgument.
  void validate() const;

  static NormalizationConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Deterministic and idempotent. Steps, in order: HTML, URLs, emails,
// @-mentions, digit runs, emoji, punctuation and hash signs, whitespace.
std::string normalize_text(std::string_view raw, const NormalizationConfig& cfg = {});

// Immutable after construction. Topics keep first-appearance order and each
// topic keeps its claims in input order.
class Corpus {
 public:
  Corpus() = default;

  // Throws kDuplicateId when an id repeats.
  static Corpus from_claims(std::vector<Claim> claims);

  const std::vector<Claim>& claims() const { return claims_; }
  std::size_t size() const { return claims_.size(); }
  bool empty() const { return claims_.empty(); }

  const std::vector<std::string>& topic_ids() const { return topic_order_; }
  bool has_topic(std::string_view topic_id) const;

  // Indices into claims(); throws kUnknownTopic.
  const std::vector<std::size_t>& topic_members(std::string_view topic_id) const;
  std::vector<std::string> topic_claim_ids(std::string_view topic_id) const;
  std::vector<Claim> topic_claims(std::string_view topic_id) const;

  const Claim* find(std::string_view id) const;
  // Throws kInvalidArgument for an unknown id.
  const Claim& at(std::string_view id) const;

  bool operator==(const Corpus& other) const { return claims_ == other.claims_; }

 private:
  std::vector<Claim> claims_;
  std::vector<std::string> topic_order_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> topics_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

enum class CorpusFormat { kAuto, kJsonLines, kCsv, kTsv };

struct ColumnMapping {
  std::string id = "id";
  std::string topic = "topic";
  std::string text = "text";
  std::string label = "label";
};

struct LoadOptions {
  CorpusFormat format = CorpusFormat::kAuto;
  ColumnMapping columns;
  NormalizationConfig normalization;
};

CorpusFormat parse_corpus_format(std::string_view name);

// Throws kIo, kMalformedRecord (message carries the line), kDuplicateId or
// kUnknownLabel.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});
Corpus parse_corpus(std::istream& in, CorpusFormat format, const LoadOptions& options = {});

// Canonical newline-delimited JSON: {"id","topic","text","label"} per line.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

// new topic id -> topics folded into it. The merged topic takes the position
// of the earliest of its members.
using TopicGroups = std::map<std::string, std::vector<std::string>>;
Corpus merge_topics(const Corpus& corpus, const TopicGroups& groups);

// Desk-scale stand-in for a real multi-topic claim corpus.
struct SyntheticTopic {
  std::string id;
  std::size_t size = 0;
  std::size_t vocab_size = 200;
};

// Fraction of the smaller vocabulary shared between two topics.
struct VocabOverlap {
  std::string a;
  std::string b;
  double fraction = 0.0;
};

struct SyntheticSpec {
  std::vector<SyntheticTopic> topics;
  std::vector<VocabOverlap> overlaps;
  double prevalence = 0.284;
  // Probability a check-worthy claim carries a claim marker term.
  double p_signal = 0.9;
  // Probability a non-check-worthy claim carries one anyway.
  double p_noise = 0.0;
  std::size_t markers_per_topic = 3;
  // Markers shared by every topic; they add cross-topic vocabulary.
  std::size_t shared_markers = 0;
  std::size_t min_words = 8;
  std::size_t max_words = 16;

  // Throws kInvalidSpec.
  void validate() const;

  static SyntheticSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Deterministic for a fixed (spec, seed). Each topic holds exactly
// round(prevalence * size) check-worthy claims.
Corpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace topicforge
