#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "topicforge/corpus.hpp"
#include "topicforge/error.hpp"
#include "topicforge/rng.hpp"

namespace topicforge {
namespace {

// Letters-only spelling of an integer, so vocabulary survives normalization.
std::string spell(std::size_t n) {
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  return s;
}

double overlap_of(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::set<std::size_t> sa(a.begin(), a.end());
  std::size_t shared = 0;
  for (std::size_t w : b) shared += sa.count(w);
  const std::size_t denom = std::min(a.size(), b.size());
  return denom == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(denom);
}

}  // namespace

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& why) { raise(ErrorCode::kInvalidSpec, why); };
  if (topics.empty()) bad("no topics");
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) bad("prevalence outside [0,1]");
  if (!(p_signal >= 0.0 && p_signal <= 1.0)) bad("p_signal outside [0,1]");
  if (!(p_noise >= 0.0 && p_noise <= 1.0)) bad("p_noise outside [0,1]");
  if (min_words == 0 || min_words > max_words) bad("word-count range must satisfy 1 <= min_words <= max_words");
  if ((p_signal > 0.0 || p_noise > 0.0) && markers_per_topic + shared_markers == 0) {
    bad("a label signal needs at least one marker term");
  }
  std::set<std::string> ids;
  for (const SyntheticTopic& t : topics) {
    if (t.id.empty()) bad("topic with empty id");
    if (!ids.insert(t.id).second) bad("duplicate topic id '" + t.id + "'");
    if (t.vocab_size == 0) bad("topic '" + t.id + "' has an empty vocabulary");
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const VocabOverlap& o : overlaps) {
    if (!ids.contains(o.a) || !ids.contains(o.b)) bad("overlap names an unknown topic");
    if (o.a == o.b) bad("overlap of a topic with itself");
    if (!(o.fraction >= 0.0 && o.fraction <= 1.0)) bad("overlap fraction outside [0,1]");
    auto key = std::minmax(o.a, o.b);
    if (!pairs.emplace(key.first, key.second).second) bad("overlap for " + o.a + "/" + o.b + " given twice");
  }
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  auto as_count = [](const nlohmann::json& v, const char* what) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      raise(ErrorCode::kInvalidSpec, std::string(what) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "topics") {
      for (const auto& t : value) {
        SyntheticTopic topic;
        for (const auto& [tk, tv] : t.items()) {
          if (tk == "id") topic.id = tv.get<std::string>();
          else if (tk == "size") topic.size = as_count(tv, "topic size");
          else if (tk == "vocab_size") topic.vocab_size = as_count(tv, "vocab_size");
          else raise(ErrorCode::kInvalidSpec, "unknown topic key '" + tk + "'");
        }
        s.topics.push_back(std::move(topic));
      }
    } else if (key == "overlaps") {
      for (const auto& o : value) {
        VocabOverlap ov;
        for (const auto& [ok, oval] : o.items()) {
          if (ok == "a") ov.a = oval.get<std::string>();
          else if (ok == "b") ov.b = oval.get<std::string>();
          else if (ok == "fraction") ov.fraction = oval.get<double>();
          else raise(ErrorCode::kInvalidSpec, "unknown overlap key '" + ok + "'");
        }
        s.overlaps.push_back(std::move(ov));
      }
    } else if (key == "prevalence") s.prevalence = value.get<double>();
    else if (key == "p_signal") s.p_signal = value.get<double>();
    else if (key == "p_noise") s.p_noise = value.get<double>();
    else if (key == "markers_per_topic") s.markers_per_topic = as_count(value, key.c_str());
    else if (key == "shared_markers") s.shared_markers = as_count(value, key.c_str());
    else if (key == "min_words") s.min_words = as_count(value, key.c_str());
    else if (key == "max_words") s.max_words = as_count(value, key.c_str());
    else raise(ErrorCode::kInvalidSpec, "unknown synthetic key '" + key + "'");
  }
  s.validate();
  return s;
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json topics_j = nlohmann::json::array();
  for (const auto& t : topics) topics_j.push_back({{"id", t.id}, {"size", t.size}, {"vocab_size", t.vocab_size}});
  nlohmann::json overlaps_j = nlohmann::json::array();
  for (const auto& o : overlaps) overlaps_j.push_back({{"a", o.a}, {"b", o.b}, {"fraction", o.fraction}});
  return {{"topics", topics_j},         {"overlaps", overlaps_j},
          {"prevalence", prevalence},   {"p_signal", p_signal},
          {"p_noise", p_noise},         {"markers_per_topic", markers_per_topic},
          {"shared_markers", shared_markers}, {"min_words", min_words},
          {"max_words", max_words}};
}

Corpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n_topics = spec.topics.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < n_topics; ++t) index[spec.topics[t].id] = t;

  // overlap constraints keyed by (later topic, earlier topic)
  std::map<std::pair<std::size_t, std::size_t>, double> wanted;
  for (const VocabOverlap& o : spec.overlaps) {
    std::size_t a = index[o.a], b = index[o.b];
    wanted[{std::max(a, b), std::min(a, b)}] = o.fraction;
  }

  // Vocabularies are lists of global word numbers. Topic k draws the shared
  // part from each earlier partner (in a seeded order), then fills the rest
  // with words no other topic has.
  std::size_t next_word = 0;
  std::vector<std::vector<std::size_t>> vocab(n_topics);
  for (std::size_t k = 0; k < n_topics; ++k) {
    const std::size_t vk = spec.topics[k].vocab_size;
    std::set<std::size_t> chosen;
    std::vector<std::size_t>& mine = vocab[k];
    for (std::size_t j = 0; j < k; ++j) {
      auto it = wanted.find({k, j});
      if (it == wanted.end()) continue;
      const std::size_t denom = std::min(vk, spec.topics[j].vocab_size);
      const auto need = static_cast<std::size_t>(std::llround(it->second * static_cast<double>(denom)));
      std::size_t have = 0;
      for (std::size_t w : vocab[j]) have += chosen.count(w);
      std::vector<std::size_t> pool;
      for (std::size_t w : vocab[j]) {
        if (!chosen.contains(w)) pool.push_back(w);
      }
      shuffle(std::span<std::size_t>(pool), mix_seed(seed, 0x1000 + k * 977 + j));
      for (std::size_t w : pool) {
        if (have >= need || mine.size() >= vk) break;
        chosen.insert(w);
        mine.push_back(w);
        ++have;
      }
    }
    while (mine.size() < vk) mine.push_back(next_word++);
  }
  for (const VocabOverlap& o : spec.overlaps) {
    const double realized = overlap_of(vocab[index[o.a]], vocab[index[o.b]]);
    if (std::abs(realized - o.fraction) > 0.05) {
      raise(ErrorCode::kInvalidSpec, "overlap constraints are infeasible: " + o.a + "/" + o.b + " wants " +
                                         std::to_string(o.fraction) + ", realizable " + std::to_string(realized));
    }
  }

  std::vector<std::string> shared_markers;
  for (std::size_t m = 0; m < spec.shared_markers; ++m) shared_markers.push_back("zzshared" + spell(m));

  std::vector<Claim> claims;
  for (std::size_t k = 0; k < n_topics; ++k) {
    const SyntheticTopic& topic = spec.topics[k];
    SplitMix64 g(mix_seed(seed, 0x2000 + k));

    std::vector<std::string> markers = shared_markers;
    for (std::size_t m = 0; m < spec.markers_per_topic; ++m) {
      markers.push_back("zz" + spell(k) + "mark" + spell(m));
    }

    const auto n_cw = static_cast<std::size_t>(std::llround(spec.prevalence * static_cast<double>(topic.size)));
    std::vector<Label> labels(topic.size, Label::kNotCheckWorthy);
    std::fill_n(labels.begin(), std::min(n_cw, topic.size), Label::kCheckWorthy);
    shuffle(std::span<Label>(labels), g.next());

    for (std::size_t i = 0; i < topic.size; ++i) {
      const std::size_t len = spec.min_words + g.below(spec.max_words - spec.min_words + 1);
      std::vector<std::string> words;
      words.reserve(len + 2);
      for (std::size_t w = 0; w < len; ++w) {
        words.push_back("w" + spell(vocab[k][g.below(vocab[k].size())]));
      }
      const bool cw = labels[i] == Label::kCheckWorthy;
      const double p = cw ? spec.p_signal : spec.p_noise;
      if (!markers.empty() && g.uniform() < p) {
        const std::size_t n_markers = 1 + g.below(2);
        for (std::size_t m = 0; m < n_markers; ++m) {
          const std::size_t pos = g.below(words.size() + 1);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), markers[g.below(markers.size())]);
        }
      }
      std::string text;
      for (const std::string& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      char id[32];
      std::snprintf(id, sizeof id, "-%05zu", i);
      Claim c;
      c.id = topic.id + id;
      c.topic_id = topic.id;
      c.raw_text = text;
      c.text = std::move(text);
      c.label = labels[i];
      claims.push_back(std::move(c));
    }
  }
  return Corpus::from_claims(std::move(claims));
}

}  // namespace topicforge
