#include <fstream>
#include <set>

#include "topicforge/error.hpp"
#include "topicforge/runner.hpp"

namespace topicforge {
namespace {

[[noreturn]] void config_error(const std::string& why) { raise(ErrorCode::kConfig, why); }

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("key '" + key + "' has the wrong type");
  }
}

std::string format_name(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::kJsonLines: return "jsonl";
    case CorpusFormat::kCsv: return "csv";
    case CorpusFormat::kTsv: return "tsv";
    default: return "auto";
  }
}

// Re-raise non-config failures from nested parsers as config errors.
template <typename F>
auto as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(where + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    config_error(where + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (corpus.path.has_value() == corpus.synthetic.has_value()) {
    config_error("exactly one of 'corpus' and 'synthetic' must be given");
  }
  if (schemes.empty()) config_error("'schemes' is empty");
  std::set<Scheme> unique_schemes(schemes.begin(), schemes.end());
  if (unique_schemes.size() != schemes.size()) config_error("'schemes' lists a scheme twice");
  bool gradual = false;
  for (Scheme s : schemes) gradual = gradual || s != Scheme::kBaselineSingleStage;
  if (gradual && stage_counts.empty()) config_error("'stage_counts' is empty");
  std::set<int> unique_counts(stage_counts.begin(), stage_counts.end());
  if (unique_counts.size() != stage_counts.size()) config_error("'stage_counts' lists a value twice");
  if (budget < 1) config_error("'budget' must be positive");
  for (int s : stage_counts) {
    if (s < 1 || static_cast<std::size_t>(s) > budget) {
      config_error("stage count " + std::to_string(s) + " outside [1, budget]");
    }
    if (s < 2 && gradual) config_error("gradual schemes need stage counts >= 2");
  }
  if (seeds.empty()) config_error("no seeds");
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) config_error("'seeds' lists a seed twice");
  as_config("trainer", [&] {
    trainer.validate();
    return 0;
  });
  as_config("normalization", [&] {
    corpus.load.normalization.validate();
    return 0;
  });
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig cfg;
  std::optional<std::size_t> repeats;
  bool seeds_given = false;

  for (const auto& [key, value] : j.items()) {
    if (key == "corpus") {
      if (value.is_string()) {
        cfg.corpus.path = value.get<std::string>();
        continue;
      }
      if (!value.is_object()) config_error("'corpus' must be a path or an object");
      for (const auto& [ck, cv] : value.items()) {
        if (ck == "path") cfg.corpus.path = get_as<std::string>(cv, "corpus.path");
        else if (ck == "format") {
          cfg.corpus.load.format = as_config("corpus.format", [&] { return parse_corpus_format(get_as<std::string>(cv, ck)); });
        } else if (ck == "columns") {
          for (const auto& [mk, mv] : cv.items()) {
            const auto name = get_as<std::string>(mv, "corpus.columns." + mk);
            if (mk == "id") cfg.corpus.load.columns.id = name;
            else if (mk == "topic") cfg.corpus.load.columns.topic = name;
            else if (mk == "text") cfg.corpus.load.columns.text = name;
            else if (mk == "label") cfg.corpus.load.columns.label = name;
            else config_error("unknown key 'corpus.columns." + mk + "'");
          }
        } else {
          config_error("unknown key 'corpus." + ck + "'");
        }
      }
      if (!cfg.corpus.path) config_error("'corpus' needs a 'path'");
    } else if (key == "synthetic") {
      nlohmann::json spec = value;
      if (!spec.is_object()) config_error("'synthetic' must be an object");
      if (spec.contains("seed")) {
        cfg.corpus.synthetic_seed = get_as<std::uint64_t>(spec["seed"], "synthetic.seed");
        spec.erase("seed");
      }
      cfg.corpus.synthetic = as_config("synthetic", [&] { return SyntheticSpec::from_json(spec); });
    } else if (key == "schemes") {
      cfg.schemes.clear();
      for (const auto& s : value) {
        cfg.schemes.push_back(as_config("schemes", [&] { return parse_scheme(get_as<std::string>(s, key)); }));
      }
    } else if (key == "stage_counts") {
      cfg.stage_counts = get_as<std::vector<int>>(value, key);
    } else if (key == "budget") {
      cfg.budget = get_as<std::size_t>(value, key);
    } else if (key == "min_test") {
      cfg.min_test = get_as<std::size_t>(value, key);
    } else if (key == "repeats") {
      repeats = get_as<std::size_t>(value, key);
    } else if (key == "seeds") {
      cfg.seeds = get_as<std::vector<std::uint64_t>>(value, key);
      seeds_given = true;
    } else if (key == "trainer") {
      cfg.trainer = as_config("trainer", [&] { return TrainerConfig::from_json(value); });
    } else if (key == "merge_topics") {
      cfg.merge_groups = get_as<TopicGroups>(value, key);
    } else if (key == "normalization") {
      cfg.corpus.load.normalization = as_config("normalization", [&] { return NormalizationConfig::from_json(value); });
    } else if (key == "ap_denominator") {
      cfg.ap_denominator = as_config(key, [&] { return parse_ap_denominator(get_as<std::string>(value, key)); });
    } else if (key == "output_dir") {
      cfg.output_dir = get_as<std::string>(value, key);
    } else {
      config_error("unknown key '" + key + "'");
    }
  }

  if (repeats) {
    if (seeds_given && *repeats != cfg.seeds.size()) {
      config_error("'repeats' is " + std::to_string(*repeats) + " but " + std::to_string(cfg.seeds.size()) +
                   " seeds are listed");
    }
    if (!seeds_given) {
      cfg.seeds.clear();
      for (std::size_t i = 1; i <= *repeats; ++i) cfg.seeds.push_back(i);
    }
  }
  if (cfg.corpus.path && cfg.corpus.path->is_relative() && !base_dir.empty()) {
    cfg.corpus.path = base_dir / *cfg.corpus.path;
  }
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  if (corpus.path) {
    j["corpus"] = {{"path", corpus.path->string()},
                   {"format", format_name(corpus.load.format)},
                   {"columns",
                    {{"id", corpus.load.columns.id},
                     {"topic", corpus.load.columns.topic},
                     {"text", corpus.load.columns.text},
                     {"label", corpus.load.columns.label}}}};
  }
  if (corpus.synthetic) {
    nlohmann::json s = corpus.synthetic->to_json();
    s["seed"] = corpus.synthetic_seed;
    j["synthetic"] = s;
  }
  nlohmann::json schemes_j = nlohmann::json::array();
  for (Scheme s : schemes) schemes_j.push_back(to_string(s));
  j["schemes"] = schemes_j;
  j["stage_counts"] = stage_counts;
  j["budget"] = budget;
  j["min_test"] = min_test;
  j["repeats"] = seeds.size();
  j["seeds"] = seeds;
  j["trainer"] = trainer.to_json();
  j["merge_topics"] = merge_groups;
  j["normalization"] = corpus.load.normalization.to_json();
  j["ap_denominator"] = to_string(ap_denominator);
  j["output_dir"] = output_dir.string();
  return j;
}

Corpus ExperimentConfig::load_corpus() const {
  Corpus base = corpus.path ? topicforge::load_corpus(*corpus.path, corpus.load)
                            : generate_synthetic(*corpus.synthetic, corpus.synthetic_seed);
  return merge_topics(base, merge_groups);
}

}  // namespace topicforge
