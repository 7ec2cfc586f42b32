#include "topicforge/topicforge.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/evaluation.hpp"
#include "topicforge/runner.hpp"
#include "topicforge/schedule.hpp"
#include "topicforge/similarity.hpp"
#include "topicforge/trainer.hpp"

namespace tf = topicforge;

struct tf_corpus {
  tf::Corpus corpus;
};

struct tf_trainer {
  std::unique_ptr<tf::Trainer> impl;
};

namespace {

thread_local std::string g_last_error;

tf_status status_of(tf::ErrorCode code) { return static_cast<tf_status>(static_cast<int>(code) + 1); }

tf_status fail(tf_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

template <typename F>
tf_status guarded(F&& f) {
  try {
    f();
    return TF_OK;
  } catch (const tf::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(TF_ERR_INVALID_ARGUMENT, std::string("InvalidArgument: bad JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(TF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TF_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) tf::raise(tf::ErrorCode::kInvalidArgument, what);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

nlohmann::json parse_json(const char* text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    tf::raise(tf::ErrorCode::kInvalidArgument, std::string(what) + " is not valid JSON: " + e.what());
  }
}

tf::LoadOptions load_options(const char* options_json) {
  tf::LoadOptions opt;
  if (options_json == nullptr) return opt;
  const nlohmann::json j = parse_json(options_json, "load options");
  require(j.is_object(), "load options must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "format") {
      opt.format = tf::parse_corpus_format(value.get<std::string>());
    } else if (key == "columns") {
      for (const auto& [k, v] : value.items()) {
        const auto name = v.get<std::string>();
        if (k == "id") opt.columns.id = name;
        else if (k == "topic") opt.columns.topic = name;
        else if (k == "text") opt.columns.text = name;
        else if (k == "label") opt.columns.label = name;
        else tf::raise(tf::ErrorCode::kInvalidArgument, "unknown column key '" + k + "'");
      }
    } else if (key == "normalization") {
      opt.normalization = tf::NormalizationConfig::from_json(value);
    } else {
      tf::raise(tf::ErrorCode::kInvalidArgument, "unknown load option '" + key + "'");
    }
  }
  return opt;
}

tf::ApDenominator denominator(const char* name) {
  return name == nullptr ? tf::ApDenominator::kRelevant : tf::parse_ap_denominator(name);
}

void fill(const std::vector<std::size_t>& v, std::size_t* out, std::size_t out_len) {
  require(out != nullptr, "output array is null");
  require(out_len == v.size(), "output array length must equal the stage count");
  std::copy(v.begin(), v.end(), out);
}

std::string sweep_summary(const tf::SweepResult& sweep) {
  std::string out = tf::render_sweep_table(sweep);
  std::size_t failed = 0;
  std::string lines;
  for (const tf::SweepCell& c : sweep.cells) {
    for (const tf::SeedRun& r : c.runs) {
      for (const tf::TopicFailure& f : r.failures) {
        ++failed;
        lines += "  " + std::string(tf::to_string(c.scheme)) + " s" + std::to_string(c.stages) + " seed " +
                 std::to_string(f.seed) + " " + f.topic_id + ": " + f.message + "\n";
      }
    }
  }
  if (failed > 0) out += "\n" + std::to_string(failed) + " topic run(s) failed:\n" + lines;
  return out;
}

}  // namespace

extern "C" {

const char* tf_version(void) { return "0.1.0"; }

const char* tf_status_name(tf_status status) {
  if (status == TF_OK) return "Ok";
  if (status == TF_ERR_INTERNAL) return "Internal";
  if (status > TF_OK && status < TF_ERR_INTERNAL) {
    return tf::to_string(static_cast<tf::ErrorCode>(static_cast<int>(status) - 1)).data();
  }
  return "Unknown";
}

const char* tf_last_error(void) { return g_last_error.c_str(); }

void tf_free_string(char* s) { std::free(s); }

tf_status tf_normalize_text(const char* raw, const char* config_json, char** out) {
  return guarded([&] {
    require(raw != nullptr && out != nullptr, "null argument");
    tf::NormalizationConfig cfg;
    if (config_json != nullptr) cfg = tf::NormalizationConfig::from_json(parse_json(config_json, "config"));
    cfg.validate();
    *out = dup(tf::normalize_text(raw, cfg));
  });
}

tf_status tf_corpus_load(const char* path, const char* options_json, tf_corpus** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto c = std::make_unique<tf_corpus>();
    c->corpus = tf::load_corpus(path, load_options(options_json));
    *out = c.release();
  });
}

tf_status tf_corpus_generate(const char* spec_json, uint64_t seed, tf_corpus** out) {
  return guarded([&] {
    require(spec_json != nullptr && out != nullptr, "null argument");
    auto c = std::make_unique<tf_corpus>();
    c->corpus = tf::generate_synthetic(tf::SyntheticSpec::from_json(parse_json(spec_json, "spec")), seed);
    *out = c.release();
  });
}

tf_status tf_corpus_merge(const tf_corpus* corpus, const char* groups_json, tf_corpus** out) {
  return guarded([&] {
    require(corpus != nullptr && groups_json != nullptr && out != nullptr, "null argument");
    auto c = std::make_unique<tf_corpus>();
    c->corpus = tf::merge_topics(corpus->corpus, parse_json(groups_json, "groups").get<tf::TopicGroups>());
    *out = c.release();
  });
}

tf_status tf_corpus_write(const tf_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus != nullptr && path != nullptr, "null argument");
    tf::write_corpus(std::filesystem::path(path), corpus->corpus);
  });
}

size_t tf_corpus_size(const tf_corpus* corpus) { return corpus == nullptr ? 0 : corpus->corpus.size(); }

size_t tf_corpus_topic_count(const tf_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.topic_ids().size();
}

tf_status tf_corpus_topic_id(const tf_corpus* corpus, size_t index, const char** out) {
  return guarded([&] {
    require(corpus != nullptr && out != nullptr, "null argument");
    require(index < corpus->corpus.topic_ids().size(), "topic index out of range");
    *out = corpus->corpus.topic_ids()[index].c_str();
  });
}

void tf_corpus_free(tf_corpus* corpus) { delete corpus; }

tf_status tf_divisor(int stages, size_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = tf::divisor(stages);
  });
}

tf_status tf_incremental_sizes(size_t budget, int stages, size_t* out, size_t out_len) {
  return guarded([&] { fill(tf::incremental_sizes(budget, stages), out, out_len); });
}

tf_status tf_decremental_source_sizes(size_t n_src, int stages, size_t* out, size_t out_len) {
  return guarded([&] { fill(tf::decremental_source_sizes(n_src, stages), out, out_len); });
}

tf_status tf_equivalent_source_sizes(size_t n_src, int stages, size_t* out, size_t out_len) {
  return guarded([&] { fill(tf::equivalent_source_sizes(n_src, stages), out, out_len); });
}

tf_status tf_similarity_order(const tf_corpus* corpus, const char* target, size_t budget, size_t min_test,
                              uint64_t seed, char** out_csv) {
  return guarded([&] {
    require(corpus != nullptr && target != nullptr && out_csv != nullptr, "null argument");
    const tf::Corpus& c = corpus->corpus;
    if (!c.has_topic(target)) tf::raise(tf::ErrorCode::kUnknownTopic, std::string("no topic '") + target + "'");
    const tf::TargetSplit split = tf::split_target(c, target, budget, seed, min_test);
    std::vector<tf::Claim> reference;
    for (const std::string& id : split.train_ids) reference.push_back(c.at(id));
    *out_csv = dup(tf::ordering_csv(tf::order_sources(c, target, reference)));
  });
}

tf_status tf_plan_build(const tf_corpus* corpus, const char* target, const char* scheme, int stages,
                        size_t budget, size_t min_test, uint64_t seed, char** out_json) {
  return guarded([&] {
    require(corpus != nullptr && target != nullptr && scheme != nullptr && out_json != nullptr, "null argument");
    tf::PlanRequest req;
    req.target_id = target;
    req.scheme = tf::parse_scheme(scheme);
    req.stages = stages;
    req.budget = budget;
    req.min_test = min_test;
    req.seed = seed;
    *out_json = dup(tf::plan_for(corpus->corpus, req).to_json().dump(2) + "\n");
  });
}

tf_status tf_trainer_create(const char* config_json, tf_trainer** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    tf::TrainerConfig cfg;
    if (config_json != nullptr) cfg = tf::TrainerConfig::from_json(parse_json(config_json, "trainer config"));
    auto t = std::make_unique<tf_trainer>();
    t->impl = tf::make_trainer(cfg);
    *out = t.release();
  });
}

tf_status tf_trainer_train_stage(tf_trainer* trainer, const char* const* texts, const int* labels, size_t n) {
  return guarded([&] {
    require(trainer != nullptr && (n == 0 || (texts != nullptr && labels != nullptr)), "null argument");
    std::vector<tf::TrainExample> batch;
    batch.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      require(texts[i] != nullptr, "null text");
      if (labels[i] != 0 && labels[i] != 1) tf::raise(tf::ErrorCode::kUnknownLabel, "labels must be 0 or 1");
      batch.push_back({texts[i], labels[i] == 1 ? tf::Label::kCheckWorthy : tf::Label::kNotCheckWorthy});
    }
    trainer->impl->train_stage(batch);
  });
}

tf_status tf_trainer_score(tf_trainer* trainer, const char* const* texts, size_t n, double* out_scores) {
  return guarded([&] {
    require(trainer != nullptr && (n == 0 || (texts != nullptr && out_scores != nullptr)), "null argument");
    std::vector<std::string> batch;
    batch.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      require(texts[i] != nullptr, "null text");
      batch.emplace_back(texts[i]);
    }
    const std::vector<double> s = trainer->impl->score(batch);
    std::copy(s.begin(), s.end(), out_scores);
  });
}

tf_status tf_trainer_reset(tf_trainer* trainer) {
  return guarded([&] {
    require(trainer != nullptr, "null argument");
    trainer->impl->reset();
  });
}

int tf_trainer_stage_counter(const tf_trainer* trainer) {
  return trainer == nullptr ? -1 : trainer->impl->stage_counter();
}

void tf_trainer_free(tf_trainer* trainer) {
  try {
    delete trainer;
  } catch (...) {
  }
}

tf_status tf_average_precision(const int* relevance, size_t n, const char* ap_denominator, double* out) {
  return guarded([&] {
    require((relevance != nullptr || n == 0) && out != nullptr, "null argument");
    *out = tf::average_precision(std::span<const int>(relevance, n), denominator(ap_denominator));
  });
}

tf_status tf_evaluate(const char* scores_path, const char* labels_path, const char* ap_denominator,
                      const char* format, char** out_report, char** out_warnings) {
  return guarded([&] {
    require(scores_path != nullptr && labels_path != nullptr && out_report != nullptr, "null argument");
    const tf::ReportFormat fmt = format == nullptr ? tf::ReportFormat::kTable : tf::parse_report_format(format);
    const tf::Corpus labels = tf::load_corpus(labels_path);
    const auto scores = tf::load_scores(scores_path);
    const tf::ScoredEvaluation ev = tf::evaluate_scores(labels, scores, denominator(ap_denominator));
    std::string warnings;
    for (const std::string& t : ev.skipped_topics) warnings += "topic '" + t + "' has no relevant scored claim\n";
    *out_report = dup(tf::emit_report(ev.report, fmt));
    if (out_warnings != nullptr) *out_warnings = dup(warnings);
  });
}

tf_status tf_compare_reports(const char* baseline_path, const char* candidate_path, const char* format,
                             char** out) {
  return guarded([&] {
    require(baseline_path != nullptr && candidate_path != nullptr && out != nullptr, "null argument");
    const tf::ReportFormat fmt = format == nullptr ? tf::ReportFormat::kTable : tf::parse_report_format(format);
    const tf::Comparison cmp = tf::compare(tf::load_report(baseline_path), tf::load_report(candidate_path));
    *out = dup(cmp.render(fmt));
  });
}

tf_status tf_run_experiment(const char* config_path, int strict, unsigned jobs, char** out_summary) {
  return guarded([&] {
    require(config_path != nullptr, "null argument");
    const tf::ExperimentConfig cfg = tf::ExperimentConfig::from_file(config_path);
    const tf::Corpus corpus = cfg.load_corpus();
    tf::RunOptions opt;
    opt.strict = strict != 0;
    opt.jobs = jobs == 0 ? 1 : jobs;
    const tf::SweepResult sweep = tf::run_all(corpus, cfg, opt);
    tf::write_outputs(sweep, cfg, cfg.output_dir);
    if (out_summary != nullptr) *out_summary = dup(sweep_summary(sweep));
  });
}

}  // extern "C"
