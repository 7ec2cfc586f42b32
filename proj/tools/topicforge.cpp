// topicforge command line. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "topicforge/topicforge.h"

namespace {

int exit_code(tf_status s) {
  switch (s) {
    case TF_OK: return 0;
    case TF_ERR_CONFIG: return 2;
    case TF_ERR_TOPIC_FAILURE: return 3;
    case TF_ERR_PROTOCOL:
    case TF_ERR_SPAWN_FAILURE:
    case TF_ERR_HANDSHAKE_FAILURE: return 4;
    default: return 1;
  }
}

int report(tf_status s) {
  if (s != TF_OK) std::fprintf(stderr, "topicforge: %s\n", tf_last_error());
  return exit_code(s);
}

// Owns a string handed out by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { tf_free_string(p); }
  std::string str() const { return p ? p : ""; }
};

struct CorpusArgs {
  std::string path;
  std::string format = "auto";
  std::string col_id = "id", col_topic = "topic", col_text = "text", col_label = "label";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--corpus", path, "corpus file (jsonl, csv or tsv)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", format, "auto, jsonl, csv or tsv")->capture_default_str();
    cmd->add_option("--col-id", col_id)->capture_default_str();
    cmd->add_option("--col-topic", col_topic)->capture_default_str();
    cmd->add_option("--col-text", col_text)->capture_default_str();
    cmd->add_option("--col-label", col_label)->capture_default_str();
  }

  tf_status load(tf_corpus** out) const {
    nlohmann::json opt = {{"format", format},
                          {"columns", {{"id", col_id}, {"topic", col_topic}, {"text", col_text}, {"label", col_label}}}};
    return tf_corpus_load(path.c_str(), opt.dump().c_str(), out);
  }
};

tf_status write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return TF_OK;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << text)) {
    std::fprintf(stderr, "topicforge: cannot write '%s'\n", out_path.c_str());
    return TF_ERR_IO;
  }
  return TF_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradual topic learning curricula for cross-topic claim ranking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tf_version());

  // run
  auto* run = app.add_subcommand("run", "leave-one-topic-out sweep from a config file");
  std::string config;
  bool strict = false;
  unsigned jobs = 1;
  run->add_option("--config", config, "experiment config (JSON)")->required();
  run->add_flag("--strict", strict, "abort on the first failed topic");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();

  // plan
  auto* plan = app.add_subcommand("plan", "build a stage plan for one target topic");
  CorpusArgs plan_corpus;
  plan_corpus.add_to(plan);
  std::string target, scheme, out_path;
  int stages = 2;
  std::size_t budget = 200, min_test = 50;
  std::uint64_t seed = 0;
  plan->add_option("--target", target)->required();
  plan->add_option("--scheme", scheme, "gtl-dec-inc, gtl-equ-inc, sgtl-dec-inc, sgtl-equ-inc or baseline")
      ->required();
  plan->add_option("--stages", stages)->capture_default_str();
  plan->add_option("--budget", budget)->capture_default_str();
  plan->add_option("--min-test", min_test)->capture_default_str();
  plan->add_option("--seed", seed)->capture_default_str();
  plan->add_option("--out", out_path, "output file (default stdout)");

  // similarity
  auto* sim = app.add_subcommand("similarity", "order source topics by similarity to a target");
  CorpusArgs sim_corpus;
  sim_corpus.add_to(sim);
  sim->add_option("--target", target)->required();
  sim->add_option("--budget", budget)->capture_default_str();
  sim->add_option("--min-test", min_test)->capture_default_str();
  sim->add_option("--seed", seed)->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "per-topic AveP and MAP from a scores file");
  std::string scores_path, labels_path, denom = "relevant", format = "table";
  eval->add_option("--scores", scores_path, "id,score csv/tsv or JSON lines")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels_path, "corpus file with the gold labels")->required()->check(CLI::ExistingFile);
  eval->add_option("--ap-denominator", denom)->check(CLI::IsMember({"relevant", "total"}))->capture_default_str();
  eval->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "table"}))->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus");
  std::string spec_path;
  gen->add_option("--spec", spec_path, "synthetic spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--out", out_path, "output JSON lines file")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "per-topic deltas between two reports");
  std::string baseline_path, candidate_path;
  cmp->add_option("--baseline", baseline_path, "report json or per-topic csv")->required()->check(CLI::ExistingFile);
  cmp->add_option("--candidate", candidate_path)->required()->check(CLI::ExistingFile);
  cmp->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "table"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) {
    Owned summary;
    const tf_status s = tf_run_experiment(config.c_str(), strict ? 1 : 0, jobs, &summary.p);
    if (s == TF_OK) std::fputs(summary.str().c_str(), stdout);
    return report(s);
  }

  if (*plan || *sim) {
    const CorpusArgs& ca = *plan ? plan_corpus : sim_corpus;
    tf_corpus* corpus = nullptr;
    tf_status s = ca.load(&corpus);
    if (s != TF_OK) return report(s);
    Owned text;
    s = *plan ? tf_plan_build(corpus, target.c_str(), scheme.c_str(), stages, budget, min_test, seed, &text.p)
              : tf_similarity_order(corpus, target.c_str(), budget, min_test, seed, &text.p);
    tf_corpus_free(corpus);
    if (s != TF_OK) return report(s);
    return report(write_or_print(text.str(), *plan ? out_path : ""));
  }

  if (*eval) {
    Owned text, warnings;
    const tf_status s =
        tf_evaluate(scores_path.c_str(), labels_path.c_str(), denom.c_str(), format.c_str(), &text.p, &warnings.p);
    if (s != TF_OK) return report(s);
    std::fputs(warnings.str().c_str(), stderr);
    std::fputs(text.str().c_str(), stdout);
    return 0;
  }

  if (*gen) {
    std::ifstream in(spec_path);
    const std::string spec((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    tf_corpus* corpus = nullptr;
    tf_status s = tf_corpus_generate(spec.c_str(), seed, &corpus);
    if (s != TF_OK) return report(s);
    s = tf_corpus_write(corpus, out_path.c_str());
    if (s == TF_OK) {
      std::fprintf(stderr, "wrote %zu claims in %zu topics to %s\n", tf_corpus_size(corpus),
                   tf_corpus_topic_count(corpus), out_path.c_str());
    }
    tf_corpus_free(corpus);
    return report(s);
  }

  if (*cmp) {
    Owned text;
    const tf_status s = tf_compare_reports(baseline_path.c_str(), candidate_path.c_str(), format.c_str(), &text.p);
    if (s == TF_OK) std::fputs(text.str().c_str(), stdout);
    return report(s);
  }
  return 0;
}
