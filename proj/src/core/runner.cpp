#include "topicforge/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "topicforge/rng.hpp"

namespace topicforge {
namespace {

constexpr std::uint64_t kMergeSalt = 0x6D01;
constexpr std::uint64_t kTrainerSalt = 0x6D02;

bool aborts_sweep(ErrorCode code) {
  return code == ErrorCode::kSpawnFailure || code == ErrorCode::kHandshakeFailure || code == ErrorCode::kProtocol;
}

std::string cell_label(Scheme scheme, int stages) {
  return fmt::format("{}_{}", to_string(scheme), stages);
}

}  // namespace

TopicRun run_topic(const Corpus& corpus, const std::string& target_id, Scheme scheme, int stages,
                   std::uint64_t seed, const ExperimentConfig& cfg, const RunHooks& hooks) {
  try {
    PlanRequest req;
    req.target_id = target_id;
    req.scheme = scheme;
    req.stages = stages;
    req.budget = cfg.budget;
    req.min_test = cfg.min_test;
    req.seed = seed;
    const StagePlan plan = plan_for(corpus, req);

    TrainerConfig tcfg = cfg.trainer;
    tcfg.seed = mix_seed(cfg.trainer.seed, seed ^ kTrainerSalt);
    std::unique_ptr<Trainer> trainer = hooks.trainer_factory ? hooks.trainer_factory(tcfg) : make_trainer(tcfg);

    TopicRun run;
    run.sizes = plan.sizes();
    const std::uint64_t merge_seed = mix_seed(seed, kMergeSalt);
    for (const StageAlloc& stage : plan.stages) {
      std::vector<std::string> ids = stage.source_ids;
      ids.insert(ids.end(), stage.target_ids.begin(), stage.target_ids.end());
      shuffle(std::span<std::string>(ids), mix_seed(merge_seed, static_cast<std::uint64_t>(stage.index)));
      if (hooks.on_train) hooks.on_train(target_id, stage.index, ids);
      std::vector<TrainExample> batch;
      batch.reserve(ids.size());
      for (const std::string& id : ids) {
        const Claim& c = corpus.at(id);
        if (!c.text.empty()) batch.push_back({c.text, c.label});
      }
      // Floor arithmetic can leave a middle stage with nothing to train on;
      // it still counts as executed.
      if (!batch.empty()) trainer->train_stage(batch);
      ++run.stages_executed;
    }

    std::vector<Claim> test;
    std::vector<std::string> texts;
    test.reserve(plan.test_ids.size());
    for (const std::string& id : plan.test_ids) {
      test.push_back(corpus.at(id));
      texts.push_back(test.back().text);
    }
    if (hooks.on_score) hooks.on_score(target_id, plan.test_ids);
    const std::vector<double> scores = trainer->score(texts);
    const RankedList ranked = rank(test, scores);

    run.result.topic_id = target_id;
    run.result.n_test = test.size();
    run.result.n_relevant = static_cast<std::size_t>(
        std::count_if(test.begin(), test.end(), [](const Claim& c) { return c.check_worthy(); }));
    run.result.avep = average_precision(ranked, cfg.ap_denominator);
    return run;
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("[target={}, scheme={}, S={}] {}", target_id, to_string(scheme), stages, e.what()));
  }
}

const SweepCell* SweepResult::find(Scheme scheme, int stages) const {
  for (const SweepCell& c : cells) {
    if (c.scheme == scheme && c.stages == stages) return &c;
  }
  return nullptr;
}

namespace {

nlohmann::json sizes_json(const AllocationSizes& s) {
  return {{"stages", s.stages}, {"target_sizes", s.target_sizes}, {"source_sizes", s.source_sizes}};
}

}  // namespace

nlohmann::json SweepResult::to_json() const {
  nlohmann::json cells_j = nlohmann::json::array();
  for (const SweepCell& c : cells) {
    nlohmann::json runs = nlohmann::json::array();
    for (const SeedRun& r : c.runs) {
      nlohmann::json failures = nlohmann::json::array();
      for (const TopicFailure& f : r.failures) {
        failures.push_back({{"topic_id", f.topic_id}, {"code", to_string(f.code)}, {"message", f.message}});
      }
      nlohmann::json alloc = nlohmann::json::object();
      for (const auto& [topic, sizes] : r.allocations) alloc[topic] = sizes_json(sizes);
      runs.push_back({{"seed", r.seed}, {"report", r.report.to_json()}, {"failures", failures}, {"allocations", alloc}});
    }
    cells_j.push_back({{"scheme", to_string(c.scheme)},
                       {"stages", c.stages},
                       {"map_mean", c.map_mean},
                       {"map_std", c.map_std},
                       {"per_topic_mean", c.per_topic_mean.to_json()},
                       {"runs", runs}});
  }
  return {{"topics", topics}, {"cells", cells_j}};
}

SweepResult run_all(const Corpus& corpus, const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (corpus.topic_ids().size() < 2) raise(ErrorCode::kInvalidArgument, "leave-one-topic-out needs at least 2 topics");

  SweepResult sweep;
  sweep.topics = corpus.topic_ids();
  for (Scheme s : cfg.schemes) {
    if (s == Scheme::kBaselineSingleStage) {
      sweep.cells.push_back({s, 1, {}, 0.0, 0.0, {}});
    } else {
      for (int n : cfg.stage_counts) sweep.cells.push_back({s, n, {}, 0.0, 0.0, {}});
    }
  }

  struct Task {
    std::size_t cell, seed, topic;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      for (std::size_t t = 0; t < sweep.topics.size(); ++t) tasks.push_back({c, s, t});
    }
  }
  struct Outcome {
    std::optional<TopicRun> run;
    std::optional<TopicFailure> failure;
  };
  std::vector<Outcome> outcomes(tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex abort_mu;
  std::optional<Error> abort_error;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const SweepCell& cell = sweep.cells[task.cell];
      const std::uint64_t seed = cfg.seeds[task.seed];
      const std::string& topic = sweep.topics[task.topic];
      try {
        outcomes[i].run = run_topic(corpus, topic, cell.scheme, cell.stages, seed, cfg, options.hooks);
      } catch (const Error& e) {
        outcomes[i].failure = TopicFailure{topic, seed, e.code(), e.what()};
        if (aborts_sweep(e.code()) || options.strict) {
          std::lock_guard lock(abort_mu);
          if (!abort_error) {
            abort_error = aborts_sweep(e.code()) ? e : Error(ErrorCode::kTopicFailure, std::string("TopicFailure: ") + e.what());
          }
          abort = true;
        }
      } catch (const std::exception& e) {
        outcomes[i].failure = TopicFailure{topic, seed, ErrorCode::kInvalidArgument, e.what()};
        if (options.strict) {
          std::lock_guard lock(abort_mu);
          if (!abort_error) abort_error = Error(ErrorCode::kTopicFailure, std::string("TopicFailure: ") + e.what());
          abort = true;
        }
      }
    }
  };
  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (abort_error) throw *abort_error;

  // Deterministic reduction in task order.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t i = 0;
  for (SweepCell& cell : sweep.cells) {
    std::map<std::string, std::vector<TopicResult>> by_topic;
    for (const std::uint64_t seed : cfg.seeds) {
      SeedRun run;
      run.seed = seed;
      run.report.scheme = std::string(to_string(cell.scheme));
      run.report.stages = cell.stages;
      run.report.fingerprint = {{"seed", seed},
                                {"budget", cfg.budget},
                                {"min_test", cfg.min_test},
                                {"ap_denominator", to_string(cfg.ap_denominator)},
                                {"trainer", cfg.trainer.to_json()}};
      for (std::size_t t = 0; t < sweep.topics.size(); ++t, ++i) {
        Outcome& o = outcomes[i];
        if (o.run) {
          run.report.per_topic.push_back(o.run->result);
          run.allocations.emplace_back(sweep.topics[t], o.run->sizes);
          by_topic[sweep.topics[t]].push_back(o.run->result);
        } else if (o.failure) {
          run.failures.push_back(*o.failure);
        }
      }
      run.report.map = run.report.per_topic.empty() ? nan : mean_average_precision(run.report.per_topic);
      cell.runs.push_back(std::move(run));
    }

    std::vector<double> maps;
    for (const SeedRun& r : cell.runs) {
      if (!r.report.per_topic.empty()) maps.push_back(r.report.map);
    }
    if (maps.empty()) {
      cell.map_mean = nan;
      cell.map_std = nan;
    } else {
      double sum = 0.0;
      for (double m : maps) sum += m;
      cell.map_mean = sum / static_cast<double>(maps.size());
      double ss = 0.0;
      for (double m : maps) ss += (m - cell.map_mean) * (m - cell.map_mean);
      cell.map_std = maps.size() > 1 ? std::sqrt(ss / static_cast<double>(maps.size() - 1)) : 0.0;
    }

    cell.per_topic_mean.scheme = std::string(to_string(cell.scheme));
    cell.per_topic_mean.stages = cell.stages;
    cell.per_topic_mean.fingerprint = {{"seeds", cfg.seeds},
                                       {"budget", cfg.budget},
                                       {"min_test", cfg.min_test},
                                       {"ap_denominator", to_string(cfg.ap_denominator)},
                                       {"trainer", cfg.trainer.to_json()}};
    for (const std::string& topic : sweep.topics) {
      auto it = by_topic.find(topic);
      if (it == by_topic.end()) continue;
      TopicResult mean = it->second.front();
      double s = 0.0;
      for (const TopicResult& r : it->second) s += r.avep;
      mean.avep = s / static_cast<double>(it->second.size());
      cell.per_topic_mean.per_topic.push_back(mean);
    }
    cell.per_topic_mean.map = cell.per_topic_mean.per_topic.empty()
                                  ? nan
                                  : mean_average_precision(cell.per_topic_mean.per_topic);
  }
  return sweep;
}

namespace {

std::string cell_value(const SweepCell* c, int decimals) {
  if (c == nullptr || std::isnan(c->map_mean)) return "";
  return fmt::format("{:.{}f}", c->map_mean, decimals);
}

std::string cell_std(const SweepCell* c) {
  if (c == nullptr || std::isnan(c->map_std)) return "";
  return fmt::format("{:.6f}", c->map_std);
}

std::vector<Scheme> gradual_rows(const SweepResult& sweep) {
  std::vector<Scheme> rows;
  for (const SweepCell& c : sweep.cells) {
    if (c.scheme != Scheme::kBaselineSingleStage && std::find(rows.begin(), rows.end(), c.scheme) == rows.end()) {
      rows.push_back(c.scheme);
    }
  }
  if (rows.empty()) rows.push_back(Scheme::kBaselineSingleStage);
  return rows;
}

std::vector<int> stage_columns(const SweepResult& sweep) {
  std::vector<int> cols;
  for (const SweepCell& c : sweep.cells) {
    if (c.scheme != Scheme::kBaselineSingleStage && std::find(cols.begin(), cols.end(), c.stages) == cols.end()) {
      cols.push_back(c.stages);
    }
  }
  return cols;
}

}  // namespace

std::string render_sweep_csv(const SweepResult& sweep) {
  const SweepCell* baseline = sweep.find(Scheme::kBaselineSingleStage, 1);
  const std::vector<int> cols = stage_columns(sweep);
  std::string out = "scheme,baseline,baseline_std";
  for (int s : cols) out += fmt::format(",s{},s{}_std", s, s);
  out += "\n";
  for (Scheme row : gradual_rows(sweep)) {
    out += fmt::format("{},{},{}", to_string(row), cell_value(baseline, 6), cell_std(baseline));
    for (int s : cols) {
      const SweepCell* c = row == Scheme::kBaselineSingleStage ? nullptr : sweep.find(row, s);
      out += fmt::format(",{},{}", cell_value(c, 6), cell_std(c));
    }
    out += "\n";
  }
  return out;
}

std::string render_sweep_table(const SweepResult& sweep) {
  const SweepCell* baseline = sweep.find(Scheme::kBaselineSingleStage, 1);
  const std::vector<int> cols = stage_columns(sweep);
  std::string out = fmt::format("{:<14}  {:>8}", "Scheme", "Baseline");
  for (int s : cols) out += fmt::format("  {:>8}", fmt::format("s{}", s));
  out += "\n";
  for (Scheme row : gradual_rows(sweep)) {
    const std::string b = cell_value(baseline, 4);
    out += fmt::format("{:<14}  {:>8}", to_string(row), b.empty() ? "-" : b);
    for (int s : cols) {
      const std::string v = cell_value(row == Scheme::kBaselineSingleStage ? nullptr : sweep.find(row, s), 4);
      out += fmt::format("  {:>8}", v.empty() ? "-" : v);
    }
    out += "\n";
  }
  return out;
}

void write_outputs(const SweepResult& sweep, const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(ErrorCode::kIo, "cannot create output directory '" + out_dir.string() + "': " + ec.message());

  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) raise(ErrorCode::kIo, "cannot write '" + (out_dir / name).string() + "'");
    out << content;
  };
  write("sweep.csv", render_sweep_csv(sweep));
  for (const SweepCell& c : sweep.cells) {
    write("per_topic_" + cell_label(c.scheme, c.stages) + ".csv", emit_report(c.per_topic_mean, ReportFormat::kCsv));
  }
  nlohmann::json run = {{"config", cfg.to_json()}, {"seeds", cfg.seeds}, {"sweep", sweep.to_json()}};
  write("run.json", run.dump(2) + "\n");
}

Comparison compare(const RunReport& baseline, const RunReport& candidate) {
  std::map<std::string, double> cand;
  for (const TopicResult& r : candidate.per_topic) cand[r.topic_id] = r.avep;
  std::set<std::string> base_ids;
  for (const TopicResult& r : baseline.per_topic) base_ids.insert(r.topic_id);
  std::set<std::string> cand_ids;
  for (const auto& [id, v] : cand) cand_ids.insert(id);
  if (base_ids != cand_ids || base_ids.size() != baseline.per_topic.size() ||
      cand_ids.size() != candidate.per_topic.size()) {
    raise(ErrorCode::kTopicSetMismatch, "baseline and candidate reports cover different topics");
  }
  if (baseline.per_topic.empty()) raise(ErrorCode::kEmptyResults, "reports have no topics");

  Comparison cmp;
  double sum = 0.0;
  for (const TopicResult& r : baseline.per_topic) {
    TopicDelta d;
    d.topic_id = r.topic_id;
    d.baseline = r.avep;
    d.candidate = cand[r.topic_id];
    d.delta = d.candidate - d.baseline;
    d.points = std::lround(100.0 * d.delta);
    sum += d.delta;
    cmp.topics.push_back(d);
  }
  cmp.baseline_map = mean_average_precision(baseline.per_topic);
  cmp.candidate_map = mean_average_precision(candidate.per_topic);
  cmp.mean_delta = sum / static_cast<double>(cmp.topics.size());
  cmp.mean_points = std::lround(100.0 * cmp.mean_delta);
  return cmp;
}

std::string Comparison::render(ReportFormat format) const {
  if (format == ReportFormat::kJson) {
    nlohmann::json topics_j = nlohmann::json::array();
    for (const TopicDelta& d : topics) {
      topics_j.push_back({{"topic_id", d.topic_id},
                          {"baseline", d.baseline},
                          {"candidate", d.candidate},
                          {"delta", d.delta},
                          {"points", d.points}});
    }
    nlohmann::json j = {{"topics", topics_j},
                        {"baseline_map", baseline_map},
                        {"candidate_map", candidate_map},
                        {"mean_delta", mean_delta},
                        {"mean_points", mean_points}};
    return j.dump(2) + "\n";
  }
  if (format == ReportFormat::kCsv) {
    std::string out = "topic_id,baseline,candidate,delta,points\n";
    for (const TopicDelta& d : topics) {
      out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", d.topic_id, d.baseline, d.candidate, d.delta, d.points);
    }
    out += fmt::format("Average,{:.6f},{:.6f},{:.6f},{}\n", baseline_map, candidate_map, mean_delta, mean_points);
    return out;
  }
  std::size_t width = std::string_view("Average").size();
  for (const TopicDelta& d : topics) width = std::max(width, d.topic_id.size());
  std::string out = fmt::format("{:<{}}  {:>8}  {:>9}  {:>5}\n", "Topic", width, "Baseline", "Candidate", "Imp.");
  for (const TopicDelta& d : topics) {
    out += fmt::format("{:<{}}  {:>8}  {:>9}  {:>5}\n", d.topic_id, width, format_score(d.baseline),
                       format_score(d.candidate), fmt::format("{}%", d.points));
  }
  out += fmt::format("{:<{}}  {:>8}  {:>9}  {:>5}\n", "Average", width, format_score(baseline_map),
                     format_score(candidate_map), fmt::format("{}%", mean_points));
  return out;
}

}  // namespace topicforge
