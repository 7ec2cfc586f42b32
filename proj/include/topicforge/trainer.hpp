#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topicforge/corpus.hpp"

namespace topicforge {

struct TrainExample {
  std::string text;
  Label label = Label::kNotCheckWorthy;
};

enum class TrainerKind { kBuiltin, kExternal };

struct TrainerConfig {
  TrainerKind kind = TrainerKind::kBuiltin;
  std::size_t hash_dim = std::size_t{1} << 18;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs_per_stage = 3;
  std::uint64_t seed = 0;
  std::optional<std::string> external_cmd;

  // Throws kInvalidArgument.
  void validate() const;

  static TrainerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Stateful incremental model. State carries over between train_stage calls
// (warm start); reset() returns to the freshly initialized model. Not safe
// for concurrent mutation.
class Trainer {
 public:
  virtual ~Trainer() = default;

  // Throws kEmptyStage for an empty batch.
  virtual void train_stage(std::span<const TrainExample> examples) = 0;

  // One probability of check-worthiness per text, in input order. Does not
  // change the model.
  virtual std::vector<double> score(std::span<const std::string> texts) = 0;

  virtual void reset() = 0;
  virtual int stage_counter() const = 0;
  virtual std::string name() const = 0;
};

// Throws kSpawnFailure / kHandshakeFailure for external trainers.
std::unique_ptr<Trainer> make_trainer(const TrainerConfig& cfg);

// Hashed bag-of-words logistic regression trained by SGD.
//
// Features: for each whitespace token t, h = FNV-1a-64(t); bucket
// h & (hash_dim - 1) receives +1 if the top bit of h is clear and -1 if set.
// Each stage shuffles its batch once with SplitMix64 seeded by
// mix_seed(seed, stage_counter) and then makes epochs_per_stage passes.
// Per example, with p = sigmoid(w.x + b):
//   w <- w - lr * ((p - y) x + l2 w),   b <- b - lr * (p - y).
class BuiltinTrainer final : public Trainer {
 public:
  explicit BuiltinTrainer(const TrainerConfig& cfg);

  void train_stage(std::span<const TrainExample> examples) override;
  std::vector<double> score(std::span<const std::string> texts) override;
  void reset() override;
  int stage_counter() const override { return stage_counter_; }
  std::string name() const override { return "builtin-hashed-logreg"; }

  double score_one(std::string_view text) const;
  // Materialized weights (the internal scale folded in).
  std::vector<double> weights() const;
  double bias() const { return bias_; }

 private:
  TrainerConfig cfg_;
  std::vector<double> raw_;  // weights are scale_ * raw_
  double scale_ = 1.0;
  double bias_ = 0.0;
  int stage_counter_ = 0;
};

// Child process speaking newline-delimited JSON over stdin/stdout. See
// README for the message set.
class ExternalTrainer final : public Trainer {
 public:
  explicit ExternalTrainer(const TrainerConfig& cfg);
  ~ExternalTrainer() override;
  ExternalTrainer(const ExternalTrainer&) = delete;
  ExternalTrainer& operator=(const ExternalTrainer&) = delete;

  void train_stage(std::span<const TrainExample> examples) override;
  std::vector<double> score(std::span<const std::string> texts) override;
  void reset() override;
  int stage_counter() const override { return stage_counter_; }
  std::string name() const override { return name_; }

  // Sends shutdown and reaps the child. Idempotent.
  void shutdown();

 private:
  nlohmann::json request(const nlohmann::json& msg);

  class Process;
  std::unique_ptr<Process> process_;
  TrainerConfig cfg_;
  std::string name_;
  int stage_counter_ = 0;
};

namespace logistic {

using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

// Sorted by bucket, duplicates summed, zero entries dropped.
SparseFeatures hashed_features(std::string_view text, std::size_t hash_dim);

double sigmoid(double z);

// Per-example objective: log-loss + (l2 / 2) ||w||^2 (no penalty on the bias).
double loss(std::span<const double> w, double b, std::span<const double> x, int y, double l2);

// Gradient of loss() w.r.t. w (into grad_w) and b (returned).
double gradient(std::span<const double> w, double b, std::span<const double> x, int y, double l2,
                std::span<double> grad_w);

}  // namespace logistic

}  // namespace topicforge
