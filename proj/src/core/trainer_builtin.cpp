#include <algorithm>
#include <cmath>
#include <iostream>

#include "topicforge/error.hpp"
#include "topicforge/rng.hpp"
#include "topicforge/trainer.hpp"

namespace topicforge {

void TrainerConfig::validate() const {
  auto bad = [](const std::string& why) { raise(ErrorCode::kInvalidArgument, "trainer config: " + why); };
  if (hash_dim < 256 || (hash_dim & (hash_dim - 1)) != 0) bad("hash_dim must be a power of two >= 256");
  if (hash_dim > (std::size_t{1} << 32)) bad("hash_dim must fit 32-bit bucket indices");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) bad("l2 must be non-negative");
  if (learning_rate * l2 >= 1.0) bad("learning_rate * l2 must be below 1");
  if (epochs_per_stage < 1) bad("epochs_per_stage must be positive");
  if ((kind == TrainerKind::kExternal) != external_cmd.has_value()) {
    bad("external_cmd must be set exactly when kind is external");
  }
  if (external_cmd && external_cmd->find_first_not_of(" \t") == std::string::npos) bad("external_cmd is empty");
}

TrainerConfig TrainerConfig::from_json(const nlohmann::json& j) {
  TrainerConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      const auto k = value.get<std::string>();
      if (k == "builtin") cfg.kind = TrainerKind::kBuiltin;
      else if (k == "external") cfg.kind = TrainerKind::kExternal;
      else raise(ErrorCode::kConfig, "trainer kind must be builtin or external, got '" + k + "'");
    } else if (key == "hash_dim") cfg.hash_dim = value.get<std::size_t>();
    else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
    else if (key == "l2") cfg.l2 = value.get<double>();
    else if (key == "epochs_per_stage") cfg.epochs_per_stage = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "external_cmd") {
      if (!value.is_null()) cfg.external_cmd = value.get<std::string>();
    } else {
      raise(ErrorCode::kConfig, "unknown trainer key '" + key + "'");
    }
  }
  return cfg;
}

nlohmann::json TrainerConfig::to_json() const {
  nlohmann::json j = {{"kind", kind == TrainerKind::kBuiltin ? "builtin" : "external"},
                      {"hash_dim", hash_dim},
                      {"learning_rate", learning_rate},
                      {"l2", l2},
                      {"epochs_per_stage", epochs_per_stage},
                      {"seed", seed}};
  j["external_cmd"] = external_cmd ? nlohmann::json(*external_cmd) : nlohmann::json(nullptr);
  return j;
}

std::unique_ptr<Trainer> make_trainer(const TrainerConfig& cfg) {
  cfg.validate();
  if (cfg.kind == TrainerKind::kExternal) return std::make_unique<ExternalTrainer>(cfg);
  return std::make_unique<BuiltinTrainer>(cfg);
}

namespace logistic {

SparseFeatures hashed_features(std::string_view text, std::size_t hash_dim) {
  SparseFeatures f;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) {
      const std::uint64_t h = fnv1a64(text.substr(i, j - i));
      const auto bucket = static_cast<std::uint32_t>(h & (hash_dim - 1));
      f.emplace_back(bucket, (h >> 63) != 0 ? -1.0 : 1.0);
    }
    i = j;
  }
  std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseFeatures merged;
  for (const auto& [bucket, v] : f) {
    if (!merged.empty() && merged.back().first == bucket) {
      merged.back().second += v;
    } else {
      merged.emplace_back(bucket, v);
    }
  }
  std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
  return merged;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double loss(std::span<const double> w, double b, std::span<const double> x, int y, double l2) {
  const double z = dot(w, x) + b;
  // -[y log p + (1 - y) log(1 - p)] = softplus(z) - y z
  double reg = 0.0;
  for (double wi : w) reg += wi * wi;
  return softplus(z) - static_cast<double>(y) * z + 0.5 * l2 * reg;
}

double gradient(std::span<const double> w, double b, std::span<const double> x, int y, double l2,
                std::span<double> grad_w) {
  const double g = sigmoid(dot(w, x) + b) - static_cast<double>(y);
  for (std::size_t i = 0; i < w.size(); ++i) grad_w[i] = g * x[i] + l2 * w[i];
  return g;
}

}  // namespace logistic

BuiltinTrainer::BuiltinTrainer(const TrainerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  raw_.assign(cfg_.hash_dim, 0.0);
}

void BuiltinTrainer::reset() {
  std::fill(raw_.begin(), raw_.end(), 0.0);
  scale_ = 1.0;
  bias_ = 0.0;
  stage_counter_ = 0;
}

std::vector<double> BuiltinTrainer::weights() const {
  std::vector<double> w(raw_.size());
  for (std::size_t i = 0; i < raw_.size(); ++i) w[i] = raw_[i] * scale_;
  return w;
}

double BuiltinTrainer::score_one(std::string_view text) const {
  double z = bias_;
  for (const auto& [bucket, v] : logistic::hashed_features(text, cfg_.hash_dim)) z += scale_ * raw_[bucket] * v;
  const double p = logistic::sigmoid(z);
  if (!std::isfinite(p)) return 0.5;
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> BuiltinTrainer::score(std::span<const std::string> texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(score_one(t));
  return out;
}

void BuiltinTrainer::train_stage(std::span<const TrainExample> examples) {
  if (examples.empty()) raise(ErrorCode::kEmptyStage, "stage " + std::to_string(stage_counter_ + 1) + " has no examples");

  struct Prepared {
    logistic::SparseFeatures x;
    double y;
  };
  std::vector<Prepared> batch;
  batch.reserve(examples.size());
  for (const TrainExample& ex : examples) {
    if (ex.text.empty()) {
      std::cerr << "warning: dropping training example with empty text\n";
      continue;
    }
    batch.push_back({logistic::hashed_features(ex.text, cfg_.hash_dim), static_cast<double>(label_value(ex.label))});
  }
  if (batch.empty()) raise(ErrorCode::kEmptyStage, "every example in the stage has empty text");
  shuffle(std::span<Prepared>(batch), mix_seed(cfg_.seed, static_cast<std::uint64_t>(stage_counter_)));

  // w = scale_ * raw_, so the dense L2 shrink is a scalar update and each
  // step only touches the example's own buckets.
  const double lr = cfg_.learning_rate;
  const double decay = 1.0 - lr * cfg_.l2;
  for (int epoch = 0; epoch < cfg_.epochs_per_stage; ++epoch) {
    for (const Prepared& ex : batch) {
      double z = bias_;
      for (const auto& [bucket, v] : ex.x) z += scale_ * raw_[bucket] * v;
      const double g = logistic::sigmoid(z) - ex.y;
      scale_ *= decay;
      if (scale_ < 1e-9) {
        for (double& r : raw_) r *= scale_;
        scale_ = 1.0;
      }
      const double step = lr * g / scale_;
      for (const auto& [bucket, v] : ex.x) raw_[bucket] -= step * v;
      bias_ -= lr * g;
    }
  }
  ++stage_counter_;
}

}  // namespace topicforge
