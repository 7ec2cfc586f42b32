#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "topicforge/error.hpp"
#include "topicforge/evaluation.hpp"

namespace topicforge {
namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_score(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos) {
    raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": bad score '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<std::pair<std::string, double>> load_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIo, "cannot open scores file '" + path.string() + "'");
  const std::string ext = path.extension().string();
  std::vector<std::pair<std::string, double>> scores;
  std::set<std::string> seen;
  auto add = [&](std::string id, double v, std::size_t line) {
    if (!seen.insert(id).second) {
      raise(ErrorCode::kDuplicateId, "line " + std::to_string(line) + ": claim '" + id + "' scored twice");
    }
    scores.emplace_back(std::move(id), v);
  };

  std::string line;
  std::size_t line_no = 0;
  if (ext == ".csv" || ext == ".tsv") {
    const char delim = ext == ".csv" ? ',' : '\t';
    std::size_t id_col = 0, score_col = 0, width = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> f = split(line, delim);
      if (!header) {
        if (!f.empty() && f[0].rfind("\xEF\xBB\xBF", 0) == 0) f[0].erase(0, 3);
        auto col = [&](std::initializer_list<const char*> names) {
          for (std::size_t i = 0; i < f.size(); ++i) {
            for (const char* n : names) {
              if (f[i] == n) return i;
            }
          }
          raise(ErrorCode::kMalformedRecord, "line 1: scores header needs columns id and score");
        };
        id_col = col({"id", "claim_id"});
        score_col = col({"score"});
        width = f.size();
        header = true;
        continue;
      }
      if (f.size() != width) {
        raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(width) + " fields");
      }
      add(f[id_col], parse_score(f[score_col], line_no), line_no);
    }
    return scores;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    const char* id_key = rec.contains("id") ? "id" : "claim_id";
    if (!rec.is_object() || !rec.contains(id_key) || !rec.contains("score") || !rec["score"].is_number()) {
      raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": need fields id and score");
    }
    const auto& id = rec[id_key];
    add(id.is_string() ? id.get<std::string>() : id.dump(), rec["score"].get<double>(), line_no);
  }
  return scores;
}

ScoredEvaluation evaluate_scores(const Corpus& labels, std::span<const std::pair<std::string, double>> scores,
                                 ApDenominator denom) {
  std::map<std::string, std::pair<std::vector<Claim>, std::vector<double>>> by_topic;
  for (const auto& [id, score] : scores) {
    const Claim* c = labels.find(id);
    if (c == nullptr) raise(ErrorCode::kInvalidArgument, "scored claim '" + id + "' has no label");
    auto& group = by_topic[c->topic_id];
    group.first.push_back(*c);
    group.second.push_back(score);
  }

  ScoredEvaluation out;
  out.report.scheme = "scores";
  out.report.fingerprint = {{"ap_denominator", to_string(denom)}};
  for (const std::string& topic : labels.topic_ids()) {
    auto it = by_topic.find(topic);
    if (it == by_topic.end()) continue;
    const auto& [claims, values] = it->second;
    const RankedList ranked = rank(claims, values);
    TopicResult r;
    r.topic_id = topic;
    r.n_test = claims.size();
    for (const Claim& c : claims) r.n_relevant += c.check_worthy() ? 1 : 0;
    if (r.n_relevant == 0) {
      out.skipped_topics.push_back(topic);
      continue;
    }
    r.avep = average_precision(ranked, denom);
    out.report.per_topic.push_back(r);
  }
  out.report.map = mean_average_precision(out.report.per_topic);
  return out;
}

}  // namespace topicforge

namespace topicforge {

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIo, "cannot open report '" + path.string() + "'");
  if (path.extension() != ".csv") {
    try {
      return RunReport::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::kMalformedRecord, "report '" + path.string() + "': " + e.what());
    }
  }
  RunReport r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "topic_id,avep,n_test,n_relevant") {
        raise(ErrorCode::kMalformedRecord, "line 1: expected topic_id,avep,n_test,n_relevant");
      }
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 4) raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": expected 4 fields");
    if (f[0] == "MAP") continue;
    try {
      r.per_topic.push_back({f[0], parse_score(f[1], line_no), std::stoul(f[2]), std::stoul(f[3])});
    } catch (const std::logic_error&) {
      raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": bad count");
    }
  }
  if (!r.per_topic.empty()) r.map = mean_average_precision(r.per_topic);
  return r;
}

}  // namespace topicforge
