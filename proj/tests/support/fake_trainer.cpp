// Stand-in external trainer for the protocol tests. By default it mirrors
// the built-in trainer; flags inject the failure modes the client must
// survive.
//
//   --fail-init          reply ok:false to init
//   --exit-on-init       close the stream without replying
//   --error-on CMD       reply ok:false to CMD
//   --garbage-on CMD     reply with a non-JSON line to CMD
//   --short-scores       return one score too few
//   --log FILE           append every request line to FILE

#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "json.hpp"
#include "topicforge/trainer.hpp"

namespace tf = topicforge;

int main(int argc, char** argv) {
  bool fail_init = false, exit_on_init = false, short_scores = false;
  std::string error_on, garbage_on, log_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--fail-init") fail_init = true;
    else if (a == "--exit-on-init") exit_on_init = true;
    else if (a == "--short-scores") short_scores = true;
    else if (a == "--error-on" && i + 1 < argc) error_on = argv[++i];
    else if (a == "--garbage-on" && i + 1 < argc) garbage_on = argv[++i];
    else if (a == "--log" && i + 1 < argc) log_path = argv[++i];
  }
  std::ofstream log;
  if (!log_path.empty()) log.open(log_path, std::ios::app);

  std::unique_ptr<tf::BuiltinTrainer> model;
  tf::TrainerConfig cfg;
  std::string line;
  auto reply = [](const nlohmann::json& j) { std::cout << j.dump() << '\n' << std::flush; };
  auto fail = [&](const std::string& why) { reply({{"ok", false}, {"error", why}}); };

  while (std::getline(std::cin, line)) {
    if (log.is_open()) log << line << '\n' << std::flush;
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail("malformed request");
      continue;
    }
    const std::string cmd = req.value("cmd", "");
    if (cmd == garbage_on) {
      std::cout << "this is not json\n" << std::flush;
      continue;
    }
    if (cmd == error_on) {
      fail("injected failure on " + cmd);
      continue;
    }
    try {
      if (cmd == "init") {
        if (exit_on_init) return 3;
        if (fail_init) {
          fail("refusing to start");
          continue;
        }
        cfg = tf::TrainerConfig::from_json(req.at("config"));
        cfg.seed = req.at("seed").get<std::uint64_t>();
        model = std::make_unique<tf::BuiltinTrainer>(cfg);
        reply({{"ok", true}, {"name", "fake-mirror"}});
      } else if (!model) {
        fail("not initialized");
      } else if (cmd == "train_stage") {
        std::vector<tf::TrainExample> batch;
        for (const auto& ex : req.at("examples")) {
          batch.push_back({ex.at("text").get<std::string>(),
                           ex.at("label").get<int>() == 1 ? tf::Label::kCheckWorthy : tf::Label::kNotCheckWorthy});
        }
        model->train_stage(batch);
        reply({{"ok", true}});
      } else if (cmd == "score") {
        const auto texts = req.at("texts").get<std::vector<std::string>>();
        std::vector<double> scores = model->score(texts);
        if (short_scores && !scores.empty()) scores.pop_back();
        reply({{"ok", true}, {"scores", scores}});
      } else if (cmd == "reset") {
        model->reset();
        reply({{"ok", true}});
      } else if (cmd == "shutdown") {
        reply({{"ok", true}});
        return 0;
      } else {
        fail("unknown cmd '" + cmd + "'");
      }
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  return 1;
}
