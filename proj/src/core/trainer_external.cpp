#include <fcntl.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "topicforge/error.hpp"
#include "topicforge/trainer.hpp"

namespace topicforge {
namespace {

// Whitespace split with single/double quotes and backslash escapes, enough
// for "python3 -u adapter.py --flag 'a b'".
std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> args;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    const char c = cmd[i];
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < cmd.size()) {
        cur.push_back(cmd[++i]);
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == '\\' && i + 1 < cmd.size()) {
      cur.push_back(cmd[++i]);
      have = true;
    } else if (c == ' ' || c == '\t') {
      if (have) args.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (quote != 0) raise(ErrorCode::kSpawnFailure, "unterminated quote in external_cmd");
  if (have) args.push_back(std::move(cur));
  return args;
}

}  // namespace

// Child connected through one socketpair used as both stdin and stdout.
// Writes use MSG_NOSIGNAL, so a dead child surfaces as an error instead of
// SIGPIPE.
class ExternalTrainer::Process {
 public:
  explicit Process(const std::string& command) {
    const std::vector<std::string> args = split_command(command);
    if (args.empty()) raise(ErrorCode::kSpawnFailure, "empty external_cmd");

    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
      raise(ErrorCode::kSpawnFailure, std::string("socketpair: ") + std::strerror(errno));
    }
    // exec failures travel back over this pipe; a clean exec closes it.
    int status_pipe[2];
    if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      raise(ErrorCode::kSpawnFailure, std::string("pipe: ") + std::strerror(errno));
    }

    std::vector<char*> argv;
    for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      ::close(status_pipe[0]);
      ::close(status_pipe[1]);
      raise(ErrorCode::kSpawnFailure, std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::execvp(argv[0], argv.data());
      const int err = errno;
      [[maybe_unused]] ssize_t n = ::write(status_pipe[1], &err, sizeof err);
      ::_exit(127);
    }
    ::close(sv[1]);
    ::close(status_pipe[1]);
    fd_ = sv[0];
    pid_ = pid;

    int child_errno = 0;
    ssize_t n;
    do {
      n = ::read(status_pipe[0], &child_errno, sizeof child_errno);
    } while (n < 0 && errno == EINTR);
    ::close(status_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
      reap(true);
      raise(ErrorCode::kSpawnFailure, "cannot execute '" + args[0] + "': " + std::strerror(child_errno));
    }
  }

  ~Process() { reap(false); }

  void write_line(const std::string& line) {
    std::string data = line;
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        raise(ErrorCode::kProtocol, std::string("write to external trainer failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // Returns false on EOF.
  bool read_line(std::string& line) {
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      char chunk[65536];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        raise(ErrorCode::kProtocol, std::string("read from external trainer failed: ") + std::strerror(errno));
      }
      if (n == 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Waits up to ~2 s for a clean exit, then SIGKILL.
  void reap(bool force) {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
    if (pid_ <= 0) return;
    if (force) ::kill(pid_, SIGKILL);
    for (int i = 0; i < 200; ++i) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

 private:
  int fd_ = -1;
  pid_t pid_ = -1;
  std::string buffer_;
};

ExternalTrainer::ExternalTrainer(const TrainerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (!cfg_.external_cmd) raise(ErrorCode::kSpawnFailure, "no external_cmd configured");
  process_ = std::make_unique<Process>(*cfg_.external_cmd);

  nlohmann::json config = cfg_.to_json();
  config.erase("external_cmd");
  config.erase("kind");
  const nlohmann::json hello = {{"cmd", "init"}, {"config", config}, {"seed", cfg_.seed}, {"protocol", 1}};
  try {
    const nlohmann::json reply = request(hello);
    if (reply.contains("name") && reply["name"].is_string()) name_ = reply["name"].get<std::string>();
  } catch (const Error& e) {
    process_->reap(true);
    throw Error(ErrorCode::kHandshakeFailure, std::string("HandshakeFailure: ") + e.what());
  }
  if (name_.empty()) name_ = "external";
}

ExternalTrainer::~ExternalTrainer() {
  try {
    shutdown();
  } catch (...) {
  }
}

void ExternalTrainer::shutdown() {
  if (!process_) return;
  try {
    request({{"cmd", "shutdown"}});
  } catch (const Error&) {
    process_->reap(true);
    process_.reset();
    return;
  }
  process_->reap(false);
  process_.reset();
}

nlohmann::json ExternalTrainer::request(const nlohmann::json& msg) {
  if (!process_) raise(ErrorCode::kProtocol, "external trainer already shut down");
  const std::string cmd = msg.value("cmd", "");
  process_->write_line(msg.dump());
  std::string line;
  if (!process_->read_line(line)) raise(ErrorCode::kProtocol, "external trainer closed the stream during '" + cmd + "'");
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    raise(ErrorCode::kProtocol, "unparseable reply to '" + cmd + "': " + line.substr(0, 200));
  }
  if (!reply.is_object() || !reply.contains("ok") || !reply["ok"].is_boolean()) {
    raise(ErrorCode::kProtocol, "reply to '" + cmd + "' lacks a boolean 'ok'");
  }
  if (!reply["ok"].get<bool>()) {
    const std::string err = reply.contains("error") && reply["error"].is_string() ? reply["error"].get<std::string>()
                                                                                   : std::string("unspecified");
    raise(ErrorCode::kProtocol, "external trainer rejected '" + cmd + "': " + err);
  }
  return reply;
}

void ExternalTrainer::train_stage(std::span<const TrainExample> examples) {
  if (examples.empty()) raise(ErrorCode::kEmptyStage, "stage " + std::to_string(stage_counter_ + 1) + " has no examples");
  nlohmann::json batch = nlohmann::json::array();
  for (const TrainExample& ex : examples) batch.push_back({{"text", ex.text}, {"label", label_value(ex.label)}});
  request({{"cmd", "train_stage"}, {"stage", stage_counter_ + 1}, {"examples", std::move(batch)}});
  ++stage_counter_;
}

std::vector<double> ExternalTrainer::score(std::span<const std::string> texts) {
  const nlohmann::json reply = request({{"cmd", "score"}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}});
  if (!reply.contains("scores") || !reply["scores"].is_array()) raise(ErrorCode::kProtocol, "score reply has no 'scores' array");
  const auto& arr = reply["scores"];
  if (arr.size() != texts.size()) {
    raise(ErrorCode::kProtocol, "score reply has " + std::to_string(arr.size()) + " values for " +
                                    std::to_string(texts.size()) + " texts");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) raise(ErrorCode::kProtocol, "non-numeric score");
    const double p = v.get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) raise(ErrorCode::kProtocol, "score outside [0,1]: " + v.dump());
    out.push_back(p);
  }
  return out;
}

void ExternalTrainer::reset() {
  request({{"cmd", "reset"}});
  stage_counter_ = 0;
}

}  // namespace topicforge
