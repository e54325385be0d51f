#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tracelens/miners.hpp"
#include "tracelens/model.hpp"

namespace httplib {
class Server;
}

namespace tracelens::server {

// File-backed workspace:
//   symbols.manifest, configs/<name>.cfg.json, traces/<id>.trc,
//   models/<id>.model.json, jobs/<id>.json
// Every method is safe to call concurrently.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  nlohmann::ordered_json symbols() const;

  struct Versioned {
    std::string text;
    std::string etag;
  };
  Versioned get_config(const std::string& name) const;
  // `if_match` empty means unconditional. Returns the stored document and
  // whether it was newly created.
  std::pair<Versioned, bool> put_config(const std::string& name, const std::string& body,
                                        const std::string& if_match);

  nlohmann::ordered_json list_traces() const;
  nlohmann::ordered_json run_demo(const nlohmann::json& request);

  // Returns {"id", "states", "transitions", "warnings"}.
  nlohmann::ordered_json abstract(const nlohmann::json& request);

  std::string model_text(const std::string& id) const;
  std::string model_dot(const std::string& id, const std::string& highlight) const;
  nlohmann::ordered_json zoom(const std::string& id, const std::string& state) const;
  nlohmann::ordered_json diff(const std::string& a, const std::string& b) const;
  nlohmann::ordered_json exam(const std::string& id, const std::string& state,
                              const std::string& order) const;

  // Mining is split so the job pool can run the expensive middle part
  // without holding the workspace lock.
  struct MineRequest {
    MinerParams params;
    std::vector<std::string> traces;
    std::string config;  // empty: every field and function of each trace
  };
  MineRequest parse_mine_request(const nlohmann::json& request) const;
  nlohmann::ordered_json run_mine(const MineRequest& request);

  void save_job(const std::string& id, const nlohmann::ordered_json& status);
  nlohmann::ordered_json load_job(const std::string& id) const;
  std::size_t job_count() const;

  // Content-addressed id for a serialized model.
  static std::string model_id(const std::string& text);

 private:
  std::filesystem::path config_path(const std::string& name) const;
  std::filesystem::path trace_path(const std::string& id) const;
  std::filesystem::path model_path(const std::string& id) const;
  std::string store_model(const std::string& text);

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

struct ServerOptions {
  std::filesystem::path workspace;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  unsigned job_workers = 2;
  std::filesystem::path static_dir;  // web console bundle; optional
};

class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();

  // Binds the socket; throws SERVE_BIND. Returns the bound port.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void stop();

  Workspace& workspace() { return workspace_; }

 private:
  void routes();
  std::string submit_job(Workspace::MineRequest request);
  void worker_loop();

  ServerOptions options_;
  Workspace workspace_;
  std::unique_ptr<httplib::Server> http_;

  std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::deque<std::pair<std::string, Workspace::MineRequest>> queue_;
  std::vector<std::thread> workers_;
  std::atomic<std::size_t> next_job_{0};
  bool stopping_ = false;
};

}  // namespace tracelens::server
