#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gravbench/env/store.hpp"
#include "gravbench/eval/eval.hpp"
#include "gravbench/tasks/catalog.hpp"

namespace gravbench::gateway {

// ---- configuration ---------------------------------------------------------

enum class Disclosure { hidden, shown };

struct Config {
  std::string bind = "127.0.0.1:7878";
  std::filesystem::path scenario_dir;      // extra scenario documents; empty = built-ins only
  std::filesystem::path catalog_manifest;  // task list; empty = shipped tasks
  std::filesystem::path results_dir;       // empty = keep records in memory only
  Disclosure verdict = Disclosure::shown;
  double idle_timeout_s = 600.0;
  int budget = 100;
  int per_call_cap = 10;
};

/// Reads a JSON config file (missing keys keep their defaults), then applies
/// GRAVBENCH_BIND and GRAVBENCH_RESULTS_DIR. Throws Error{format|io}.
Config load_config(const std::optional<std::filesystem::path>& file);
nlohmann::json to_json(const Config& c);
Config config_from_json(const nlohmann::json& j, Config base = {});

/// Splits "host:port". Throws Error{format}.
std::pair<std::string, uint16_t> split_bind(const std::string& bind);

// ---- episodes --------------------------------------------------------------

struct EpisodeSpec {
  std::string task_id;
  std::string scenario_id;
  env::Protocol protocol = env::Protocol::budgeted();
  std::string agent_id = "agent";
  int repeat = 0;
};

nlohmann::json to_json(const EpisodeSpec& s);

/// Transport-independent message handler. One reply per request; episodes
/// are serialized individually and may run concurrently.
class Gateway {
 public:
  using Clock = std::function<double()>;  // seconds, monotonic

  Gateway(std::shared_ptr<env::TrajectoryStore> store, tasks::Catalog catalog, Config config,
          Clock clock = {});

  /// Builds the store and catalog described by `config`.
  static std::unique_ptr<Gateway> from_config(const Config& config);

  /// Handles one request. Never throws; failures become error replies.
  nlohmann::json handle(const nlohmann::json& request);
  /// Raw-text variant used by transports; malformed JSON gets a format error.
  std::string handle_text(const std::string& request);

  /// Registers an episode without starting it; an agent claims it with
  /// start_task {"token": ...}. Throws Error{not_found}.
  std::string reserve(const EpisodeSpec& spec);
  /// Closes an open episode without a submission (recorded incorrect with
  /// `flag`). No-op on closed episodes.
  void abandon(const std::string& token, const std::string& flag);
  /// Expires episodes idle longer than the configured timeout.
  size_t sweep();

  std::optional<eval::RunRecord> record(const std::string& token) const;
  std::vector<eval::RunRecord> records() const;
  /// Line-delimited {"request", "reply"} log of one episode.
  std::string transcript(const std::string& token) const;

  const tasks::Catalog& catalog() const { return catalog_; }
  const Config& config() const { return config_; }
  env::TrajectoryStore& store() { return *store_; }

 private:
  struct Episode;

  nlohmann::json dispatch(const nlohmann::json& request);
  nlohmann::json start(const nlohmann::json& request);
  nlohmann::json on_episode(Episode& ep, const std::string& kind, const nlohmann::json& request);
  std::shared_ptr<Episode> find(const std::string& token) const;
  std::shared_ptr<Episode> create(const EpisodeSpec& spec);
  void close(Episode& ep, eval::RunRecord record);
  void persist(const Episode& ep, const eval::RunRecord& record);

  std::shared_ptr<env::TrajectoryStore> store_;
  tasks::Catalog catalog_;
  Config config_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Episode>> episodes_;
  std::map<std::string, int> key_counts_;
  mutable std::mutex persist_mutex_;
};

/// Feeds the requests of an episode log to `gateway` and returns true when
/// every reply is byte-identical to the logged one.
bool replay_transcript(const std::string& log_jsonl, Gateway& gateway);

// ---- wire ------------------------------------------------------------------

/// Frames are a 4-byte big-endian length followed by a UTF-8 JSON document.
inline constexpr uint32_t kMaxFrame = 64u << 20;

std::string encode_frame(const std::string& payload);
/// Returns the payload and consumes it from `buffer`, or nullopt when the
/// frame is incomplete. Throws Error{format} for oversize frames.
std::optional<std::string> decode_frame(std::string& buffer);

/// TCP listener; one thread per connection.
class Server {
 public:
  Server(Gateway& gateway, const std::string& bind);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  uint16_t port() const;
  /// Blocks until stop() is called from another thread.
  void run();
  void start();  // run() on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Client {
 public:
  /// Throws Error{io} when the endpoint is unreachable.
  Client(const std::string& host, uint16_t port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  nlohmann::json request(const nlohmann::json& message);
  std::string request_text(const std::string& payload);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---- agents and suites -----------------------------------------------------

/// Request/reply channel handed to agents.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual nlohmann::json request(const nlohmann::json& message) = 0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  /// Plays the reserved episode `token`, normally ending with submit_answer.
  virtual void play(Channel& channel, const std::string& token, std::stop_token stop) = 0;
};

/// Calls the expert solvers: uniform sampling with `n` observations, or the
/// budget-aware strategy when `n` is zero (full table under full_obs).
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::shared_ptr<env::TrajectoryStore> store, int n = 0,
                         std::string id = {});
  std::string id() const override { return id_; }
  void play(Channel& channel, const std::string& token, std::stop_token stop) override;

 private:
  std::shared_ptr<env::TrajectoryStore> store_;
  int n_;
  std::string id_;
};

/// Runs an external program per episode with GRAVBENCH_ENDPOINT and
/// GRAVBENCH_TOKEN in its environment; killed on timeout.
class CommandAgent : public Agent {
 public:
  CommandAgent(std::string command, std::string endpoint, std::string id = "command");
  std::string id() const override { return id_; }
  void play(Channel& channel, const std::string& token, std::stop_token stop) override;

 private:
  std::string command_;
  std::string endpoint_;
  std::string id_;
};

struct SuiteOptions {
  std::vector<std::string> tasks;      // empty = all
  std::vector<std::string> scenarios;  // empty = all
  std::vector<std::string> classes;    // scenario classes; empty = all
  env::Protocol protocol = env::Protocol::budgeted();
  int repeats = 1;
  double timeout_s = 300.0;
  size_t parallel = 1;
};

std::vector<tasks::TaskInstance> select(const tasks::Catalog& catalog,
                                        const SuiteOptions& options,
                                        const env::TrajectoryStore& store);

struct SuiteResult {
  std::vector<eval::RunRecord> runs;
  eval::Report report;
};

/// Plays every selected instance `repeats` times. Throws Error{validation}
/// when the selection is empty.
SuiteResult run_suite(Gateway& gateway, Agent& agent, const SuiteOptions& options);

}  // namespace gravbench::gateway
