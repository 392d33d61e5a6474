#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <future>

#include "gravbench/gateway/gateway.hpp"
#include "gravbench/solvers/solvers.hpp"

extern char** environ;

namespace gravbench::gateway {
namespace {

using nlohmann::json;

/// In-process channel; refuses to send once the episode's stop is requested.
class LocalChannel : public Channel {
 public:
  LocalChannel(Gateway& g, std::stop_token stop) : gateway_(g), stop_(std::move(stop)) {}
  json request(const json& message) override {
    if (stop_.stop_requested()) throw Error(ErrorCode::timeout, "episode timed out");
    return gateway_.handle(message);
  }

 private:
  Gateway& gateway_;
  std::stop_token stop_;
};

json expect(Channel& ch, const json& message, const char* kind) {
  json reply = ch.request(message);
  if (reply.value("kind", "") == "error") {
    throw Error(ErrorCode::protocol, "gateway error " + reply.value("code", "") + ": " +
                                         reply.value("detail", ""));
  }
  if (reply.value("kind", "") != kind)
    throw Error(ErrorCode::protocol, std::string("expected ") + kind + " reply");
  return reply;
}

}  // namespace

// ---- agents ----------------------------------------------------------------

ScriptedAgent::ScriptedAgent(std::shared_ptr<env::TrajectoryStore> store, int n, std::string id)
    : store_(std::move(store)), n_(n), id_(std::move(id)) {
  if (id_.empty()) id_ = n_ > 0 ? "uniform-" + std::to_string(n_) : "expert";
}

void ScriptedAgent::play(Channel& channel, const std::string& token, std::stop_token stop) {
  const json started = expect(channel, {{"kind", "start_task"}, {"token", token}}, "start_task");
  const json& ep = started.at("episode");
  const std::string scenario = ep.at("scenario");
  const tasks::TaskSpec& task = tasks::find_task(ep.at("task"));
  const env::Protocol protocol = ep.at("protocol") == "full_obs"
                                     ? env::Protocol::full()
                                     : env::Protocol::budgeted(ep.at("budget"), ep.at("per_call_cap"));
  const sim::UnitSystem& units = store_->scenario(scenario).unit_system;

  // Plan against a private mirror of the environment, then issue the same
  // requests to the gateway and check the rows agree.
  auto mirror = env::create_session(*store_, scenario, protocol);
  solvers::Estimate est;
  if (protocol.kind == env::ProtocolKind::full_obs) {
    est = solvers::solve_full(task, *mirror, units);
  } else if (n_ > 0) {
    est = solvers::solve_uniform(task, *mirror, std::min(n_, protocol.budget), units);
  } else {
    est = solvers::solve_budgeted(task, *mirror, units);
  }
  for (const auto& entry : mirror->transcript()) {
    if (stop.stop_requested()) throw Error(ErrorCode::timeout, "episode timed out");
    if (entry.error) continue;
    json reply;
    if (entry.kind == env::TranscriptEntry::Kind::full_table) {
      reply = expect(channel, {{"kind", "full_table"}, {"token", token}}, "full_table");
      if (reply.at("rows").size() != entry.row_count)
        throw Error(ErrorCode::contract_violation, "gateway table differs from the mirror");
    } else {
      reply = expect(channel, {{"kind", "observe"}, {"token", token}, {"times", entry.times}},
                     "observe_result");
      json local = json::array();
      for (const auto& r : entry.rows) local.push_back(env::to_json(r));
      if (reply.at("rows") != local)
        throw Error(ErrorCode::contract_violation, "gateway rows differ from the mirror");
    }
  }
  json submit{{"kind", "submit_answer"}, {"token", token}, {"value", est.value}, {"unit", est.unit}};
  if (est.flag) submit["flag"] = *est.flag;
  expect(channel, submit, "verdict");
}

CommandAgent::CommandAgent(std::string command, std::string endpoint, std::string id)
    : command_(std::move(command)), endpoint_(std::move(endpoint)), id_(std::move(id)) {}

void CommandAgent::play(Channel&, const std::string& token, std::stop_token stop) {
  std::vector<std::string> env_strings;
  for (char** e = environ; *e; ++e) {
    const std::string s = *e;
    if (s.rfind("GRAVBENCH_ENDPOINT=", 0) == 0 || s.rfind("GRAVBENCH_TOKEN=", 0) == 0) continue;
    env_strings.push_back(s);
  }
  env_strings.push_back("GRAVBENCH_ENDPOINT=" + endpoint_);
  env_strings.push_back("GRAVBENCH_TOKEN=" + token);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command_;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

  pid_t pid = 0;
  if (posix_spawn(&pid, "/bin/sh", nullptr, nullptr, argv, envp.data()) != 0)
    throw Error(ErrorCode::io, "cannot start agent command");
  int status = 0;
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error(ErrorCode::io, "waitpid failed");
    if (stop.stop_requested()) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw Error(ErrorCode::timeout, "agent command killed");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw Error(ErrorCode::io, "agent command failed");
}

// ---- suites ----------------------------------------------------------------

std::vector<tasks::TaskInstance> select(const tasks::Catalog& catalog,
                                        const SuiteOptions& options,
                                        const env::TrajectoryStore& store) {
  auto allowed = [](const std::vector<std::string>& list, const std::string& v) {
    return list.empty() || std::find(list.begin(), list.end(), v) != list.end();
  };
  std::vector<tasks::TaskInstance> out;
  for (const auto& inst : catalog.instances) {
    if (!allowed(options.tasks, inst.task.id) || !allowed(options.scenarios, inst.scenario_id))
      continue;
    if (!allowed(options.classes, tasks::scenario_class(store.scenario(inst.scenario_id))))
      continue;
    out.push_back(inst);
  }
  return out;
}

SuiteResult run_suite(Gateway& gateway, Agent& agent, const SuiteOptions& options) {
  const auto selected = select(gateway.catalog(), options, gateway.store());
  if (selected.empty()) throw Error(ErrorCode::validation, "catalog filter selects nothing");
  if (options.repeats < 1) throw Error(ErrorCode::validation, "repeats must be at least 1");

  std::vector<std::string> tokens;
  for (int rep = 0; rep < options.repeats; ++rep) {
    for (const auto& inst : selected)
      tokens.push_back(gateway.reserve({inst.task.id, inst.scenario_id, options.protocol, agent.id(), rep}));
  }

  auto play_one = [&](const std::string& token) {
    std::stop_source stop;
    std::promise<std::string> done;
    auto outcome = done.get_future();
    std::jthread worker([&, token](std::stop_token) {
      try {
        LocalChannel ch(gateway, stop.get_token());
        agent.play(ch, token, stop.get_token());
        done.set_value("");
      } catch (const Error& e) {
        done.set_value(e.code() == ErrorCode::timeout ? "timeout" : "agent_error");
      } catch (const std::exception&) {
        done.set_value("agent_error");
      }
    });
    const auto deadline = std::chrono::duration<double>(options.timeout_s);
    if (outcome.wait_for(deadline) != std::future_status::ready) {
      gateway.abandon(token, "timeout");
      stop.request_stop();
      worker.join();
      return;
    }
    const std::string flag = outcome.get();
    if (!gateway.record(token)) gateway.abandon(token, flag.empty() ? "no_submission" : flag);
  };

  std::atomic<size_t> next{0};
  const size_t n_workers = std::max<size_t>(1, std::min(options.parallel, tokens.size()));
  {
    std::vector<std::jthread> pool;
    for (size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < tokens.size(); i = next++) play_one(tokens[i]);
      });
    }
  }

  SuiteResult result;
  for (const auto& t : tokens) result.runs.push_back(*gateway.record(t));
  result.report = eval::aggregate(result.runs);
  return result;
}

}  // namespace gravbench::gateway
