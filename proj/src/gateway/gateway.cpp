#include "gravbench/gateway/gateway.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gravbench/sim/io.hpp"
#include "gravbench/sim/library.hpp"

namespace gravbench::gateway {
namespace {

using nlohmann::json;

json error_reply(ErrorCode code, const std::string& detail, const std::string& token = {}) {
  json r{{"kind", "error"}, {"code", std::string(to_string(code))}, {"detail", detail}};
  if (!token.empty()) r["token"] = token;
  return r;
}

std::string fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

env::Protocol parse_protocol(const json& request, const Config& config) {
  const std::string name = request.value("protocol", "budget_obs");
  if (name == "full" || name == "full_obs") return env::Protocol::full();
  if (name == "budget" || name == "budget_obs") {
    const int budget = request.value("budget", config.budget);
    const int cap = request.value("per_call_cap", config.per_call_cap);
    if (budget <= 0 || cap <= 0) throw Error(ErrorCode::validation, "budget and cap must be positive");
    return env::Protocol::budgeted(budget, cap);
  }
  throw Error(ErrorCode::protocol, "unknown protocol '" + name + "'");
}

const std::string& require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw Error(ErrorCode::format, std::string("missing string field '") + key + "'");
  return it->get_ref<const std::string&>();
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

// ---- configuration ---------------------------------------------------------

std::pair<std::string, uint16_t> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0)
    throw Error(ErrorCode::format, "bind address must be host:port, got '" + bind + "'");
  const std::string port = bind.substr(colon + 1);
  char* end = nullptr;
  const long p = std::strtol(port.c_str(), &end, 10);
  if (port.empty() || *end != '\0' || p < 0 || p > 65535)
    throw Error(ErrorCode::format, "bad port in '" + bind + "'");
  return {bind.substr(0, colon), static_cast<uint16_t>(p)};
}

nlohmann::json to_json(const Config& c) {
  return {{"bind", c.bind},
          {"scenario_dir", c.scenario_dir.string()},
          {"catalog_manifest", c.catalog_manifest.string()},
          {"results_dir", c.results_dir.string()},
          {"verdict", c.verdict == Disclosure::shown ? "shown" : "hidden"},
          {"idle_timeout_s", c.idle_timeout_s},
          {"budget", c.budget},
          {"per_call_cap", c.per_call_cap}};
}

Config config_from_json(const nlohmann::json& j, Config c) {
  if (!j.is_object()) throw Error(ErrorCode::format, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "bind") c.bind = value.get<std::string>();
      else if (key == "scenario_dir") c.scenario_dir = value.get<std::string>();
      else if (key == "catalog_manifest") c.catalog_manifest = value.get<std::string>();
      else if (key == "results_dir") c.results_dir = value.get<std::string>();
      else if (key == "idle_timeout_s") c.idle_timeout_s = value.get<double>();
      else if (key == "budget") c.budget = value.get<int>();
      else if (key == "per_call_cap") c.per_call_cap = value.get<int>();
      else if (key == "verdict") {
        const auto v = value.get<std::string>();
        if (v != "shown" && v != "hidden")
          throw Error(ErrorCode::format, "verdict must be 'shown' or 'hidden'");
        c.verdict = v == "shown" ? Disclosure::shown : Disclosure::hidden;
      } else {
        throw Error(ErrorCode::format, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, std::string("config: ") + e.what());
  }
  if (c.idle_timeout_s <= 0.0 || c.budget <= 0 || c.per_call_cap <= 0)
    throw Error(ErrorCode::format, "idle_timeout_s, budget and per_call_cap must be positive");
  split_bind(c.bind);
  return c;
}

Config load_config(const std::optional<std::filesystem::path>& file) {
  Config c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::io, "cannot read config " + file->string());
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::format, "config is not JSON: " + file->string());
    c = config_from_json(j, c);
  }
  if (const char* bind = std::getenv("GRAVBENCH_BIND"); bind && *bind) {
    split_bind(bind);
    c.bind = bind;
  }
  if (const char* dir = std::getenv("GRAVBENCH_RESULTS_DIR"); dir && *dir) c.results_dir = dir;
  return c;
}

nlohmann::json to_json(const EpisodeSpec& s) {
  json j{{"task", s.task_id},
         {"scenario", s.scenario_id},
         {"protocol", s.protocol.name()},
         {"agent", s.agent_id},
         {"repeat", s.repeat}};
  if (s.protocol.kind == env::ProtocolKind::budget_obs) {
    j["budget"] = s.protocol.budget;
    j["per_call_cap"] = s.protocol.per_call_cap;
  }
  return j;
}

// ---- gateway ---------------------------------------------------------------

struct Gateway::Episode {
  enum class State { reserved, open, closed };

  std::mutex mutex;
  std::string token;
  EpisodeSpec spec;
  tasks::TaskInstance instance;
  std::unique_ptr<env::ObservationSession> session;
  State state = State::reserved;
  double started_at = 0.0;
  double last_activity = 0.0;
  std::string log;
  std::optional<eval::RunRecord> record;
};

Gateway::Gateway(std::shared_ptr<env::TrajectoryStore> store, tasks::Catalog catalog,
                 Config config, Clock clock)
    : store_(std::move(store)),
      catalog_(std::move(catalog)),
      config_(std::move(config)),
      clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
          .count();
    };
  }
  if (catalog_.instances.empty()) throw Error(ErrorCode::validation, "catalog is empty");
}

std::unique_ptr<Gateway> Gateway::from_config(const Config& config) {
  std::vector<sim::Scenario> scenarios = sim::scenario_library();
  if (!config.scenario_dir.empty()) {
    for (auto& s : sim::load_scenario_dir(config.scenario_dir)) scenarios.push_back(std::move(s));
  }
  auto store = std::make_shared<env::TrajectoryStore>(std::move(scenarios));
  tasks::Catalog catalog;
  if (config.catalog_manifest.empty()) {
    catalog = tasks::build_catalog(*store);
  } else {
    std::ifstream in(config.catalog_manifest);
    if (!in) throw Error(ErrorCode::io, "cannot read " + config.catalog_manifest.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::format, "catalog manifest is not JSON");
    if (j.is_object() && j.contains("tasks")) j = j["tasks"];
    if (!j.is_array()) throw Error(ErrorCode::format, "catalog manifest must list tasks");
    std::vector<tasks::TaskSpec> specs;
    for (const auto& t : j) specs.push_back(tasks::task_from_json(t));
    catalog = tasks::build_catalog(*store, specs);
  }
  return std::make_unique<Gateway>(std::move(store), std::move(catalog), config);
}

std::shared_ptr<Gateway::Episode> Gateway::find(const std::string& token) const {
  std::lock_guard lock(mutex_);
  auto it = episodes_.find(token);
  if (it == episodes_.end()) throw Error(ErrorCode::not_found, "unknown session token '" + token + "'");
  return it->second;
}

std::shared_ptr<Gateway::Episode> Gateway::create(const EpisodeSpec& spec) {
  const tasks::TaskInstance& inst = catalog_.find(spec.task_id, spec.scenario_id);
  auto ep = std::make_shared<Episode>();
  ep->spec = spec;
  ep->instance = inst;
  ep->last_activity = clock_();
  std::ostringstream key;
  key << spec.agent_id << '|' << spec.task_id << '|' << spec.scenario_id << '|'
      << spec.protocol.name() << '|' << spec.protocol.budget << '|' << spec.protocol.per_call_cap
      << '|' << spec.repeat;
  std::lock_guard lock(mutex_);
  const int n = key_counts_[key.str()]++;
  ep->token = fnv1a(key.str() + '#' + std::to_string(n));
  episodes_[ep->token] = ep;
  return ep;
}

std::string Gateway::reserve(const EpisodeSpec& spec) { return create(spec)->token; }

nlohmann::json Gateway::handle(const nlohmann::json& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_reply(e.code(), e.detail(), request.is_object() ? request.value("token", "") : "");
  } catch (const json::exception& e) {
    return error_reply(ErrorCode::format, e.what());
  } catch (const std::exception& e) {
    return error_reply(ErrorCode::validation, e.what());
  }
}

std::string Gateway::handle_text(const std::string& request) {
  const json j = json::parse(request, nullptr, false);
  if (j.is_discarded()) return error_reply(ErrorCode::format, "request is not JSON").dump();
  return handle(j).dump();
}

nlohmann::json Gateway::dispatch(const nlohmann::json& request) {
  if (!request.is_object()) throw Error(ErrorCode::protocol, "request must be a JSON object");
  sweep();
  auto kind_it = request.find("kind");
  if (kind_it == request.end() || !kind_it->is_string())
    throw Error(ErrorCode::protocol, "request has no kind");
  const std::string kind = *kind_it;
  if (kind == "start_task") return start(request);
  if (kind != "observe" && kind != "full_table" && kind != "submit_answer")
    throw Error(ErrorCode::protocol, "unknown message kind '" + kind + "'");
  auto tok = request.find("token");
  if (tok == request.end() || !tok->is_string())
    throw Error(ErrorCode::protocol, "session token required");
  auto ep = find(*tok);
  std::lock_guard lock(ep->mutex);
  json reply;
  try {
    reply = on_episode(*ep, kind, request);
  } catch (const Error& e) {
    reply = error_reply(e.code(), e.detail(), ep->token);
  } catch (const json::exception& e) {
    reply = error_reply(ErrorCode::format, e.what(), ep->token);
  }
  ep->log += json{{"request", request}, {"reply", reply}}.dump() + "\n";
  ep->last_activity = clock_();
  if (ep->state == Episode::State::closed && ep->record) persist(*ep, *ep->record);
  return reply;
}

nlohmann::json Gateway::start(const nlohmann::json& request) {
  std::shared_ptr<Episode> ep;
  if (auto tok = request.find("token"); tok != request.end()) {
    if (!tok->is_string()) throw Error(ErrorCode::format, "token must be a string");
    ep = find(*tok);
  } else {
    EpisodeSpec spec;
    spec.task_id = require_string(request, "task");
    spec.scenario_id = require_string(request, "scenario");
    spec.protocol = parse_protocol(request, config_);
    spec.agent_id = request.value("agent", "agent");
    spec.repeat = request.value("repeat", 0);
    ep = create(spec);
  }
  std::lock_guard lock(ep->mutex);
  json reply;
  if (ep->state == Episode::State::closed) {
    reply = error_reply(ErrorCode::episode_closed, "episode is closed", ep->token);
  } else if (ep->state == Episode::State::open) {
    reply = error_reply(ErrorCode::protocol, "episode already started", ep->token);
  } else {
    ep->session = env::create_session(*store_, ep->spec.scenario_id, ep->spec.protocol);
    ep->state = Episode::State::open;
    ep->started_at = clock_();
    const auto& units = ep->instance.units;
    reply = {{"kind", "start_task"},
             {"token", ep->token},
             {"episode", to_json(ep->spec)},
             {"prompt", tasks::render_prompt(ep->instance, ep->spec.protocol)},
             {"window", {ep->session->window_start(), ep->session->window_end()}},
             {"time_unit", units.time_symbol},
             {"length_unit", units.length_symbol},
             {"answer_unit", ep->instance.truth.unit},
             {"boolean_answer", ep->instance.truth.flag.has_value()},
             {"columns", json::parse(R"(["time","star1_x","star1_y","star1_z","star2_x","star2_y","star2_z"])")}};
    if (ep->spec.protocol.kind == env::ProtocolKind::budget_obs) {
      reply["budget"] = ep->spec.protocol.budget;
      reply["per_call_cap"] = ep->spec.protocol.per_call_cap;
      reply["remaining"] = ep->session->remaining();
    }
  }
  ep->log += json{{"request", request}, {"reply", reply}}.dump() + "\n";
  ep->last_activity = clock_();
  return reply;
}

nlohmann::json Gateway::on_episode(Episode& ep, const std::string& kind,
                                   const nlohmann::json& request) {
  if (ep.state == Episode::State::closed) {
    const bool expired = ep.record && !ep.record->flags.empty() && ep.record->flags[0] == "expired";
    throw Error(ErrorCode::episode_closed, expired ? "episode expired" : "episode is closed");
  }
  if (ep.state == Episode::State::reserved)
    throw Error(ErrorCode::protocol, "episode not started; send start_task first");

  if (kind == "observe") {
    auto times_it = request.find("times");
    if (times_it == request.end() || !times_it->is_array())
      throw Error(ErrorCode::format, "observe needs a 'times' array");
    std::vector<double> times;
    for (const auto& t : *times_it) {
      if (!t.is_number()) throw Error(ErrorCode::format, "times must be numbers");
      times.push_back(t.get<double>());
    }
    const auto rows = ep.session->observe(times);
    json out = json::array();
    for (const auto& r : rows) out.push_back(env::to_json(r));
    json reply{{"kind", "observe_result"}, {"token", ep.token}, {"rows", out},
               {"used", ep.session->used()}};
    if (ep.spec.protocol.kind == env::ProtocolKind::budget_obs)
      reply["remaining"] = ep.session->remaining();
    return reply;
  }
  if (kind == "full_table") {
    const auto rows = ep.session->full_table();
    json out = json::array();
    for (const auto& r : rows) out.push_back(env::to_json(r));
    return {{"kind", "full_table"}, {"token", ep.token}, {"rows", out}};
  }

  // submit_answer
  eval::Submission sub;
  if (auto f = request.find("flag"); f != request.end()) {
    if (!f->is_boolean()) throw Error(ErrorCode::format, "flag must be true or false");
    sub.flag = f->get<bool>();
  }
  if (auto v = request.find("value"); v != request.end()) {
    if (!v->is_number()) throw Error(ErrorCode::format, "value must be a number");
    sub.value = v->get<double>();
  } else if (!sub.flag) {
    throw Error(ErrorCode::format, "submit_answer needs 'value' (or 'flag' for boolean tasks)");
  }
  if (auto u = request.find("unit"); u != request.end()) {
    if (!u->is_string()) throw Error(ErrorCode::format, "unit must be a string");
    sub.unit = *u;
  }
  const eval::Verdict v = eval::score_answer(ep.instance, sub);
  eval::RunRecord rec;
  rec.submitted = sub;
  rec.correct = v.correct;
  if (v.problem) rec.flags.push_back(std::string(to_string(*v.problem)));
  close(ep, std::move(rec));

  json reply{{"kind", "verdict"}, {"token", ep.token}, {"received", true}};
  if (config_.verdict == Disclosure::shown) {
    reply["correct"] = v.correct;
    reply["threshold_pct"] = ep.instance.task.threshold_pct;
    reply["error_pct"] = std::isfinite(v.error_pct) ? json(v.error_pct) : json(nullptr);
    if (v.problem) {
      reply["problem"] = std::string(to_string(*v.problem));
      reply["detail"] = v.detail;
    }
  }
  return reply;
}

void Gateway::close(Episode& ep, eval::RunRecord rec) {
  rec.task_id = ep.spec.task_id;
  rec.scenario_id = ep.spec.scenario_id;
  rec.agent_id = ep.spec.agent_id;
  rec.protocol = ep.spec.protocol.name();
  rec.repeat = ep.spec.repeat;
  rec.observations_used = ep.session ? ep.session->used() : 0;
  rec.wall_time = ep.state == Episode::State::open ? clock_() - ep.started_at : 0.0;
  if (!config_.results_dir.empty()) rec.transcript_ref = "transcripts/" + ep.token + ".jsonl";
  ep.state = Episode::State::closed;
  ep.record = rec;
  std::lock_guard lock(persist_mutex_);
  if (config_.results_dir.empty()) return;
  const auto runs = config_.results_dir / "runs.jsonl";
  std::filesystem::create_directories(config_.results_dir);
  std::ofstream out(runs, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot append to " + runs.string());
  const std::string line = eval::to_json(rec).dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
}

void Gateway::persist(const Episode& ep, const eval::RunRecord& rec) {
  if (config_.results_dir.empty() || rec.transcript_ref.empty()) return;
  std::lock_guard lock(persist_mutex_);
  write_atomic(config_.results_dir / rec.transcript_ref, ep.log);
}

void Gateway::abandon(const std::string& token, const std::string& flag) {
  auto ep = find(token);
  std::lock_guard lock(ep->mutex);
  if (ep->state == Episode::State::closed) return;
  eval::RunRecord rec;
  rec.flags.push_back(flag);
  close(*ep, std::move(rec));
  persist(*ep, *ep->record);
}

size_t Gateway::sweep() {
  std::vector<std::shared_ptr<Episode>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, ep] : episodes_) all.push_back(ep);
  }
  const double now = clock_();
  size_t expired = 0;
  for (const auto& ep : all) {
    std::unique_lock lock(ep->mutex, std::try_to_lock);
    if (!lock.owns_lock() || ep->state == Episode::State::closed) continue;
    if (now - ep->last_activity <= config_.idle_timeout_s) continue;
    eval::RunRecord rec;
    rec.flags.push_back("expired");
    close(*ep, std::move(rec));
    persist(*ep, *ep->record);
    ++expired;
  }
  return expired;
}

std::optional<eval::RunRecord> Gateway::record(const std::string& token) const {
  auto ep = find(token);
  std::lock_guard lock(ep->mutex);
  return ep->record;
}

std::vector<eval::RunRecord> Gateway::records() const {
  std::vector<std::shared_ptr<Episode>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, ep] : episodes_) all.push_back(ep);
  }
  std::vector<eval::RunRecord> out;
  for (const auto& ep : all) {
    std::lock_guard lock(ep->mutex);
    if (ep->record) out.push_back(*ep->record);
  }
  return out;
}

std::string Gateway::transcript(const std::string& token) const {
  auto ep = find(token);
  std::lock_guard lock(ep->mutex);
  return ep->log;
}

bool replay_transcript(const std::string& log_jsonl, Gateway& gateway) {
  std::istringstream lines(log_jsonl);
  std::string line;
  bool any = false;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.contains("request") || !entry.contains("reply"))
      return false;
    const json& req = entry["request"];
    const json& logged = entry["reply"];
    // A reserved episode is recreated from the spec echoed in its start reply.
    if (req.value("kind", "") == "start_task" && req.contains("token") && logged.contains("episode")) {
      const json& e = logged["episode"];
      EpisodeSpec spec;
      spec.task_id = e.at("task");
      spec.scenario_id = e.at("scenario");
      spec.protocol = e.at("protocol") == "full_obs"
                          ? env::Protocol::full()
                          : env::Protocol::budgeted(e.at("budget"), e.at("per_call_cap"));
      spec.agent_id = e.at("agent");
      spec.repeat = e.at("repeat");
      if (gateway.reserve(spec) != req["token"]) return false;
    }
    if (gateway.handle(req).dump() != logged.dump()) return false;
    any = true;
  }
  return any;
}

}  // namespace gravbench::gateway
