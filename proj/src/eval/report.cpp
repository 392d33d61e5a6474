#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "gravbench/eval/eval.hpp"

namespace gravbench::eval {

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json sub{{"value", r.submitted.value}, {"unit", r.submitted.unit}};
  if (r.submitted.flag) sub["flag"] = *r.submitted.flag;
  nlohmann::json j{{"task", r.task_id},
                   {"scenario", r.scenario_id},
                   {"agent", r.agent_id},
                   {"protocol", r.protocol},
                   {"repeat", r.repeat},
                   {"submitted", sub},
                   {"observations_used", r.observations_used},
                   {"wall_time", r.wall_time},
                   {"transcript", r.transcript_ref},
                   {"correct", r.correct},
                   {"flags", r.flags}};
  if (r.cost) j["cost"] = *r.cost;
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.task_id = j.at("task").get<std::string>();
    r.scenario_id = j.at("scenario").get<std::string>();
    r.agent_id = j.at("agent").get<std::string>();
    r.protocol = j.at("protocol").get<std::string>();
    r.repeat = j.value("repeat", 0);
    const auto& sub = j.at("submitted");
    r.submitted.value = sub.value("value", 0.0);
    r.submitted.unit = sub.value("unit", "");
    if (sub.contains("flag")) r.submitted.flag = sub.at("flag").get<bool>();
    r.observations_used = j.value("observations_used", 0);
    r.wall_time = j.value("wall_time", 0.0);
    r.transcript_ref = j.value("transcript", "");
    r.correct = j.at("correct").get<bool>();
    r.flags = j.value("flags", std::vector<std::string>{});
    if (j.contains("cost") && !j.at("cost").is_null()) r.cost = j.at("cost").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("run record: ") + e.what());
  }
}

std::string to_jsonl(const std::vector<RunRecord>& runs) {
  std::string out;
  for (const auto& r : runs) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<RunRecord> runs_from_jsonl(const std::string& text) {
  std::vector<RunRecord> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::format, "run record is not JSON: " + line);
    out.push_back(run_record_from_json(j));
  }
  return out;
}

Report aggregate(const std::vector<RunRecord>& runs) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<const RunRecord*>> by_agent;
  for (const auto& r : runs) by_agent[{r.agent_id, r.protocol}].push_back(&r);

  Report report;
  for (const auto& [key, recs] : by_agent) {
    AgentSummary s;
    s.agent_id = key.first;
    s.protocol = key.second;
    std::map<int, std::pair<size_t, size_t>> per_repeat;  // correct, total
    std::map<std::string, std::pair<size_t, size_t>> per_task;
    std::set<Key> instances;
    double obs = 0.0;
    for (const auto* r : recs) {
      auto& pr = per_repeat[r->repeat];
      pr.first += r->correct;
      pr.second += 1;
      auto& pt = per_task[r->task_id];
      pt.first += r->correct;
      pt.second += 1;
      instances.insert({r->task_id, r->scenario_id});
      obs += r->observations_used;
      if (r->cost) s.total_cost = s.total_cost.value_or(0.0) + *r->cost;
    }
    std::vector<double> scores;
    for (const auto& [rep, ct] : per_repeat) {
      scores.push_back(100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second));
      if (ct.second != instances.size()) {
        report.warnings.push_back(s.agent_id + "/" + s.protocol + " repeat " +
                                  std::to_string(rep) + " covers " + std::to_string(ct.second) +
                                  " of " + std::to_string(instances.size()) + " instances");
      }
    }
    double mean = 0.0;
    for (double v : scores) mean += v;
    mean /= static_cast<double>(scores.size());
    s.score_pct = mean;
    if (scores.size() >= 2) {
      double ss = 0.0;
      for (double v : scores) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(scores.size() - 1));
      s.standard_error = sd / std::sqrt(static_cast<double>(scores.size()));
    }
    s.mean_observations = obs / static_cast<double>(recs.size());
    s.repeats = scores.size();
    s.instances = instances.size();
    for (const auto& [task, ct] : per_task)
      s.per_task_pct[task] = 100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second);
    report.agents.push_back(std::move(s));
  }
  return report;
}

std::string Report::table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-10s %10s %8s %10s %8s %10s\n", "agent", "protocol",
                "score_%", "se", "mean_obs", "repeats", "cost");
  out << line;
  for (const auto& a : agents) {
    const std::string se = a.standard_error ? std::to_string(*a.standard_error).substr(0, 6) : "-";
    const std::string cost = a.total_cost ? std::to_string(*a.total_cost) : "-";
    std::snprintf(line, sizeof line, "%-20s %-10s %10.2f %8s %10.2f %8zu %10s\n",
                  a.agent_id.c_str(), a.protocol.c_str(), a.score_pct, se.c_str(),
                  a.mean_observations, a.repeats, cost.c_str());
    out << line;
  }
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

nlohmann::json Report::json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& s : agents) {
    a.push_back({{"agent", s.agent_id},
                 {"protocol", s.protocol},
                 {"score_pct", s.score_pct},
                 {"standard_error", s.standard_error ? nlohmann::json(*s.standard_error)
                                                     : nlohmann::json(nullptr)},
                 {"mean_observations", s.mean_observations},
                 {"total_cost",
                  s.total_cost ? nlohmann::json(*s.total_cost) : nlohmann::json(nullptr)},
                 {"repeats", s.repeats},
                 {"instances", s.instances},
                 {"per_task_pct", s.per_task_pct}});
  }
  return {{"agents", a}, {"warnings", warnings}};
}

}  // namespace gravbench::eval
