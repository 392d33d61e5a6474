#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gravbench/gateway/gateway.hpp"
#include "gravbench/sim/io.hpp"
#include "gravbench/sim/library.hpp"
#include "gravbench/solvers/solvers.hpp"

using namespace gravbench;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + p.string());
  out << text;
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "full") out.push_back(0);
    else out.push_back(std::stoi(item));
  }
  return out;
}

struct Common {
  std::string config_file;
  std::string results_dir;
  std::string bind;

  gateway::Config config() const {
    gateway::Config c = gateway::load_config(
        config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file));
    if (!results_dir.empty()) c.results_dir = results_dir;
    if (!bind.empty()) c.bind = bind;
    return c;
  }
};

void add_common(CLI::App* app, Common& c, bool network) {
  app->add_option("--config", c.config_file, "JSON config file");
  app->add_option("--results-dir", c.results_dir, "Directory for run records and transcripts");
  if (network) app->add_option("--bind", c.bind, "host:port to listen on");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-body gravitational benchmark: simulation, tasks, baselines and agent gateway"};
  app.require_subcommand(1);
  Common common;

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a scenario and write its trajectory");
  std::string sim_scenario, sim_file, sim_out;
  bool sim_list = false;
  sim_cmd->add_option("--scenario", sim_scenario, "Built-in scenario id");
  sim_cmd->add_option("--file", sim_file, "Scenario document (JSON)");
  sim_cmd->add_option("--out", sim_out, "Output stem; writes <stem>.csv and <stem>.meta.json");
  sim_cmd->add_flag("--list", sim_list, "List built-in scenarios");

  // catalog
  auto* cat_cmd = app.add_subcommand("catalog", "List or validate task instances");
  add_common(cat_cmd, common, false);
  bool cat_json = false, cat_truth = false, cat_validate = false;
  cat_cmd->add_flag("--json", cat_json, "Print the manifest as JSON");
  cat_cmd->add_flag("--truth", cat_truth, "Include ground truths");
  cat_cmd->add_flag("--validate", cat_validate, "Check every instance and exit non-zero on problems");

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Expert-reference gaps for N uniform observations");
  add_common(base_cmd, common, false);
  std::string base_n = "10,20,50,100,200,500,1000";
  std::string base_out;
  base_cmd->add_option("--n", base_n, "Comma-separated N values ('full' for the whole table)");
  base_cmd->add_option("--out", base_out, "Directory for gaps.txt, gaps.json and gaps.svg");

  // thresholds
  auto* thr_cmd = app.add_subcommand("thresholds", "Per-task thresholds from the baseline gaps");
  add_common(thr_cmd, common, false);
  int thr_n = 100;
  bool thr_json = false;
  thr_cmd->add_option("--n", thr_n, "Observations for the sampled expert");
  thr_cmd->add_flag("--json", thr_json, "Print JSON");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the agent gateway");
  add_common(serve_cmd, common, true);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a benchmark suite with a scripted or external agent");
  add_common(run_cmd, common, true);
  std::string run_agent = "expert", run_command, run_protocol = "budget", run_report;
  std::vector<std::string> run_tasks, run_scenarios, run_classes;
  int run_repeats = 1, run_budget = 0;
  double run_timeout = 300.0;
  size_t run_parallel = 1;
  run_cmd->add_option("--agent", run_agent, "expert | uniform-N | command");
  run_cmd->add_option("--command", run_command, "Shell command for --agent command");
  run_cmd->add_option("--tasks", run_tasks, "Task ids to include")->delimiter(',');
  run_cmd->add_option("--scenarios", run_scenarios, "Scenario ids to include")->delimiter(',');
  run_cmd->add_option("--classes", run_classes, "Scenario classes to include")->delimiter(',');
  run_cmd->add_option("--protocol", run_protocol, "budget | full");
  run_cmd->add_option("--budget", run_budget, "Observation budget (default from config)");
  run_cmd->add_option("--repeats", run_repeats, "Repeats per instance");
  run_cmd->add_option("--timeout", run_timeout, "Seconds per episode");
  run_cmd->add_option("--parallel", run_parallel, "Concurrent episodes");
  run_cmd->add_option("--report", run_report, "Write the report JSON here");

  // score
  auto* score_cmd = app.add_subcommand("score", "Re-score stored run records");
  add_common(score_cmd, common, false);
  std::string score_runs, score_out;
  score_cmd->add_option("runs", score_runs, "runs.jsonl")->required();
  score_cmd->add_option("--out", score_out, "Write re-scored records here");

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "Scan agent transcripts for mass assumptions");
  std::vector<std::string> an_files;
  an_cmd->add_option("transcripts", an_files, "JSONL transcripts (role/content/code records)")
      ->required();

  // replay
  auto* rep_cmd = app.add_subcommand("replay", "Replay an episode log against a fresh gateway");
  add_common(rep_cmd, common, false);
  std::string rep_file;
  rep_cmd->add_option("log", rep_file, "Episode transcript (JSONL)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) {
      if (sim_list) {
        for (const auto& s : sim::scenario_library())
          std::printf("%-24s %s\n", s.id.c_str(), s.unit_system.name.c_str());
        return 0;
      }
      if (sim_scenario.empty() == sim_file.empty())
        throw Error(ErrorCode::validation, "give exactly one of --scenario or --file");
      const sim::Scenario s =
          sim_file.empty() ? sim::find_scenario(sim_scenario) : sim::load_scenario(sim_file);
      const auto traj = sim::simulate(s);
      if (sim_out.empty()) {
        sim::write_trajectory_csv(std::cout, traj, s.unit_system);
      } else {
        if (const auto parent = std::filesystem::path(sim_out).parent_path(); !parent.empty())
          std::filesystem::create_directories(parent);
        sim::export_trajectory(traj, s, sim_out);
        std::cerr << "wrote " << sim_out << ".csv and " << sim_out << ".meta.json\n";
      }
      return 0;
    }

    if (cat_cmd->parsed()) {
      auto gw = gateway::Gateway::from_config(common.config());
      const auto& cat = gw->catalog();
      if (cat_validate) {
        int problems = 0;
        for (const auto& i : cat.instances) {
          try {
            i.task.validate();
            if (!i.truth.flag && !std::isfinite(i.truth.value))
              throw Error(ErrorCode::validation, "non-finite ground truth");
          } catch (const Error& e) {
            std::printf("%s x %s: %s\n", i.task.id.c_str(), i.scenario_id.c_str(), e.what());
            ++problems;
          }
        }
        std::printf("%zu instances, %zu exclusions, %d problems\n", cat.instances.size(),
                    cat.exclusions.size(), problems);
        return problems == 0 ? 0 : 1;
      }
      if (cat_json) {
        std::cout << tasks::manifest(cat, cat_truth).dump(2) << "\n";
        return 0;
      }
      for (const auto& i : cat.instances) {
        std::printf("%-26s %-24s %8.2f%%", i.task.id.c_str(), i.scenario_id.c_str(),
                    i.task.threshold_pct);
        if (cat_truth) {
          if (i.truth.flag) std::printf("  %s", *i.truth.flag ? "True" : "False");
          else std::printf("  %.6g %s", i.truth.value, i.truth.unit.c_str());
        }
        std::printf("\n");
      }
      for (const auto& x : cat.exclusions)
        std::printf("excluded %-17s %-24s %s\n", x.task_id.c_str(), x.scenario_id.c_str(),
                    x.reason.c_str());
      return 0;
    }

    if (base_cmd->parsed()) {
      auto gw = gateway::Gateway::from_config(common.config());
      const auto report = eval::baseline_gap_report(gw->store(), gw->catalog(), parse_n_list(base_n));
      std::cout << report.table();
      if (!base_out.empty()) {
        spit(std::filesystem::path(base_out) / "gaps.txt", report.table());
        spit(std::filesystem::path(base_out) / "gaps.json", report.json().dump(2) + "\n");
        spit(std::filesystem::path(base_out) / "gaps.svg", report.svg());
      }
      return 0;
    }

    if (thr_cmd->parsed()) {
      auto gw = gateway::Gateway::from_config(common.config());
      const auto th = eval::compute_thresholds(gw->store(), gw->catalog(), thr_n);
      if (thr_json) {
        json out = json::array();
        for (const auto& t : th)
          out.push_back({{"task", t.task_id},
                         {"median_gap_pct", std::isfinite(t.median_gap_pct) ? json(t.median_gap_pct) : json(nullptr)},
                         {"threshold_pct", t.threshold_pct},
                         {"pairs", t.pairs},
                         {"warnings", t.warnings}});
        std::cout << out.dump(2) << "\n";
        return 0;
      }
      std::printf("%-26s %12s %12s %6s\n", "task", "median_gap_%", "threshold_%", "pairs");
      for (const auto& t : th) {
        std::printf("%-26s %12.4g %12.4g %6zu\n", t.task_id.c_str(), t.median_gap_pct,
                    t.threshold_pct, t.pairs);
        for (const auto& w : t.warnings) std::printf("  warning: %s\n", w.c_str());
      }
      return 0;
    }

    if (serve_cmd->parsed()) {
      const auto config = common.config();
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      auto gw = gateway::Gateway::from_config(config);
      gateway::Server server(*gw, config.bind);
      server.start();
      const auto [host, _] = gateway::split_bind(config.bind);
      std::cout << "listening on " << host << ":" << server.port() << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
      return 0;
    }

    if (run_cmd->parsed()) {
      auto config = common.config();
      if (run_budget > 0) config.budget = run_budget;
      auto gw = gateway::Gateway::from_config(config);
      gateway::SuiteOptions opt;
      opt.tasks = run_tasks;
      opt.scenarios = run_scenarios;
      opt.classes = run_classes;
      opt.repeats = run_repeats;
      opt.timeout_s = run_timeout;
      opt.parallel = run_parallel;
      if (run_protocol == "full") opt.protocol = env::Protocol::full();
      else if (run_protocol == "budget") opt.protocol = env::Protocol::budgeted(config.budget, config.per_call_cap);
      else throw Error(ErrorCode::validation, "--protocol must be budget or full");

      std::shared_ptr<env::TrajectoryStore> store(&gw->store(), [](env::TrajectoryStore*) {});
      std::unique_ptr<gateway::Agent> agent;
      std::unique_ptr<gateway::Server> server;
      if (run_agent == "expert") {
        agent = std::make_unique<gateway::ScriptedAgent>(store, 0);
      } else if (run_agent.rfind("uniform-", 0) == 0) {
        agent = std::make_unique<gateway::ScriptedAgent>(store, std::stoi(run_agent.substr(8)));
      } else if (run_agent == "command") {
        if (run_command.empty()) throw Error(ErrorCode::validation, "--agent command needs --command");
        server = std::make_unique<gateway::Server>(*gw, config.bind);
        server->start();
        const auto [host, _] = gateway::split_bind(config.bind);
        const std::string endpoint =
            (host == "0.0.0.0" ? std::string("127.0.0.1") : host) + ":" + std::to_string(server->port());
        agent = std::make_unique<gateway::CommandAgent>(run_command, endpoint);
      } else {
        throw Error(ErrorCode::validation, "unknown agent '" + run_agent + "'");
      }
      const auto result = gateway::run_suite(*gw, *agent, opt);
      if (server) server->stop();
      std::cout << result.report.table();
      for (const auto& [task, pct] : result.report.agents.front().per_task_pct)
        std::printf("  %-26s %6.1f%%\n", task.c_str(), pct);
      if (!run_report.empty()) spit(run_report, result.report.json().dump(2) + "\n");
      if (!config.results_dir.empty())
        spit(config.results_dir / "report.json", result.report.json().dump(2) + "\n");
      return 0;
    }

    if (score_cmd->parsed()) {
      auto gw = gateway::Gateway::from_config(common.config());
      auto runs = eval::runs_from_jsonl(slurp(score_runs));
      size_t changed = 0;
      for (auto& r : runs) {
        const bool keep_flag = std::any_of(r.flags.begin(), r.flags.end(), [](const std::string& f) {
          return f == "timeout" || f == "expired" || f == "agent_error" || f == "no_submission";
        });
        if (keep_flag) continue;
        const auto v = eval::score_answer(gw->catalog().find(r.task_id, r.scenario_id), r.submitted);
        changed += v.correct != r.correct;
        r.correct = v.correct;
        r.flags.clear();
        if (v.problem) r.flags.push_back(std::string(to_string(*v.problem)));
      }
      if (!score_out.empty()) spit(score_out, eval::to_jsonl(runs));
      const auto report = eval::aggregate(runs);
      std::cout << report.table();
      std::printf("%zu verdicts changed\n", changed);
      return 0;
    }

    if (an_cmd->parsed()) {
      int hits = 0;
      for (const auto& f : an_files) {
        const auto m = eval::detect_mass_assumption(slurp(f));
        std::string names;
        for (const auto& n : m.matched) names += (names.empty() ? "" : ",") + n;
        std::printf("%s\t%s\t%s\n", f.c_str(), m.found ? "mass_assumption" : "clean", names.c_str());
        hits += m.found;
      }
      std::printf("%d of %zu transcripts contain a mass assumption\n", hits, an_files.size());
      return 0;
    }

    if (rep_cmd->parsed()) {
      auto config = common.config();
      config.results_dir.clear();
      auto gw = gateway::Gateway::from_config(config);
      const bool same = gateway::replay_transcript(slurp(rep_file), *gw);
      std::cout << (same ? "identical" : "MISMATCH") << "\n";
      return same ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
