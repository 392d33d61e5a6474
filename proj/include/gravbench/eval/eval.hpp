#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravbench/env/store.hpp"
#include "gravbench/error.hpp"
#include "gravbench/tasks/catalog.hpp"

namespace gravbench::eval {

// ---- scoring ---------------------------------------------------------------

struct Submission {
  double value = 0.0;
  std::string unit;
  std::optional<bool> flag;  // boolean tasks
};

struct Verdict {
  bool correct = false;
  double error_pct = 0.0;  // NaN for boolean or zero-truth tasks
  double converted = 0.0;  // submission in the instance's unit
  std::optional<ErrorCode> problem;  // unit or format trouble; always incorrect
  std::string detail;
};

/// Converts the submission to the instance unit and compares against the
/// task threshold (absolute tolerance when the truth is zero).
Verdict score_answer(const tasks::TaskInstance& instance, const Submission& submitted);

nlohmann::json to_json(const Verdict& v);

// ---- thresholds ------------------------------------------------------------

/// One baseline pair: expert estimate from N uniform observations against the
/// full-data expert estimate. n == 0 means the full table on both sides.
struct PairGap {
  std::string task_id;
  std::string scenario_id;
  int n = 0;
  double full = 0.0;
  double sampled = 0.0;
  double gap_pct = 0.0;
  std::optional<std::string> failure;  // solver error; pair excluded
};

std::vector<PairGap> baseline_gaps(env::TrajectoryStore& store, const tasks::Catalog& catalog,
                                   int n);

struct Threshold {
  std::string task_id;
  double median_gap_pct = 0.0;
  double threshold_pct = 0.0;  // median clamped to [5, 70]
  size_t pairs = 0;
  std::vector<std::string> warnings;
};

/// Median of the task's usable pair gaps, clamped to [5, 70]. Pairs with a
/// zero ground truth or a solver failure are excluded with a warning; a task
/// with no usable pair gets the 70% cap.
Threshold compute_threshold(const tasks::TaskSpec& task, const std::vector<PairGap>& gaps,
                            const tasks::Catalog& catalog);

std::vector<Threshold> compute_thresholds(env::TrajectoryStore& store,
                                          const tasks::Catalog& catalog, int n = 100);

struct GapReport {
  std::vector<int> n_values;
  std::vector<PairGap> gaps;
  std::vector<Threshold> thresholds;  // from the N = 100 gaps

  std::string table() const;
  nlohmann::json json() const;
  /// Static scatter plot: one column per task, dots per pair, a line per threshold.
  std::string svg() const;
};

GapReport baseline_gap_report(env::TrajectoryStore& store, const tasks::Catalog& catalog,
                              const std::vector<int>& n_values);

// ---- transcript analysis ----------------------------------------------------

struct MassAssumption {
  bool found = false;
  std::vector<std::string> matched;  // pattern names
};

/// Scans code for centre-of-mass shortcuts and hard-coded or equated masses.
MassAssumption scan_code(const std::string& code);

/// Scans a JSONL transcript (one {"role", "content", "code"} object per line).
/// Only agent/assistant records are read: their "code" fields and fenced code
/// blocks inside "content". Lines that are not JSON objects are ignored.
MassAssumption detect_mass_assumption(const std::string& transcript_jsonl);

// ---- run records and reports -----------------------------------------------

struct RunRecord {
  std::string task_id;
  std::string scenario_id;
  std::string agent_id;
  std::string protocol;
  int repeat = 0;
  Submission submitted;
  int observations_used = 0;
  double wall_time = 0.0;
  std::string transcript_ref;
  bool correct = false;
  std::vector<std::string> flags;  // "timeout", "unit", "format", ...
  std::optional<double> cost;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);
std::string to_jsonl(const std::vector<RunRecord>& runs);
std::vector<RunRecord> runs_from_jsonl(const std::string& text);

struct AgentSummary {
  std::string agent_id;
  std::string protocol;
  double score_pct = 0.0;
  std::optional<double> standard_error;  // present with >= 2 repeats
  double mean_observations = 0.0;
  std::optional<double> total_cost;
  size_t repeats = 0;
  size_t instances = 0;
  std::map<std::string, double> per_task_pct;
};

struct Report {
  std::vector<AgentSummary> agents;
  std::vector<std::string> warnings;

  std::string table() const;
  nlohmann::json json() const;
};

Report aggregate(const std::vector<RunRecord>& runs);

}  // namespace gravbench::eval
