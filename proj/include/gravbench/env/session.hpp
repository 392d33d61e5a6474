#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravbench/env/table.hpp"
#include "gravbench/error.hpp"

namespace gravbench::env {

enum class ProtocolKind { full_obs, budget_obs };

struct Protocol {
  ProtocolKind kind = ProtocolKind::budget_obs;
  int budget = 100;       // N_obs; ignored for full_obs
  int per_call_cap = 10;  // times per observe call

  static Protocol full() { return {ProtocolKind::full_obs, 0, 0}; }
  static Protocol budgeted(int budget = 100, int cap = 10) {
    return {ProtocolKind::budget_obs, budget, cap};
  }
  std::string name() const;
};

/// One line of the session transcript.
struct TranscriptEntry {
  enum class Kind { observe, full_table };
  Kind kind = Kind::observe;
  std::vector<double> times;         // observe requests only
  std::vector<ObservationRow> rows;  // empty on error or for full_table
  size_t row_count = 0;
  std::optional<ErrorCode> error;
  std::string error_detail;
  int used_after = 0;
};

nlohmann::json to_json(const TranscriptEntry& e);
nlohmann::json to_json(const ObservationRow& row);

/// Budget-accounted window onto one scenario's dense table. Calls on one
/// session are serialized; failed calls charge nothing and leave the
/// collected log untouched.
class ObservationSession {
 public:
  ObservationSession(std::string scenario_id, std::shared_ptr<const ObservationTable> table,
                     Protocol protocol);

  ObservationSession(const ObservationSession&) = delete;
  ObservationSession& operator=(const ObservationSession&) = delete;

  /// Throws Error{protocol|validation|cap|window|exhausted}; never charges on error.
  std::vector<ObservationRow> observe(std::span<const double> times);
  /// Throws Error{protocol} under budget_obs.
  std::vector<ObservationRow> full_table();

  const std::string& scenario_id() const { return scenario_id_; }
  const Protocol& protocol() const { return protocol_; }
  double window_start() const { return 0.0; }
  double window_end() const { return table_->end_time(); }
  int used() const;
  int remaining() const;
  std::vector<ObservationRow> collected() const;
  std::vector<TranscriptEntry> transcript() const;

  /// Line-delimited transcript: one JSON object per call.
  std::string transcript_jsonl() const;

 private:
  void check_request(std::span<const double> times) const;

  std::string scenario_id_;
  std::shared_ptr<const ObservationTable> table_;
  Protocol protocol_;
  mutable std::mutex mutex_;
  int used_ = 0;
  std::vector<ObservationRow> collected_;
  std::vector<TranscriptEntry> transcript_;
};

/// Re-issues every observe request of `transcript` against `fresh` and
/// returns true when each reply (rows or error code) is identical.
bool replay_matches(const std::vector<TranscriptEntry>& transcript, ObservationSession& fresh);

}  // namespace gravbench::env
