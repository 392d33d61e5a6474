#include "gravbench/env/session.hpp"

#include <cmath>
#include <sstream>

namespace gravbench::env {

std::string Protocol::name() const {
  return kind == ProtocolKind::full_obs ? "full_obs" : "budget_obs";
}

nlohmann::json to_json(const ObservationRow& row) {
  return nlohmann::json::array(
      {row.time, row.star1.x, row.star1.y, row.star1.z, row.star2.x, row.star2.y, row.star2.z});
}

nlohmann::json to_json(const TranscriptEntry& e) {
  nlohmann::json out;
  if (e.kind == TranscriptEntry::Kind::observe) {
    out["request"] = {{"kind", "observe"}, {"times", e.times}};
  } else {
    out["request"] = {{"kind", "full_table"}};
  }
  if (e.error) {
    out["response"] = {{"error", std::string(to_string(*e.error))}, {"detail", e.error_detail}};
  } else if (e.kind == TranscriptEntry::Kind::observe) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : e.rows) rows.push_back(to_json(r));
    out["response"] = {{"rows", rows}};
  } else {
    out["response"] = {{"row_count", e.row_count}};
  }
  out["used"] = e.used_after;
  return out;
}

ObservationSession::ObservationSession(std::string scenario_id,
                                       std::shared_ptr<const ObservationTable> table,
                                       Protocol protocol)
    : scenario_id_(std::move(scenario_id)), table_(std::move(table)), protocol_(protocol) {
  if (!table_) throw Error(ErrorCode::not_found, "no trajectory for scenario " + scenario_id_);
  if (protocol_.kind == ProtocolKind::budget_obs &&
      (protocol_.budget < 0 || protocol_.per_call_cap < 1)) {
    throw Error(ErrorCode::validation, "budget must be >= 0 and the per-call cap >= 1");
  }
}

void ObservationSession::check_request(std::span<const double> times) const {
  if (protocol_.kind != ProtocolKind::budget_obs) {
    throw Error(ErrorCode::protocol, "observe is not available under full_obs; use full_table");
  }
  if (times.empty()) throw Error(ErrorCode::validation, "observe needs at least one time");
  if (static_cast<int>(times.size()) > protocol_.per_call_cap) {
    throw Error(ErrorCode::cap, "at most " + std::to_string(protocol_.per_call_cap) +
                                    " times per observe call, got " + std::to_string(times.size()));
  }
  for (double t : times) {
    if (!std::isfinite(t) || t < 0.0 || t > window_end()) {
      std::ostringstream msg;
      msg << "time " << t << " is outside the window [0, " << window_end() << "]";
      throw Error(ErrorCode::window, msg.str());
    }
  }
  if (used_ + static_cast<int>(times.size()) > protocol_.budget) {
    throw Error(ErrorCode::exhausted, "request for " + std::to_string(times.size()) +
                                          " observations exceeds the remaining budget of " +
                                          std::to_string(protocol_.budget - used_));
  }
}

std::vector<ObservationRow> ObservationSession::observe(std::span<const double> times) {
  std::lock_guard lock(mutex_);
  TranscriptEntry entry;
  entry.kind = TranscriptEntry::Kind::observe;
  entry.times.assign(times.begin(), times.end());
  try {
    check_request(times);
  } catch (const Error& e) {
    entry.error = e.code();
    entry.error_detail = e.detail();
    entry.used_after = used_;
    transcript_.push_back(std::move(entry));
    throw;
  }
  std::vector<ObservationRow> rows;
  rows.reserve(times.size());
  for (double t : times) rows.push_back(table_->at(t));
  used_ += static_cast<int>(rows.size());
  collected_.insert(collected_.end(), rows.begin(), rows.end());
  entry.rows = rows;
  entry.row_count = rows.size();
  entry.used_after = used_;
  transcript_.push_back(std::move(entry));
  return rows;
}

std::vector<ObservationRow> ObservationSession::full_table() {
  std::lock_guard lock(mutex_);
  TranscriptEntry entry;
  entry.kind = TranscriptEntry::Kind::full_table;
  if (protocol_.kind != ProtocolKind::full_obs) {
    entry.error = ErrorCode::protocol;
    entry.error_detail = "full_table is not available under budget_obs";
    entry.used_after = used_;
    transcript_.push_back(entry);
    throw Error(ErrorCode::protocol, entry.error_detail);
  }
  entry.row_count = table_->rows().size();
  transcript_.push_back(entry);
  return table_->rows();
}

int ObservationSession::used() const {
  std::lock_guard lock(mutex_);
  return used_;
}

int ObservationSession::remaining() const {
  std::lock_guard lock(mutex_);
  return protocol_.kind == ProtocolKind::budget_obs ? protocol_.budget - used_ : 0;
}

std::vector<ObservationRow> ObservationSession::collected() const {
  std::lock_guard lock(mutex_);
  return collected_;
}

std::vector<TranscriptEntry> ObservationSession::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_;
}

std::string ObservationSession::transcript_jsonl() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& e : transcript_) out += to_json(e).dump() + "\n";
  return out;
}

bool replay_matches(const std::vector<TranscriptEntry>& transcript, ObservationSession& fresh) {
  for (const auto& e : transcript) {
    if (e.kind != TranscriptEntry::Kind::observe) continue;
    try {
      const auto rows = fresh.observe(e.times);
      if (e.error || rows != e.rows) return false;
    } catch (const Error& err) {
      if (!e.error || *e.error != err.code()) return false;
    }
    if (fresh.used() != e.used_after) return false;
  }
  return true;
}

}  // namespace gravbench::env
