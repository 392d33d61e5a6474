#include <cmath>

#include "gravbench/eval/eval.hpp"
#include "gravbench/sim/units.hpp"

namespace gravbench::eval {

Verdict score_answer(const tasks::TaskInstance& instance, const Submission& submitted) {
  Verdict v;
  v.error_pct = std::nan("");
  if (tasks::is_boolean(instance.task.measure)) {
    if (!submitted.flag) {
      v.problem = ErrorCode::format;
      v.detail = "boolean task needs a true/false answer";
      return v;
    }
    v.converted = *submitted.flag ? 1.0 : 0.0;
    v.correct = *submitted.flag == instance.truth.flag.value_or(false);
    return v;
  }
  if (!std::isfinite(submitted.value)) {
    v.problem = ErrorCode::format;
    v.detail = "submitted value is not finite";
    return v;
  }
  try {
    const std::string& from = submitted.unit.empty() ? instance.truth.unit : submitted.unit;
    v.converted = sim::convert(submitted.value, sim::parse_unit(from),
                               sim::parse_unit(instance.truth.unit));
  } catch (const Error& e) {
    v.problem = ErrorCode::unit;
    v.detail = e.detail();
    return v;
  }
  const double truth = instance.truth.value;
  if (truth == 0.0) {
    v.correct = std::abs(v.converted) <= instance.task.absolute_tolerance;
    return v;
  }
  v.error_pct = std::abs(v.converted - truth) / std::abs(truth) * 100.0;
  // Slack for the decimal-to-binary rounding at the boundary of the interval.
  v.correct = v.error_pct <= instance.task.threshold_pct * (1.0 + 1e-12);
  return v;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"correct", v.correct}, {"converted", v.converted}};
  j["error_pct"] = std::isnan(v.error_pct) ? nlohmann::json(nullptr) : nlohmann::json(v.error_pct);
  if (v.problem) {
    j["problem"] = std::string(to_string(*v.problem));
    j["detail"] = v.detail;
  }
  return j;
}

}  // namespace gravbench::eval
