#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gravbench/eval/eval.hpp"
#include "gravbench/sim/units.hpp"

using namespace gravbench;
using namespace gravbench::eval;

namespace {

env::TrajectoryStore& store() {
  static auto s = env::TrajectoryStore::builtin();
  return *s;
}

tasks::TaskInstance make_instance(const std::string& task, double truth, const std::string& unit,
                                  double threshold) {
  tasks::TaskInstance inst;
  inst.task = tasks::find_task(task);
  inst.task.threshold_pct = threshold;
  inst.scenario_id = "synthetic";
  inst.truth.value = truth;
  inst.truth.unit = unit;
  inst.units = sim::UnitSystem::si();
  return inst;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GRAVBENCH_FIXTURES) + "/transcripts/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string agent_code_line(const std::string& code) {
  return nlohmann::json{{"role", "assistant"}, {"code", code}}.dump() + "\n";
}

RunRecord run(const std::string& agent, int repeat, const std::string& task, bool correct,
              int obs) {
  RunRecord r;
  r.agent_id = agent;
  r.protocol = "budget";
  r.repeat = repeat;
  r.task_id = task;
  r.scenario_id = "s";
  r.correct = correct;
  r.observations_used = obs;
  return r;
}

}  // namespace

TEST_CASE("scoring against the relative threshold") {
  const auto inst = make_instance("period", 100.0, "s", 5.0);
  CHECK(score_answer(inst, {104.0, "s", {}}).correct);
  CHECK(score_answer(inst, {95.0, "s", {}}).correct);
  CHECK_FALSE(score_answer(inst, {106.0, "s", {}}).correct);
  CHECK(score_answer(inst, {104.0, "s", {}}).error_pct == doctest::Approx(4.0));
}

TEST_CASE("gravity exponent range at the 70 percent cap") {
  const auto inst = make_instance("gravity_exponent", 0.03, "", 70.0);
  CHECK_FALSE(score_answer(inst, {0.052, "", {}}).correct);
  CHECK(score_answer(inst, {0.009, "", {}}).correct);
  CHECK(score_answer(inst, {0.051, "", {}}).correct);
  CHECK(score_answer(inst, {0.03, "", {}}).correct);
  CHECK_FALSE(score_answer(inst, {0.0089, "", {}}).correct);
}

TEST_CASE("submissions in other units are converted before scoring") {
  const auto inst = make_instance("periastron", 1.5e11, "m", 5.0);
  const Verdict v = score_answer(inst, {1.52e8, "km", {}});
  CHECK(v.correct);
  CHECK(v.converted == doctest::Approx(1.52e11));
  const Verdict au = score_answer(inst, {1.0, "AU", {}});
  CHECK(au.correct);
  const Verdict bad = score_answer(inst, {1.0, "kg", {}});
  CHECK_FALSE(bad.correct);
  REQUIRE(bad.problem);
  CHECK(*bad.problem == ErrorCode::unit);
  const Verdict nonsense = score_answer(inst, {1.0, "furlongs", {}});
  CHECK(nonsense.problem == ErrorCode::unit);
  const Verdict nan = score_answer(inst, {std::nan(""), "m", {}});
  CHECK(nan.problem == ErrorCode::format);
}

TEST_CASE("verdict is invariant to the unit the answer is expressed in") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> factor(0.8, 1.2);
  const auto m = make_instance("periastron", 2.0e11, "m", 5.0);
  const auto cm = make_instance("periastron", 2.0e13, "cm", 5.0);
  for (int i = 0; i < 200; ++i) {
    const double f = factor(rng);
    const Verdict a = score_answer(m, {2.0e11 * f, "m", {}});
    const Verdict b = score_answer(cm, {2.0e8 * f, "km", {}});
    const Verdict c = score_answer(m, {2.0e13 * f, "cm", {}});
    CHECK(a.correct == b.correct);
    CHECK(a.correct == c.correct);
    CHECK(a.error_pct == doctest::Approx(b.error_pct).epsilon(1e-9));
  }
}

TEST_CASE("zero truth and boolean tasks") {
  auto zero = make_instance("eccentricity", 0.0, "", 5.0);
  zero.task.absolute_tolerance = 0.01;
  CHECK(score_answer(zero, {0.005, "", {}}).correct);
  CHECK_FALSE(score_answer(zero, {0.02, "", {}}).correct);
  CHECK(std::isnan(score_answer(zero, {0.005, "", {}}).error_pct));

  auto bound = make_instance("is_bound", 1.0, "", 5.0);
  bound.truth.flag = true;
  CHECK(score_answer(bound, {0.0, "", true}).correct);
  CHECK_FALSE(score_answer(bound, {0.0, "", false}).correct);
  CHECK(score_answer(bound, {1.0, "", {}}).problem == ErrorCode::format);
}

TEST_CASE("threshold is the clamped median of usable gaps") {
  const auto cat = tasks::build_catalog(store(), {tasks::find_task("period")});
  REQUIRE(cat.instances.size() >= 3);
  const auto& task = cat.instances.front().task;
  auto gaps_with = [&](std::vector<double> values) {
    std::vector<PairGap> g;
    for (size_t i = 0; i < values.size() && i < cat.instances.size(); ++i)
      g.push_back({"period", cat.instances[i].scenario_id, 100, 1.0, 1.0, values[i], {}});
    return g;
  };
  CHECK(compute_threshold(task, gaps_with({1.0, 2.0, 3.0}), cat).threshold_pct == 5.0);
  CHECK(compute_threshold(task, gaps_with({10.0, 20.0, 30.0}), cat).threshold_pct == 20.0);
  CHECK(compute_threshold(task, gaps_with({100.0, 200.0, 300.0}), cat).threshold_pct == 70.0);
  CHECK(compute_threshold(task, gaps_with({10.0, 20.0, 30.0, 40.0}), cat).median_gap_pct ==
        doctest::Approx(25.0));

  auto failed = gaps_with({10.0, 20.0, 30.0});
  failed[2].failure = "insufficient_coverage";
  const Threshold t = compute_threshold(task, failed, cat);
  CHECK(t.pairs == 2);
  CHECK(t.median_gap_pct == doctest::Approx(15.0));
  CHECK(t.warnings.size() == 1);

  const Threshold none = compute_threshold(task, {}, cat);
  CHECK(none.threshold_pct == 70.0);
  CHECK_FALSE(none.warnings.empty());
}

TEST_CASE("gap report with full data on both sides is all zeros") {
  const auto cat = tasks::build_catalog(
      store(), {tasks::find_task("period"), tasks::find_task("max_speed_star1")});
  const GapReport r = baseline_gap_report(store(), cat, {0});
  REQUIRE(r.gaps.size() == cat.instances.size());
  for (const auto& g : r.gaps) {
    CHECK_FALSE(g.failure);
    CHECK(g.gap_pct == 0.0);
  }
  CHECK(r.thresholds.size() == 2);
  const auto j = r.json();
  CHECK(j["gaps"].size() == cat.instances.size());
  CHECK(r.svg().rfind("<svg", 0) == 0);
  CHECK(r.table().find("period") != std::string::npos);
}

TEST_CASE("sampled gaps shrink as observations grow") {
  const auto cat = tasks::build_catalog(store(), {tasks::find_task("period")});
  auto med = [&](int n) {
    std::vector<double> v;
    for (const auto& g : baseline_gaps(store(), cat, n))
      if (!g.failure) v.push_back(g.gap_pct);
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(med(400) <= med(40));
}

TEST_CASE("detector finds every listed mass-assumption pattern") {
  const std::vector<std::string> fixtures{
      "com = (df['star1_x'] + df['star2_x'])/2",
      "star1_mass = 1.0",
      "star2_mass = 1.0",
      "m1 = m2",
      "m1 = 1.0",
      "m2 = 1.0",
  };
  for (const auto& code : fixtures) {
    INFO(code);
    CHECK(scan_code(code).found);
    CHECK(detect_mass_assumption(agent_code_line(code)).found);
    const std::string fenced =
        nlohmann::json{{"role", "agent"}, {"content", "Here:\n```python\n" + code + "\n```\n"}}
            .dump();
    CHECK(detect_mass_assumption(fenced).found);
  }
  CHECK(scan_code("  cy = ( df[\"star1_y\"]+df[\"star2_y\"] ) / 2").found);
  CHECK(scan_code("m2=m1").found);
  CHECK(scan_code("star1_mass=star2_mass").found);
  CHECK(scan_code("mass1 = 2e30").found);
  CHECK(scan_code("x = f(m1=1)").found);
  CHECK(scan_code("m1 = 1.0e30 * ratio").found);
  CHECK(scan_code("m1 = m2").matched == std::vector<std::string>{"mass_equated"});
  CHECK(scan_code("cx = (df['star1_x'] + df['star2_x'])/2").matched ==
        std::vector<std::string>{"com_shortcut"});
}

TEST_CASE("detector ignores clean code, comparisons and non-agent text") {
  CHECK_FALSE(detect_mass_assumption(read_fixture("clean_kepler.jsonl")).found);
  CHECK_FALSE(detect_mass_assumption(read_fixture("environment_prompt.jsonl")).found);
  CHECK_FALSE(scan_code("if m1 == 1.0:").found);
  CHECK_FALSE(scan_code("m1 = m2 * q").found);
  CHECK_FALSE(scan_code("m1 = m1").found);
  CHECK_FALSE(scan_code("sm1 = 1.0").found);
  CHECK_FALSE(scan_code("# m1 = 1.0").found);
  CHECK_FALSE(scan_code("cx = (df['star1_x'] + df['star1_x'])/2").found);
  CHECK_FALSE(detect_mass_assumption("not json\n{\"role\": 3}\n").found);
}

TEST_CASE("aggregate: repeats give a mean and standard error") {
  std::vector<RunRecord> runs;
  const int correct_per_repeat[] = {20, 22, 24};
  for (int rep = 0; rep < 3; ++rep) {
    for (int i = 0; i < 100; ++i) {
      RunRecord r = run("a", rep, "t" + std::to_string(i % 5), i < correct_per_repeat[rep], 10);
      r.scenario_id = "s" + std::to_string(i);
      runs.push_back(r);
    }
  }
  const Report rep = aggregate(runs);
  REQUIRE(rep.agents.size() == 1);
  const auto& a = rep.agents[0];
  CHECK(a.score_pct == doctest::Approx(22.0));
  REQUIRE(a.standard_error);
  CHECK(*a.standard_error == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(a.repeats == 3);
  CHECK(a.instances == 100);
  CHECK(rep.warnings.empty());

  std::vector<RunRecord> single(runs.begin(), runs.begin() + 100);
  CHECK_FALSE(aggregate(single).agents[0].standard_error);
}

TEST_CASE("aggregate: mean observations and permutation invariance") {
  std::vector<RunRecord> runs{run("b", 0, "p", true, 10), run("b", 0, "q", false, 14)};
  runs[1].scenario_id = "s2";
  runs[0].cost = 0.5;
  runs[1].cost = 0.25;
  const Report r = aggregate(runs);
  CHECK(r.agents[0].mean_observations == doctest::Approx(12.0));
  CHECK(r.agents[0].score_pct == doctest::Approx(50.0));
  CHECK(*r.agents[0].total_cost == doctest::Approx(0.75));
  CHECK(r.agents[0].per_task_pct.at("p") == 100.0);

  std::vector<RunRecord> many;
  for (int rep = 0; rep < 4; ++rep)
    for (int i = 0; i < 30; ++i) {
      RunRecord x = run(i % 2 ? "x" : "y", rep, "t", (i * 7 + rep) % 3 == 0, i);
      x.scenario_id = "s" + std::to_string(i);
      many.push_back(x);
    }
  const std::string before = aggregate(many).json().dump();
  std::shuffle(many.begin(), many.end(), std::mt19937_64(3));
  CHECK(aggregate(many).json().dump() == before);
}

TEST_CASE("run records round trip through JSONL") {
  RunRecord r = run("agent", 2, "period", true, 37);
  r.submitted = {1.5, "s", {}};
  r.flags = {"timeout"};
  r.cost = 0.1;
  RunRecord b = run("agent", 0, "is_bound", false, 0);
  b.submitted.flag = false;
  const auto back = runs_from_jsonl(to_jsonl({r, b}));
  REQUIRE(back.size() == 2);
  CHECK(to_json(back[0]) == to_json(r));
  CHECK(to_json(back[1]) == to_json(b));
  CHECK_THROWS_AS(runs_from_jsonl("{\"task\": 1}\n"), Error);
}

TEST_CASE("shipped thresholds match the N = 100 baseline pipeline") {
  const auto cat = tasks::build_catalog(store());
  for (const auto& t : compute_thresholds(store(), cat, 100)) {
    INFO(t.task_id);
    CHECK(t.threshold_pct >= 5.0);
    CHECK(t.threshold_pct <= 70.0);
    CHECK(tasks::find_task(t.task_id).threshold_pct == doctest::Approx(t.threshold_pct).epsilon(0.001));
  }
}
