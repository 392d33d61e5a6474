#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "gravbench/eval/eval.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/solvers/solvers.hpp"

namespace gravbench::eval {
namespace {

double numeric(const solvers::Estimate& e) { return e.flag ? (*e.flag ? 1.0 : 0.0) : e.value; }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::vector<PairGap> baseline_gaps(env::TrajectoryStore& store, const tasks::Catalog& catalog,
                                   int n) {
  std::vector<PairGap> out;
  for (const auto& inst : catalog.instances) {
    PairGap g;
    g.task_id = inst.task.id;
    g.scenario_id = inst.scenario_id;
    g.n = n;
    const sim::UnitSystem& units = store.scenario(inst.scenario_id).unit_system;
    try {
      auto full = env::create_session(store, inst.scenario_id, env::Protocol::full());
      g.full = numeric(solvers::solve_full(inst.task, *full, units));
      if (n == 0) {
        g.sampled = g.full;
      } else {
        auto s = env::create_session(store, inst.scenario_id, env::Protocol::budgeted(n, 10));
        g.sampled = numeric(solvers::solve_uniform(inst.task, *s, n, units));
      }
      g.gap_pct = g.full == 0.0 ? (g.sampled == 0.0 ? 0.0 : INFINITY)
                                : std::abs(g.sampled - g.full) / std::abs(g.full) * 100.0;
    } catch (const Error& e) {
      g.failure = e.what();
      g.gap_pct = std::nan("");
    }
    out.push_back(std::move(g));
  }
  return out;
}

Threshold compute_threshold(const tasks::TaskSpec& task, const std::vector<PairGap>& gaps,
                            const tasks::Catalog& catalog) {
  Threshold t;
  t.task_id = task.id;
  std::vector<double> usable;
  for (const auto& g : gaps) {
    if (g.task_id != task.id) continue;
    if (g.failure) {
      t.warnings.push_back(g.scenario_id + ": solver failed (" + *g.failure + ")");
      continue;
    }
    const auto& inst = catalog.find(g.task_id, g.scenario_id);
    if (!inst.truth.flag && inst.truth.value == 0.0) {
      t.warnings.push_back(g.scenario_id + ": zero ground truth, scored by absolute tolerance");
      continue;
    }
    usable.push_back(g.gap_pct);
  }
  t.pairs = usable.size();
  if (usable.empty()) {
    t.warnings.push_back("no usable pair; using the 70% cap");
    t.median_gap_pct = INFINITY;
    t.threshold_pct = 70.0;
    return t;
  }
  t.median_gap_pct = median(usable);
  t.threshold_pct = std::clamp(t.median_gap_pct, 5.0, 70.0);
  return t;
}

std::vector<Threshold> compute_thresholds(env::TrajectoryStore& store,
                                          const tasks::Catalog& catalog, int n) {
  const std::vector<PairGap> gaps = baseline_gaps(store, catalog, n);
  std::vector<Threshold> out;
  std::vector<std::string> seen;
  for (const auto& inst : catalog.instances) {
    if (std::find(seen.begin(), seen.end(), inst.task.id) != seen.end()) continue;
    seen.push_back(inst.task.id);
    out.push_back(compute_threshold(inst.task, gaps, catalog));
  }
  return out;
}

GapReport baseline_gap_report(env::TrajectoryStore& store, const tasks::Catalog& catalog,
                              const std::vector<int>& n_values) {
  GapReport r;
  r.n_values = n_values;
  for (int n : n_values) {
    auto g = baseline_gaps(store, catalog, n);
    r.gaps.insert(r.gaps.end(), g.begin(), g.end());
  }
  std::vector<PairGap> at100;
  for (const auto& g : r.gaps) {
    if (g.n == 100) at100.push_back(g);
  }
  if (at100.empty()) at100 = baseline_gaps(store, catalog, 100);
  std::vector<std::string> seen;
  for (const auto& inst : catalog.instances) {
    if (std::find(seen.begin(), seen.end(), inst.task.id) != seen.end()) continue;
    seen.push_back(inst.task.id);
    r.thresholds.push_back(compute_threshold(inst.task, at100, catalog));
  }
  return r;
}

std::string GapReport::table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %-24s %6s %14s %14s %12s\n", "task", "scenario", "N",
                "full", "sampled", "gap_%");
  out << line;
  for (const auto& g : gaps) {
    std::snprintf(line, sizeof line, "%-26s %-24s %6d %14.6g %14.6g %12s\n", g.task_id.c_str(),
                  g.scenario_id.c_str(), g.n, g.full, g.sampled,
                  g.failure ? "failed" : fmt("%.4g", g.gap_pct).c_str());
    out << line;
  }
  out << "\n";
  std::snprintf(line, sizeof line, "%-26s %12s %12s %6s\n", "task", "median_gap_%", "threshold_%",
                "pairs");
  out << line;
  for (const auto& t : thresholds) {
    std::snprintf(line, sizeof line, "%-26s %12.4g %12.4g %6zu\n", t.task_id.c_str(),
                  t.median_gap_pct, t.threshold_pct, t.pairs);
    out << line;
  }
  return out.str();
}

nlohmann::json GapReport::json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& p : gaps) {
    nlohmann::json e{{"task", p.task_id}, {"scenario", p.scenario_id}, {"n", p.n},
                     {"full", p.full},    {"sampled", p.sampled}};
    e["gap_pct"] = std::isfinite(p.gap_pct) ? nlohmann::json(p.gap_pct) : nlohmann::json(nullptr);
    if (p.failure) e["failure"] = *p.failure;
    g.push_back(std::move(e));
  }
  nlohmann::json t = nlohmann::json::array();
  for (const auto& th : thresholds) {
    t.push_back({{"task", th.task_id},
                 {"median_gap_pct", std::isfinite(th.median_gap_pct)
                                        ? nlohmann::json(th.median_gap_pct)
                                        : nlohmann::json(nullptr)},
                 {"threshold_pct", th.threshold_pct},
                 {"pairs", th.pairs},
                 {"warnings", th.warnings}});
  }
  return {{"n_values", n_values}, {"gaps", g}, {"thresholds", t}};
}

std::string GapReport::svg() const {
  const double col = 56.0, left = 70.0, top = 20.0, height = 360.0, bottom = 190.0;
  const double width = left + col * static_cast<double>(thresholds.size()) + 20.0;
  const double lo = -4.0, hi = 4.0;  // log10 of percent
  auto y_of = [&](double pct) {
    const double l = std::clamp(std::log10(std::max(pct, 1e-4)), lo, hi);
    return top + height * (hi - l) / (hi - lo);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
    << top + height + bottom << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); ++e) {
    const double y = y_of(std::pow(10.0, e));
    s << "<line x1=\"" << left << "\" x2=\"" << width - 20 << "\" y1=\"" << y << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << y + 3 << "\" text-anchor=\"end\">1e" << e
      << "%</text>\n";
  }
  const char* colours[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  for (size_t k = 0; k < thresholds.size(); ++k) {
    const double x = left + col * (static_cast<double>(k) + 0.5);
    const auto& th = thresholds[k];
    for (size_t ni = 0; ni < n_values.size(); ++ni) {
      size_t j = 0;
      for (const auto& g : gaps) {
        if (g.task_id != th.task_id || g.n != n_values[ni] || g.failure) continue;
        const double dx = -12.0 + 24.0 * (static_cast<double>(ni) + 0.5) /
                                      static_cast<double>(n_values.size()) + (j++ % 3) - 1.0;
        s << "<circle cx=\"" << x + dx << "\" cy=\"" << y_of(g.gap_pct) << "\" r=\"2.5\" fill=\""
          << colours[ni % 5] << "\" fill-opacity=\"0.7\"/>\n";
      }
    }
    const double ty = y_of(th.threshold_pct);
    s << "<line x1=\"" << x - col * 0.4 << "\" x2=\"" << x + col * 0.4 << "\" y1=\"" << ty
      << "\" y2=\"" << ty << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    s << "<text transform=\"translate(" << x << "," << top + height + 8
      << ") rotate(60)\">" << th.task_id << "</text>\n";
  }
  for (size_t ni = 0; ni < n_values.size(); ++ni) {
    s << "<circle cx=\"" << left + 10 << "\" cy=\"" << top + height + bottom - 20 - 14.0 * ni
      << "\" r=\"3\" fill=\"" << colours[ni % 5] << "\"/><text x=\"" << left + 18 << "\" y=\""
      << top + height + bottom - 17 - 14.0 * ni << "\">N = " << n_values[ni] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace gravbench::eval
