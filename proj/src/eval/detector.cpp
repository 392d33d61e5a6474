#include <algorithm>
#include <regex>
#include <sstream>

#include "gravbench/eval/eval.hpp"

namespace gravbench::eval {
namespace {

struct Pattern {
  const char* name;
  std::regex re;
};

const std::vector<Pattern>& patterns() {
  static const std::vector<Pattern> p = [] {
    const std::string col = R"(df\s*\[\s*['"]star)";
    const std::string mass = R"((?:star[12]_mass|mass[12]|m[12]))";
    std::vector<Pattern> v;
    v.push_back({"com_shortcut",
                 std::regex(R"(\(\s*)" + col + R"(([12])_([xyz])['"]\s*\]\s*\+\s*)" + col +
                            R"((?!\1)[12]_\2['"]\s*\]\s*\)\s*/\s*2(?![\d.]))")});
    v.push_back({"mass_literal",
                 std::regex(R"((?:^|[^\w.])()" + mass +
                            R"()\s*=(?!=)\s*[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?![\w.]))")});
    v.push_back({"mass_equated",
                 std::regex(R"((?:^|[^\w.])(star1_mass|mass1|m1|star2_mass|mass2|m2)\s*=(?!=)\s*)"
                            R"((star1_mass|mass1|m1|star2_mass|mass2|m2)\s*(?:$|[;#,)]))")});
    return v;
  }();
  return p;
}

bool same_star(const std::string& a, const std::string& b) {
  auto digit = [](const std::string& s) { return s.find('1') != std::string::npos ? 1 : 2; };
  return digit(a) == digit(b);
}

void scan_into(const std::string& code, MassAssumption& out) {
  std::istringstream lines(code);
  std::string line;
  auto add = [&](const char* name) {
    if (std::find(out.matched.begin(), out.matched.end(), name) == out.matched.end())
      out.matched.push_back(name);
    out.found = true;
  };
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (const auto& p : patterns()) {
      for (std::sregex_iterator it(line.begin(), line.end(), p.re), end; it != end; ++it) {
        if (std::string(p.name) == "mass_equated" && same_star((*it)[1], (*it)[2])) continue;
        add(p.name);
        break;
      }
    }
  }
}

std::vector<std::string> fenced_blocks(const std::string& text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string::npos) {
    const size_t body = text.find('\n', pos);
    if (body == std::string::npos) break;
    const size_t close = text.find("```", body);
    out.push_back(text.substr(body + 1, close == std::string::npos ? std::string::npos
                                                                   : close - body - 1));
    if (close == std::string::npos) break;
    pos = close + 3;
  }
  return out;
}

}  // namespace

MassAssumption scan_code(const std::string& code) {
  MassAssumption out;
  scan_into(code, out);
  return out;
}

MassAssumption detect_mass_assumption(const std::string& transcript_jsonl) {
  MassAssumption out;
  std::istringstream lines(transcript_jsonl);
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    const auto role = j.find("role");
    if (role == j.end() || !role->is_string()) continue;
    if (*role != "agent" && *role != "assistant") continue;
    if (auto c = j.find("code"); c != j.end() && c->is_string()) scan_into(*c, out);
    if (auto c = j.find("content"); c != j.end() && c->is_string()) {
      for (const auto& block : fenced_blocks(*c)) scan_into(block, out);
    }
  }
  return out;
}

}  // namespace gravbench::eval
