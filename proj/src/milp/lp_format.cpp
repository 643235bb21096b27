#include <charconv>
#include <cmath>

#include "gridshed/milp.hpp"

namespace gridshed::milp {

namespace {

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return {buf, end};
}

void write_terms(std::string& out, const std::vector<Term>& terms, const std::vector<Variable>& vars) {
  if (terms.empty()) {
    out += " 0 " + (vars.empty() ? std::string("x") : vars.front().name);
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (first) {
      out += c < 0.0 ? " - " : " ";
    } else {
      out += c < 0.0 ? " - " : " + ";
    }
    out += number(std::abs(c)) + " " + vars[t.var].name;
    first = false;
  }
}

}  // namespace

std::string write_lp(const MilpProblem& problem) {
  const auto& vars = problem.variables();
  std::string out = "\\ gridshed problem: " + std::to_string(vars.size()) + " variables, " +
                    std::to_string(problem.constraints().size()) + " constraints\n";
  out += problem.objective().sense == ObjectiveSense::maximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  write_terms(out, problem.objective().terms, vars);
  if (const double c = problem.objective().constant; c != 0.0) {
    out += (c < 0.0 ? " - " : " + ") + number(std::abs(c));
  }
  out += "\nSubject To\n";
  std::size_t row = 0;
  for (const auto& con : problem.constraints()) {
    out += " " + (con.name.empty() ? "r" + std::to_string(row) : con.name) + ":";
    write_terms(out, con.terms, vars);
    switch (con.sense) {
      case RowSense::less_equal: out += " <= "; break;
      case RowSense::greater_equal: out += " >= "; break;
      case RowSense::equal: out += " = "; break;
    }
    out += number(con.rhs) + "\n";
    ++row;
  }
  out += "Bounds\n";
  for (const auto& v : vars) {
    if (v.type == VarType::binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out += " " + v.name + " = " + number(v.lower) + "\n";
    } else {
      out += " " + number(v.lower) + " <= " + v.name + " <= " + number(v.upper) + "\n";
    }
  }
  bool any_binary = false;
  for (const auto& v : vars) {
    if (v.type != VarType::binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += " " + v.name + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace gridshed::milp
