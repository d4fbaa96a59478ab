#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "robsched/mip.hpp"

namespace robsched {

namespace {

std::string num(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                 const MixedIntegerProgram& prog) {
  bool first = true;
  for (const auto& [col, coef] : terms) {
    if (coef == 0.0) continue;
    if (first) {
      if (coef < 0) os << "- ";
      first = false;
    } else {
      os << (coef < 0 ? " - " : " + ");
    }
    double a = std::fabs(coef);
    if (a != 1.0) os << num(a) << " ";
    os << prog.var_names[col];
  }
  if (first) os << "0";
}

}  // namespace

void write_lp_format(const MixedIntegerProgram& prog, std::ostream& os) {
  prog.validate();
  os << (prog.maximize ? "Maximize" : "Minimize") << "\n obj:";
  {
    std::vector<std::pair<int, double>> obj_terms;
    for (int j = 0; j < prog.num_vars(); ++j)
      if (prog.objective[j] != 0.0) obj_terms.push_back({j, prog.objective[j]});
    os << " ";
    write_terms(os, obj_terms, prog);
  }
  os << "\nSubject To\n";
  for (size_t i = 0; i < prog.rows.size(); ++i) {
    const auto& row = prog.rows[i];
    std::string name = row.name.empty() ? "c" : row.name;
    os << " " << name << "_" << i << ": ";
    write_terms(os, row.terms, prog);
    switch (row.rel) {
      case Relation::le: os << " <= "; break;
      case Relation::ge: os << " >= "; break;
      case Relation::eq: os << " = "; break;
    }
    os << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < prog.num_vars(); ++j) {
    double lo = prog.lower[j], hi = prog.upper[j];
    const std::string& v = prog.var_names[j];
    if (lo == -inf && hi == inf)
      os << " " << v << " free\n";
    else if (lo == hi)
      os << " " << v << " = " << num(lo) << "\n";
    else if (lo == -inf)
      os << " " << v << " <= " << num(hi) << "\n";
    else if (hi == inf)
      os << " " << v << " >= " << num(lo) << "\n";
    else
      os << " " << num(lo) << " <= " << v << " <= " << num(hi) << "\n";
  }
  bool any_bin = false, any_gen = false;
  for (int j = 0; j < prog.num_vars(); ++j)
    if (prog.is_integer[j]) {
      bool binary = prog.lower[j] >= -1e-9 && prog.upper[j] <= 1.0 + 1e-9;
      (binary ? any_bin : any_gen) = true;
    }
  if (any_bin) {
    os << "Binaries\n";
    for (int j = 0; j < prog.num_vars(); ++j)
      if (prog.is_integer[j] && prog.lower[j] >= -1e-9 && prog.upper[j] <= 1.0 + 1e-9)
        os << " " << prog.var_names[j] << "\n";
  }
  if (any_gen) {
    os << "Generals\n";
    for (int j = 0; j < prog.num_vars(); ++j)
      if (prog.is_integer[j] && !(prog.lower[j] >= -1e-9 && prog.upper[j] <= 1.0 + 1e-9))
        os << " " << prog.var_names[j] << "\n";
  }
  os << "End\n";
}

}  // namespace robsched
