#pragma once

// Sampled function tables for plotting: a header row x,f1,f2,... and one row
// per grid point lo, lo+step, ..., hi.

#include "sohom/eval.hpp"
#include "sohom/fnexpr.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace sohom {

struct PlotTable {
  std::vector<Rat> xs;
  std::vector<std::vector<Real>> columns;  // columns[j][i] = f_j(xs[i])
};

inline PlotTable plot_table(const std::vector<FnExpr>& fs, const Rat& lo, const Rat& hi, const Rat& step) {
  if (lo < 0) throw DomainError("plot: range must start at x >= 0");
  if (step <= 0) throw DomainError("plot: step must be positive");
  if (hi < lo) throw DomainError("plot: empty range");
  PlotTable t;
  for (Rat x = lo; x <= hi; x += step) t.xs.push_back(x);
  t.columns.resize(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j)
    for (const Rat& x : t.xs) t.columns[j].push_back(eval(fs[j], Real(x)));
  return t;
}

/// CSV with "," separators and "\n" line ends.  Values are p/q when exact,
/// 12-digit decimals otherwise (or always with force_decimal).
inline void write_csv(std::ostream& out, const PlotTable& t, bool force_decimal = false) {
  out << "x";
  for (std::size_t j = 0; j < t.columns.size(); ++j) out << ",f" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < t.xs.size(); ++i) {
    out << Real(t.xs[i]).str(force_decimal);
    for (const auto& col : t.columns) out << ',' << col[i].str(force_decimal);
    out << '\n';
  }
}

}  // namespace sohom
