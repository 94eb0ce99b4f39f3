#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cilp {

enum class Sense { minimize, maximize };

inline const char* to_string(Sense s) { return s == Sense::minimize ? "min" : "max"; }

using SparseRow = std::vector<std::pair<std::size_t, double>>;

struct EqualityRow {
  SparseRow row;
  double rhs = 0;
  std::string name;
};

/// lower ≤ row·x ≤ upper; either side may be infinite.
struct RangeRow {
  SparseRow row;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::string name;
};

/// A finite LP over x ≥ 0 (no upper bounds on variables).
struct LinearProgram {
  std::size_t n_vars = 0;
  std::vector<double> objective;
  Sense sense = Sense::minimize;
  std::vector<EqualityRow> equalities;
  std::vector<RangeRow> ranges;
  /// Optional, used only by the debug dump.
  std::vector<std::string> var_names;

  /// Throws std::invalid_argument on out-of-range indices, duplicate indices
  /// within a row, non-finite data, or lower > upper.
  void validate() const {
    if (objective.size() != n_vars) throw std::invalid_argument("objective length differs from n_vars");
    if (!var_names.empty() && var_names.size() != n_vars)
      throw std::invalid_argument("var_names length differs from n_vars");
    for (double c : objective)
      if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
    auto check_row = [&](const SparseRow& row, const std::string& name) {
      std::set<std::size_t> seen;
      for (const auto& [j, a] : row) {
        if (j >= n_vars) throw std::invalid_argument("row '" + name + "' references variable out of range");
        if (!seen.insert(j).second) throw std::invalid_argument("row '" + name + "' repeats a variable index");
        if (!std::isfinite(a)) throw std::invalid_argument("row '" + name + "' has a non-finite coefficient");
      }
    };
    for (const auto& e : equalities) {
      check_row(e.row, e.name);
      if (!std::isfinite(e.rhs)) throw std::invalid_argument("row '" + e.name + "' has a non-finite rhs");
    }
    for (const auto& r : ranges) {
      check_row(r.row, r.name);
      if (std::isnan(r.lower) || std::isnan(r.upper) || r.lower > r.upper || r.lower == INFINITY ||
          r.upper == -INFINITY)
        throw std::invalid_argument("row '" + r.name + "' has inconsistent bounds");
    }
  }
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical-failure";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> primal;
  double max_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
};

struct Tolerances {
  double feasibility = 1e-9;  ///< absolute constraint residual
  double optimality = 1e-8;   ///< relative objective optimality
  double pivot = 1e-11;       ///< smallest admissible pivot magnitude
};

/// Pluggable LP engine. Implementations must be stateless with respect to
/// solve() so that one instance can serve concurrent callers.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
  virtual std::string name() const = 0;
};

/// Raised by scheme layers when an LP they depend on is not solved to
/// optimality.
class LpFailure : public std::runtime_error {
 public:
  LpFailure(LpStatus status, const std::string& context)
      : std::runtime_error(context + ": LP " + to_string(status)), status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

inline double row_activity(const SparseRow& row, std::span<const double> x) {
  double s = 0;
  for (const auto& [j, a] : row) s += a * x[j];
  return s;
}

inline double objective_value(const LinearProgram& lp, std::span<const double> x) {
  double s = 0;
  for (std::size_t j = 0; j < lp.n_vars; ++j) s += lp.objective[j] * x[j];
  return s;
}

/// Largest absolute violation over equality rows, range sides and x ≥ 0.
inline double max_residual(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0;
  for (std::size_t j = 0; j < lp.n_vars; ++j) worst = std::max(worst, -x[j]);
  for (const auto& e : lp.equalities) worst = std::max(worst, std::abs(row_activity(e.row, x) - e.rhs));
  for (const auto& r : lp.ranges) {
    const double v = row_activity(r.row, x);
    worst = std::max(worst, r.lower - v);
    worst = std::max(worst, v - r.upper);
  }
  return worst;
}

// Debug dump: a line-oriented listing, one record per line, tokens separated
// by single spaces, reals printed with %.17g ("inf"/"-inf" for infinities).
// The format is documented in docs/lp_dump_format.md.

namespace detail {

inline std::string fmt_real(double v) {
  if (v == INFINITY) return "inf";
  if (v == -INFINITY) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& tok) {
  if (tok == "inf") return INFINITY;
  if (tok == "-inf") return -INFINITY;
  std::size_t used = 0;
  const double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::invalid_argument("bad real '" + tok + "'");
  return v;
}

inline void write_entries(std::ostream& os, const SparseRow& row) {
  os << ' ' << row.size();
  for (const auto& [j, a] : row) os << ' ' << j << ' ' << fmt_real(a);
}

inline SparseRow read_entries(std::istringstream& is) {
  std::size_t n = 0;
  if (!(is >> n)) throw std::invalid_argument("missing entry count");
  SparseRow row(n);
  for (auto& [j, a] : row) {
    std::string tok;
    if (!(is >> j >> tok)) throw std::invalid_argument("truncated row entries");
    a = parse_real(tok);
  }
  return row;
}

inline std::string name_or_dash(const std::string& s) { return s.empty() ? "-" : s; }
inline std::string dash_to_empty(const std::string& s) { return s == "-" ? std::string{} : s; }

}  // namespace detail

inline void write_lp_dump(std::ostream& os, const LinearProgram& lp) {
  os << "cilp-lp 1\n";
  os << "sense " << to_string(lp.sense) << '\n';
  os << "vars " << lp.n_vars << '\n';
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    os << "var " << j << ' ' << detail::name_or_dash(lp.var_names.empty() ? std::string{} : lp.var_names[j]) << ' '
       << detail::fmt_real(lp.objective[j]) << '\n';
  }
  for (const auto& e : lp.equalities) {
    os << "eq " << detail::name_or_dash(e.name) << ' ' << detail::fmt_real(e.rhs);
    detail::write_entries(os, e.row);
    os << '\n';
  }
  for (const auto& r : lp.ranges) {
    os << "range " << detail::name_or_dash(r.name) << ' ' << detail::fmt_real(r.lower) << ' '
       << detail::fmt_real(r.upper);
    detail::write_entries(os, r.row);
    os << '\n';
  }
  os << "end\n";
}

inline LinearProgram read_lp_dump(std::istream& in) {
  LinearProgram lp;
  std::string line;
  if (!std::getline(in, line) || line != "cilp-lp 1") throw std::invalid_argument("not a cilp-lp 1 dump");
  bool named = false;
  bool done = false;
  while (!done && std::getline(in, line)) {
    std::istringstream is(line);
    std::string kind;
    is >> kind;
    if (kind == "sense") {
      std::string s;
      is >> s;
      if (s != "min" && s != "max") throw std::invalid_argument("bad sense '" + s + "'");
      lp.sense = s == "min" ? Sense::minimize : Sense::maximize;
    } else if (kind == "vars") {
      is >> lp.n_vars;
      lp.objective.assign(lp.n_vars, 0.0);
      lp.var_names.assign(lp.n_vars, {});
    } else if (kind == "var") {
      std::size_t j = 0;
      std::string name, obj;
      if (!(is >> j >> name >> obj) || j >= lp.n_vars) throw std::invalid_argument("bad var line: " + line);
      lp.var_names[j] = detail::dash_to_empty(name);
      named = named || name != "-";
      lp.objective[j] = detail::parse_real(obj);
    } else if (kind == "eq") {
      EqualityRow e;
      std::string name, rhs;
      if (!(is >> name >> rhs)) throw std::invalid_argument("bad eq line: " + line);
      e.name = detail::dash_to_empty(name);
      e.rhs = detail::parse_real(rhs);
      e.row = detail::read_entries(is);
      lp.equalities.push_back(std::move(e));
    } else if (kind == "range") {
      RangeRow r;
      std::string name, lo, hi;
      if (!(is >> name >> lo >> hi)) throw std::invalid_argument("bad range line: " + line);
      r.name = detail::dash_to_empty(name);
      r.lower = detail::parse_real(lo);
      r.upper = detail::parse_real(hi);
      r.row = detail::read_entries(is);
      lp.ranges.push_back(std::move(r));
    } else if (kind == "end") {
      done = true;
    } else if (!kind.empty()) {
      throw std::invalid_argument("unknown record '" + kind + "'");
    }
  }
  if (!done) throw std::invalid_argument("dump is missing its end record");
  if (!named) lp.var_names.clear();
  lp.validate();
  return lp;
}

}  // namespace cilp
