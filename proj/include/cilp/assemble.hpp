#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cilp/error.hpp"
#include "cilp/lp.hpp"
#include "cilp/model.hpp"
#include "cilp/objective.hpp"
#include "cilp/truncation.hpp"

namespace cilp {

namespace detail {

template <State S>
std::vector<double> evaluate_on_window(const Objective<S>& f, const Truncation<S>& trunc) {
  std::vector<double> values(trunc.size());
  for (std::size_t i = 0; i < trunc.size(); ++i) {
    double v = 0;
    try {
      v = f.evaluate(trunc.states[i]);
    } catch (const std::exception& e) {
      throw ModelError("objective '" + f.name + "' failed to evaluate: " + e.what(),
                       state_to_string(trunc.states[i]));
    }
    if (!std::isfinite(v))
      throw ModelError("objective '" + f.name + "' is not finite", state_to_string(trunc.states[i]));
    values[i] = v;
  }
  return values;
}

template <State S>
std::string variable_name(const char* prefix, const S& x) {
  return std::string(prefix) + "[" + state_to_string(x) + "]";
}

/// The g-row 1 - c a_r ≤ ρ(g) ≤ 1 and the w-row ρ(w) ≤ c over the first
/// |X_r| variables.
template <State S, State Y>
void append_mass_rows(LinearProgram& lp, const CilpModel<S, Y>& model, const Truncation<S>& trunc) {
  RangeRow g_row{{}, 1.0 - model.c * trunc.a_r, 1.0, "g_mass"};
  RangeRow w_row{{}, -INFINITY, model.c, "w_moment"};
  for (std::size_t i = 0; i < trunc.size(); ++i) {
    const double g = model.g_sum(trunc.states[i]);
    const double w = model.w(trunc.states[i]);
    if (g != 0) g_row.row.emplace_back(i, g);
    if (w != 0) w_row.row.emplace_back(i, w);
  }
  lp.ranges.push_back(std::move(g_row));
  lp.ranges.push_back(std::move(w_row));
}

}  // namespace detail

/// The truncated LP L_r with objective f: one variable per state of X_r,
/// equality rows on E_r built from predecessor lists, plus the g- and w-rows.
template <State S, State Y>
LinearProgram assemble_outer_lp(const CilpModel<S, Y>& model, const Truncation<S>& trunc, const Objective<S>& f,
                                Sense sense) {
  LinearProgram lp;
  const std::size_t n = trunc.size();
  lp.n_vars = n;
  lp.sense = sense;
  lp.objective = detail::evaluate_on_window(f, trunc);
  lp.var_names.reserve(n);
  for (const S& x : trunc.states) lp.var_names.push_back(detail::variable_name("rho", x));

  for (std::size_t i : trunc.equality_set) {
    const S& x = trunc.states[i];
    std::map<std::size_t, double> coeffs;
    for (const auto& [xp, h] : model.predecessors(x)) {
      auto j = trunc.index_of(xp);
      if (!j) throw ModelError("predecessor outside the window in an interior column", state_to_string(x));
      coeffs[*j] += h;
    }
    EqualityRow row{{}, model.phi(x), detail::variable_name("balance", x)};
    for (const auto& [j, h] : coeffs)
      if (h != 0) row.row.emplace_back(j, h);
    lp.equalities.push_back(std::move(row));
  }
  detail::append_mass_rows(lp, model, trunc);
  return lp;
}

/// The slack relaxation: variables ρ(x) then ε(x) for x ∈ X_r, a balance row
/// for every state of the window, and Σ ε ≤ c b_r. Rows are built from the
/// successor lists of window states, so infinite columns are never touched.
template <State S, State Y>
LinearProgram assemble_relaxed_lp(const CilpModel<S, Y>& model, const Truncation<S>& trunc, const Objective<S>& f,
                                  Sense sense) {
  if (!model.has_b_seq()) throw ConfigError("relaxed mode needs a b_r certificate (b_seq) on the model");
  const double b_r = model.b_seq(trunc.r);
  if (!(b_r >= 0) || !std::isfinite(b_r)) throw ModelError("b_" + std::to_string(trunc.r) + " is not a finite non-negative number");

  LinearProgram lp;
  const std::size_t n = trunc.size();
  lp.n_vars = 2 * n;
  lp.sense = sense;
  lp.objective = detail::evaluate_on_window(f, trunc);
  lp.objective.resize(2 * n, 0.0);
  lp.var_names.reserve(2 * n);
  for (const S& x : trunc.states) lp.var_names.push_back(detail::variable_name("rho", x));
  for (const S& x : trunc.states) lp.var_names.push_back(detail::variable_name("eps", x));

  std::vector<std::map<std::size_t, double>> columns(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& [xs, h] : model.successors(trunc.states[j])) {
      auto i = trunc.index_of(xs);
      if (i) columns[*i][j] += h;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const S& x = trunc.states[i];
    EqualityRow row{{}, model.phi(x), detail::variable_name("balance", x)};
    for (const auto& [j, h] : columns[i])
      if (h != 0) row.row.emplace_back(j, h);
    row.row.emplace_back(n + i, 1.0);
    lp.equalities.push_back(std::move(row));
  }
  detail::append_mass_rows(lp, model, trunc);
  RangeRow slack{{}, -INFINITY, model.c * b_r, "slack_budget"};
  for (std::size_t i = 0; i < n; ++i) slack.row.emplace_back(n + i, 1.0);
  lp.ranges.push_back(std::move(slack));
  return lp;
}

}  // namespace cilp
