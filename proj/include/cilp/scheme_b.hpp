#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cilp/assemble.hpp"
#include "cilp/lp.hpp"
#include "cilp/measure.hpp"
#include "cilp/model.hpp"
#include "cilp/objective.hpp"
#include "cilp/parallel.hpp"
#include "cilp/scheme_a.hpp"
#include "cilp/truncation.hpp"

namespace cilp {

template <State S>
struct MinimalPointApprox {
  std::int64_t r = 0;
  /// l^r(x) = min of ρ(x) over L_r, for each x ∈ X_r.
  BoundedMeasure<S> lower;
  double captured_mass = 0;
  /// max of ρ(X_r) over L_r.
  double u_indicator = 0;
  /// u_indicator + c/r - captured_mass; bounds the TV error of `lower`.
  double gamma = 0;
  std::vector<LpDiagnostics> per_state;
  LpDiagnostics indicator_lp;
  /// Experimental: u^r(x) = max of ρ(x) over L_r. Converges pointwise only.
  std::optional<BoundedMeasure<S>> upper;
  double solve_ms = 0;
};

template <State Y>
struct ImageLowerBound {
  std::int64_t r = 0;
  std::vector<Y> window;
  /// l_ψ^r(y) = min of ρ(g(·, y)) over L_r, for each y in the window.
  BoundedMeasure<Y> lower;
  /// 1 - Σ_y l_ψ^r(y): the mass of the unsigned difference to the true image.
  double mass_gap = 1;
  /// 1 - l^r(g) for the minimal-point lower measure, when one was supplied.
  std::optional<double> lower_point_gap;
  std::vector<LpDiagnostics> per_output;
  double solve_ms = 0;
};

namespace detail {

/// One LP layout, many objectives: the constraint rows do not depend on f.
template <State S, State Y>
LinearProgram constraint_template(const CilpModel<S, Y>& model, const Truncation<S>& trunc, Sense sense,
                                  const SolveOptions& opt) {
  return assemble(model, trunc, zero_objective<S>(), sense, opt);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Lower bounds l^r(x) on the minimal point, one min-LP per state of X_r,
/// plus the computable TV error bound Γ_r. The caller asserts that the
/// feasible set has a minimal point. Per-state solves run on opt.workers
/// threads and land in fixed slots, so the result does not depend on the
/// worker count.
template <State S, State Y>
MinimalPointApprox<S> minimal_point_lower(const CilpModel<S, Y>& model, const Truncation<S>& trunc,
                                          const SolveOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const LpSolver& solver = solver_of(opt);
  const std::size_t n = trunc.size();
  const LinearProgram base_min = detail::constraint_template(model, trunc, Sense::minimize, opt);

  std::vector<double> lower(n), upper(opt.experimental_upper ? n : 0);
  std::vector<LpDiagnostics> diag(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    LinearProgram lp = base_min;
    lp.objective[i] = 1.0;
    const std::string where = "state " + state_to_string(trunc.states[i]) + " at r=" + std::to_string(trunc.r);
    const LpSolution sol = detail::solve_checked(solver, lp, "lower bound for " + where);
    lower[i] = sol.objective;
    diag[i] = diagnostics_of(sol);
    if (opt.experimental_upper) {
      lp.sense = Sense::maximize;
      upper[i] = detail::solve_checked(solver, lp, "upper bound for " + where).objective;
    }
  });

  MinimalPointApprox<S> out;
  out.r = trunc.r;
  LinearProgram mass = detail::constraint_template(model, trunc, Sense::maximize, opt);
  for (std::size_t i = 0; i < n; ++i) mass.objective[i] = 1.0;
  const LpSolution mass_sol = detail::solve_checked(solver, mass, "window mass at r=" + std::to_string(trunc.r));
  out.u_indicator = mass_sol.objective;
  out.indicator_lp = diagnostics_of(mass_sol);

  std::vector<std::pair<S, double>> entries, upper_entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries.emplace_back(trunc.states[i], lower[i]);
    if (opt.experimental_upper) upper_entries.emplace_back(trunc.states[i], upper[i]);
  }
  out.lower = BoundedMeasure<S>::over(model, std::move(entries));
  if (opt.experimental_upper) out.upper = BoundedMeasure<S>::over(model, std::move(upper_entries));
  out.captured_mass = out.lower.total_mass();
  out.gamma = out.u_indicator + model.c * trunc.complement_inverse_w_bound - out.captured_mass;
  out.per_state = std::move(diag);
  out.solve_ms = detail::elapsed_ms(start);
  return out;
}

/// Lower bounds on the image ψ_m = ρ_m G of the minimal point over a finite
/// output window: one min-LP per y with f = g(·, y).
template <State S, State Y>
ImageLowerBound<Y> image_lower(const CilpModel<S, Y>& model, const Truncation<S>& trunc,
                               std::span<const Y> y_window, const SolveOptions& opt = {},
                               const MinimalPointApprox<S>* minimal = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const LpSolver& solver = solver_of(opt);
  const std::size_t n = trunc.size();
  std::vector<Y> window(y_window.begin(), y_window.end());
  std::sort(window.begin(), window.end());
  window.erase(std::unique(window.begin(), window.end()), window.end());

  // Column y of G restricted to the window; g_row is finite per state.
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(window.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [y, g] : model.g_row(trunc.states[i])) {
      auto it = std::lower_bound(window.begin(), window.end(), y);
      if (it != window.end() && *it == y) columns[static_cast<std::size_t>(it - window.begin())].emplace_back(i, g);
    }
  }

  const LinearProgram base = detail::constraint_template(model, trunc, Sense::minimize, opt);
  std::vector<double> values(window.size());
  std::vector<LpDiagnostics> diag(window.size());
  parallel_for(window.size(), opt.workers, [&](std::size_t k) {
    LinearProgram lp = base;
    for (const auto& [i, g] : columns[k]) lp.objective[i] = g;
    const LpSolution sol = detail::solve_checked(
        solver, lp, "image lower bound for output " + state_to_string(window[k]) + " at r=" + std::to_string(trunc.r));
    values[k] = sol.objective;
    diag[k] = diagnostics_of(sol);
  });

  ImageLowerBound<Y> out;
  out.r = trunc.r;
  std::vector<std::pair<Y, double>> entries;
  for (std::size_t k = 0; k < window.size(); ++k) entries.emplace_back(window[k], values[k]);
  out.lower = BoundedMeasure<Y>(std::move(entries));
  out.window = std::move(window);
  out.mass_gap = 1.0 - out.lower.total_mass();
  if (minimal) out.lower_point_gap = 1.0 - *minimal->lower.g_mass();
  out.per_output = std::move(diag);
  out.solve_ms = detail::elapsed_ms(start);
  return out;
}

/// Outputs reachable in one step from the window: the default Y_r.
template <State S, State Y>
std::vector<Y> reachable_outputs(const CilpModel<S, Y>& model, const Truncation<S>& trunc) {
  std::set<Y> ys;
  for (const S& x : trunc.states)
    for (const auto& [y, g] : model.g_row(x))
      if (g > 0) ys.insert(y);
  return {ys.begin(), ys.end()};
}

}  // namespace cilp
