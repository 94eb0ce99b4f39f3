#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cilp/assemble.hpp"
#include "cilp/error.hpp"
#include "cilp/lp.hpp"
#include "cilp/measure.hpp"
#include "cilp/model.hpp"
#include "cilp/objective.hpp"
#include "cilp/parallel.hpp"
#include "cilp/simplex.hpp"
#include "cilp/truncation.hpp"

namespace cilp {

struct SolveOptions {
  /// Null means the embedded simplex with default tolerances.
  std::shared_ptr<const LpSolver> solver;
  /// Use the slack relaxation (needs b_seq on the model).
  bool relaxed = false;
  std::size_t workers = 1;
  /// Throw EnvelopeRequired instead of reporting a one-sided row.
  bool require_two_sided = false;
  /// Scheme B only: also compute per-state upper bounds u^r(x).
  bool experimental_upper = false;
};

inline const LpSolver& solver_of(const SolveOptions& opt) {
  static const RevisedSimplex embedded;
  return opt.solver ? *opt.solver : embedded;
}

struct LpDiagnostics {
  LpStatus status = LpStatus::numerical_failure;
  std::size_t iterations = 0;
  double max_residual = 0;
};

inline LpDiagnostics diagnostics_of(const LpSolution& s) { return {s.status, s.iterations, s.max_residual}; }

struct BoundResult {
  std::int64_t r = 0;
  std::size_t window_size = 0;
  std::optional<double> l_raw, u_raw;
  std::optional<double> l_corrected, u_corrected;
  /// c · sup_{x ∉ X_r} |f(x)|/w(x); absent when no envelope or finite support.
  std::optional<double> correction;
  bool one_sided = false;
  std::optional<double> gap, midpoint;
  LpDiagnostics min_lp, max_lp;
  double solve_ms = 0;
  /// Set when the row failed; the numeric fields are then absent.
  std::string error;

  bool ok() const { return error.empty(); }
};

namespace detail {

template <State S, State Y>
LinearProgram assemble(const CilpModel<S, Y>& model, const Truncation<S>& trunc, const Objective<S>& f, Sense sense,
                       const SolveOptions& opt) {
  return opt.relaxed ? assemble_relaxed_lp(model, trunc, f, sense) : assemble_outer_lp(model, trunc, f, sense);
}

inline LpSolution solve_checked(const LpSolver& solver, const LinearProgram& lp, const std::string& context) {
  LpSolution sol = solver.solve(lp);
  if (sol.status != LpStatus::optimal) throw LpFailure(sol.status, context);
  return sol;
}

/// Which sign conditions hold for f outside X_r, from the certificate or a
/// finite support contained in the window.
template <State S>
std::pair<bool, bool> sign_outside(const Objective<S>& f, const Truncation<S>& trunc) {
  bool nonneg = f.sign == SignCertificate::nonnegative_outside;
  bool nonpos = f.sign == SignCertificate::nonpositive_outside;
  if (f.finite_support) {
    const bool inside = std::all_of(f.finite_support->begin(), f.finite_support->end(),
                                    [&](const S& x) { return trunc.contains(x); });
    if (inside) nonneg = nonpos = true;
  }
  return {nonneg, nonpos};
}

/// A sign certificate must not contradict f on the states it can see.
template <State S>
void spot_check_sign(const Objective<S>& f, const Truncation<S>& trunc) {
  if (f.sign == SignCertificate::none) return;
  for (const S& x : trunc.states) {
    const double v = f.evaluate(x);
    if ((f.sign == SignCertificate::nonnegative_outside && v < -kModelTolerance) ||
        (f.sign == SignCertificate::nonpositive_outside && v > kModelTolerance))
      throw ModelError("objective '" + f.name + "' contradicts its sign certificate", state_to_string(x));
  }
}

}  // namespace detail

/// Lower and upper bounds on inf/sup of ρ(f) over the feasible set, from the
/// min and max LPs over L_r. The raw values are corrected by c · sup|f|/w
/// outside the window; a side whose sign condition holds keeps its raw value.
template <State S, State Y>
BoundResult bound_value(const CilpModel<S, Y>& model, const Truncation<S>& trunc, const Objective<S>& f,
                        const SolveOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::spot_check_sign(f, trunc);
  BoundResult out;
  out.r = trunc.r;
  out.window_size = trunc.size();

  const LpSolver& solver = solver_of(opt);
  const std::string where = "objective '" + f.name + "' at r=" + std::to_string(trunc.r);
  const LpSolution lo = detail::solve_checked(solver, detail::assemble(model, trunc, f, Sense::minimize, opt),
                                              "min " + where);
  const LpSolution hi = detail::solve_checked(solver, detail::assemble(model, trunc, f, Sense::maximize, opt),
                                              "max " + where);
  out.min_lp = diagnostics_of(lo);
  out.max_lp = diagnostics_of(hi);
  out.l_raw = lo.objective;
  out.u_raw = hi.objective;

  if (auto ratio = tail_sup_ratio(model, f, trunc.r)) out.correction = model.c * *ratio;
  const auto [nonneg, nonpos] = detail::sign_outside(f, trunc);
  if (nonneg)
    out.l_corrected = *out.l_raw;
  else if (out.correction)
    out.l_corrected = *out.l_raw - *out.correction;
  if (nonpos)
    out.u_corrected = *out.u_raw;
  else if (out.correction)
    out.u_corrected = *out.u_raw + *out.correction;

  out.one_sided = !(out.l_corrected && out.u_corrected);
  if (out.one_sided && opt.require_two_sided)
    throw EnvelopeRequired("objective '" + f.name +
                           "' has neither a tail envelope nor a finite support; a two-sided bound needs one");
  if (!out.one_sided) {
    out.gap = *out.u_corrected - *out.l_corrected;
    out.midpoint = 0.5 * (*out.u_corrected + *out.l_corrected);
  }
  out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// The primal point of the min or max LP as a measure on X_r.
template <State S, State Y>
BoundedMeasure<S> optimal_point(const CilpModel<S, Y>& model, const Truncation<S>& trunc, const Objective<S>& f,
                                Sense sense, const SolveOptions& opt = {}) {
  const LpSolution sol =
      detail::solve_checked(solver_of(opt), detail::assemble(model, trunc, f, sense, opt),
                            std::string(sense == Sense::minimize ? "min " : "max ") + "objective '" + f.name +
                                "' at r=" + std::to_string(trunc.r));
  std::vector<std::pair<S, double>> entries;
  entries.reserve(trunc.size());
  for (std::size_t i = 0; i < trunc.size(); ++i) entries.emplace_back(trunc.states[i], sol.primal[i]);
  return BoundedMeasure<S>::over(model, std::move(entries));
}

/// ψ = ρG through the finite G rows.
template <State S, State Y>
BoundedMeasure<Y> image_of(const CilpModel<S, Y>& model, const BoundedMeasure<S>& point) {
  std::map<Y, double> psi;
  for (const auto& [x, m] : point.entries())
    for (const auto& [y, g] : model.g_row(x)) psi[y] += m * g;
  return BoundedMeasure<Y>(std::vector<std::pair<Y, double>>(psi.begin(), psi.end()));
}

/// One bound row per r, each computed independently. Failures are recorded
/// in the row's error field and the sweep carries on.
template <State S, State Y>
std::vector<BoundResult> sweep(const CilpModel<S, Y>& model, const Objective<S>& f,
                               std::span<const std::int64_t> schedule, const SolveOptions& opt = {}) {
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw PreconditionError("r schedule must be strictly increasing");
  std::vector<BoundResult> rows(schedule.size());
  SolveOptions inner = opt;
  inner.workers = 1;
  parallel_for(schedule.size(), opt.workers, [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    try {
      rows[k] = bound_value(model, build_truncation(model, schedule[k]), f, inner);
    } catch (const EnvelopeRequired&) {
      throw;
    } catch (const std::exception& e) {
      rows[k] = BoundResult{};
      rows[k].r = schedule[k];
      rows[k].error = e.what();
      rows[k].solve_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  });
  return rows;
}

}  // namespace cilp
