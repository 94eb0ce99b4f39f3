#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "cilp/error.hpp"
#include "cilp/model.hpp"

namespace cilp {

enum class CheckStatus { pass, fail, not_checkable, certified };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_checkable: return "not-checkable";
    case CheckStatus::certified: return "certified";
  }
  return "?";
}

template <State S>
struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::vector<S> witnesses;
  std::string detail;
};

template <State S>
struct ValidationReport {
  std::int64_t horizon = 0;
  std::size_t window_size = 0;
  std::vector<CheckResult<S>> checks;

  /// True when no check failed.
  bool ok() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }

  const CheckResult<S>* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline constexpr std::size_t kMaxWitnesses = 8;

template <State S>
void record_failure(CheckResult<S>& check, const S& witness, const std::string& detail) {
  if (check.status != CheckStatus::fail) {
    check.status = CheckStatus::fail;
    check.detail = detail;
  }
  if (check.witnesses.size() < kMaxWitnesses) check.witnesses.push_back(witness);
}

}  // namespace detail

/// Checks the decidable parts of the standing assumptions on the window
/// X_R = enumerator(horizon):
///   norm_like        w ≥ 0, enumerator(r) nested and equal to {w < r} for r = R, R/2, ...
///   metzler          off-diagonal entries of H non-negative (column and row views)
///   g_nonnegative    G ≥ 0 and g_sum consistent with g_row
///   tail_certificate a_r positive; spot-checked against g/w on the window
///   reachability     w > 0, g > 0, or an H-path inside X_R to a state with g > 0
///   finite_columns   true by interface; b_seq presence noted
///
/// Throws ModelError when the enumerator returns a state with w(x) ≥ r.
template <State S, State Y>
ValidationReport<S> validate_assumptions(const CilpModel<S, Y>& model, std::int64_t horizon) {
  if (horizon < 1) throw PreconditionError("validation horizon must be at least 1");
  if (!model.enumerator || !model.predecessors || !model.successors || !model.g_row || !model.g_sum ||
      !model.phi || !model.w)
    throw ModelError("model is missing a required accessor");
  if (!model.a_seq) throw ModelError("model has no a_r tail certificate");

  ValidationReport<S> report;
  report.horizon = horizon;

  std::vector<S> window = model.enumerator(horizon);
  std::sort(window.begin(), window.end());
  window.erase(std::unique(window.begin(), window.end()), window.end());
  if (window.empty()) throw PreconditionError("enumerator(" + std::to_string(horizon) + ") is empty");
  report.window_size = window.size();
  std::set<S> members(window.begin(), window.end());

  std::vector<double> w_of(window.size()), g_of(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    w_of[i] = model.w(window[i]);
    g_of[i] = model.g_sum(window[i]);
    if (!(w_of[i] < static_cast<double>(horizon)))
      throw ModelError("enumerator(" + std::to_string(horizon) + ") returned a state with w(x) >= r",
                       state_to_string(window[i]));
  }

  CheckResult<S> norm_like{"norm_like", CheckStatus::pass, {}, {}};
  for (std::size_t i = 0; i < window.size(); ++i)
    if (w_of[i] < 0) detail::record_failure(norm_like, window[i], "w(x) < 0");
  for (std::int64_t r = horizon / 2; r >= 1; r /= 2) {
    auto sub = model.enumerator(r);
    std::set<S> sub_members(sub.begin(), sub.end());
    for (const S& x : sub) {
      if (!(model.w(x) < static_cast<double>(r)))
        throw ModelError("enumerator(" + std::to_string(r) + ") returned a state with w(x) >= r", state_to_string(x));
      if (!members.count(x))
        detail::record_failure(norm_like, x, "enumerator(" + std::to_string(r) + ") not contained in enumerator(R)");
    }
    for (std::size_t i = 0; i < window.size(); ++i)
      if (w_of[i] < static_cast<double>(r) && !sub_members.count(window[i]))
        detail::record_failure(norm_like, window[i],
                               "state with w(x) < " + std::to_string(r) + " missing from enumerator(" +
                                   std::to_string(r) + ")");
  }

  CheckResult<S> metzler{"metzler", CheckStatus::pass, {}, {}};
  CheckResult<S> g_check{"g_nonnegative", CheckStatus::pass, {}, {}};
  for (std::size_t i = 0; i < window.size(); ++i) {
    const S& x = window[i];
    for (const auto& [xp, h] : model.predecessors(x))
      if (xp != x && h < -kModelTolerance) detail::record_failure(metzler, x, "negative off-diagonal entry in column");
    for (const auto& [xs, h] : model.successors(x))
      if (xs != x && h < -kModelTolerance) detail::record_failure(metzler, x, "negative off-diagonal entry in row");
    double row_total = 0;
    for (const auto& [y, g] : model.g_row(x)) {
      if (g < -kModelTolerance) detail::record_failure(g_check, x, "negative entry in G");
      row_total += g;
    }
    if (std::abs(row_total - g_of[i]) > kModelTolerance)
      detail::record_failure(g_check, x, "g_sum disagrees with the sum of g_row");
  }

  CheckResult<S> tail{"tail_certificate", CheckStatus::certified, {}, "a_r accepted as certificate"};
  for (std::int64_t r = horizon; r >= 1; r /= 2) {
    const double a_r = model.a_seq(r);
    if (!(a_r > 0)) {
      detail::record_failure(tail, window.front(), "a_" + std::to_string(r) + " is not positive");
      break;
    }
    // States of the window outside X_r must respect the certificate.
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (w_of[i] < static_cast<double>(r)) continue;
      if (g_of[i] > a_r * w_of[i] * (1 + 1e-12) + kModelTolerance)
        detail::record_failure(tail, window[i], "g(x)/w(x) exceeds a_" + std::to_string(r));
    }
  }

  CheckResult<S> reach{"reachability", CheckStatus::pass, {}, {}};
  bool undecided = false;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (w_of[i] > 0 || g_of[i] > 0) continue;
    // Breadth-first search along positive off-diagonal H entries.
    std::set<S> seen{window[i]};
    std::deque<S> frontier{window[i]};
    bool found = false, left_window = false;
    while (!frontier.empty() && !found) {
      S x = frontier.front();
      frontier.pop_front();
      for (const auto& [y, h] : model.successors(x)) {
        if (y == x || !(h > 0) || seen.count(y)) continue;
        if (!members.count(y)) {
          left_window = true;
          continue;
        }
        if (model.g_sum(y) > 0) {
          found = true;
          break;
        }
        seen.insert(y);
        frontier.push_back(y);
      }
    }
    if (found) continue;
    if (left_window) {
      undecided = true;
      if (reach.witnesses.size() < detail::kMaxWitnesses && reach.status != CheckStatus::fail)
        reach.witnesses.push_back(window[i]);
    } else {
      if (reach.status != CheckStatus::fail) reach.witnesses.clear();
      detail::record_failure(reach, window[i], "w(x) = 0, g(x) = 0 and no H-path reaches a state with g > 0");
    }
  }
  if (reach.status != CheckStatus::fail && undecided) {
    reach.status = CheckStatus::not_checkable;
    reach.detail = "path search left the window before finding a state with g > 0";
  }

  CheckResult<S> columns{"finite_columns", CheckStatus::pass, {}, "column supports are finite lists by interface"};
  if (model.has_b_seq()) {
    columns.status = CheckStatus::certified;
    columns.detail = "b_r certificate present; relaxed LPs available for infinite columns";
  }

  report.checks = {std::move(norm_like), std::move(metzler), std::move(g_check),
                   std::move(tail),      std::move(reach),   std::move(columns)};
  return report;
}

}  // namespace cilp
