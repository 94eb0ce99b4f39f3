#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "cilp/error.hpp"
#include "cilp/measure.hpp"
#include "cilp/model.hpp"

namespace cilp {

/// The finite window X_r = {w < r} with its dense variable layout.
template <State S>
struct Truncation {
  std::int64_t r = 0;
  /// X_r in canonical order; position = LP variable index.
  std::vector<S> states;
  /// Indices of states whose whole H column support lies inside X_r. Only
  /// these keep their equality constraint.
  std::vector<std::size_t> equality_set;
  double a_r = 0;
  /// w ≥ r outside X_r, so 1/r bounds 1/w there.
  double complement_inverse_w_bound = 0;

  std::size_t size() const { return states.size(); }

  std::optional<std::size_t> index_of(const S& x) const {
    auto it = std::lower_bound(states.begin(), states.end(), x);
    if (it == states.end() || *it != x) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
  }

  bool contains(const S& x) const { return index_of(x).has_value(); }
};

namespace detail {

template <State S, State Y>
bool window_empty(const CilpModel<S, Y>& model, std::int64_t r) {
  return model.enumerator(r).empty();
}

/// Smallest r' > r with a non-empty window, probing by doubling then
/// bisecting. Gives up after `budget` doublings.
template <State S, State Y>
std::optional<std::int64_t> probe_minimal_r(const CilpModel<S, Y>& model, std::int64_t r, int budget) {
  std::int64_t lo = r, hi = r;
  for (int k = 0; k < budget; ++k) {
    if (hi > (INT64_MAX >> 1)) return std::nullopt;
    hi *= 2;
    if (!window_empty(model, hi)) break;
    lo = hi;
    if (k + 1 == budget) return std::nullopt;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (window_empty(model, mid))
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace detail

template <State S, State Y>
Truncation<S> build_truncation(const CilpModel<S, Y>& model, std::int64_t r, int probe_budget = 62) {
  if (r < 1) throw PreconditionError("truncation parameter r must be a positive integer");
  Truncation<S> t;
  t.r = r;
  t.states = model.enumerator(r);
  std::sort(t.states.begin(), t.states.end());
  t.states.erase(std::unique(t.states.begin(), t.states.end()), t.states.end());
  if (t.states.empty()) throw TruncationTooSmall(r, detail::probe_minimal_r(model, r, probe_budget));
  for (const S& x : t.states)
    if (!(model.w(x) < static_cast<double>(r)))
      throw ModelError("enumerator(" + std::to_string(r) + ") returned a state with w(x) >= r", state_to_string(x));

  for (std::size_t i = 0; i < t.states.size(); ++i) {
    bool interior = true;
    for (const auto& [xp, h] : model.predecessors(t.states[i])) {
      if (h != 0 && !t.contains(xp)) {
        interior = false;
        break;
      }
    }
    if (interior) t.equality_set.push_back(i);
  }
  t.a_r = model.a_seq(r);
  t.complement_inverse_w_bound = 1.0 / static_cast<double>(r);
  return t;
}

/// ρ restricted to X_r: masses outside the window are dropped.
template <State S>
BoundedMeasure<S> restrict(const BoundedMeasure<S>& measure, const Truncation<S>& trunc) {
  std::vector<std::pair<S, double>> kept;
  for (const auto& [x, m] : measure.entries())
    if (trunc.contains(x)) kept.emplace_back(x, m);
  return BoundedMeasure<S>(std::move(kept));
}

}  // namespace cilp
