#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "cilp/state.hpp"

namespace cilp {

/// Absolute tolerance for model consistency checks (row sums, sign checks).
inline constexpr double kModelTolerance = 1e-9;

/// A countably-infinite LP over measures on a countable state set, exposed
/// through callbacks. Feasible points ρ satisfy ρ ≥ 0, ρH = φ, ρ(g) = 1 and
/// ρ(w) ≤ c, where H is Metzler and G is non-negative.
///
/// All accessors must be pure: the solver layers call them concurrently.
template <State S, State Y = S>
struct CilpModel {
  using StateType = S;
  using OutputType = Y;
  using Column = std::vector<std::pair<S, double>>;
  using GRow = std::vector<std::pair<Y, double>>;

  /// Support of column x of H as (x', h(x', x)), diagonal included.
  std::function<Column(const S&)> predecessors;
  /// Support of row x of H as (x'', h(x, x'')), diagonal included.
  std::function<Column(const S&)> successors;
  /// Finite support of row x of G as (y, g(x, y)).
  std::function<GRow(const S&)> g_row;
  /// Row sum g(x) = Σ_y g(x, y).
  std::function<double(const S&)> g_sum;
  std::function<double(const S&)> phi;
  /// Norm-like weight with finite sublevel sets.
  std::function<double(const S&)> w;
  /// Moment bound: ρ(w) ≤ c for every feasible ρ.
  double c = 0;
  /// Certified a_r ≥ sup_{w(x) ≥ r} g(x)/w(x), with a_r → 0.
  std::function<double(std::int64_t)> a_seq;
  /// Optional b_r ≥ sup_{w(x) ≥ r} Σ_{w(z) < r} h(x, z) / w(x); enables the
  /// slack-variable relaxation for models with infinite H columns.
  std::function<double(std::int64_t)> b_seq;
  /// Exactly the sublevel set {x : w(x) < r}, any order.
  std::function<std::vector<S>(std::int64_t)> enumerator;

  bool has_b_seq() const { return static_cast<bool>(b_seq); }
};

/// Breadth-first expansion of the sublevel set {w < r} from `seeds` over a
/// neighbour relation. States reachable only through states with w ≥ r are
/// not found; callers rely on sublevel sets being connected from the seeds.
/// Returns the states in canonical order.
template <State S, class Neighbors, class Weight>
std::vector<S> sublevel_bfs(std::span<const S> seeds, Neighbors&& neighbors, Weight&& w, std::int64_t r) {
  std::set<S> seen;
  std::deque<S> frontier;
  const double limit = static_cast<double>(r);
  for (const S& s : seeds) {
    if (w(s) < limit && seen.insert(s).second) frontier.push_back(s);
  }
  while (!frontier.empty()) {
    S x = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& [y, coeff] : neighbors(x)) {
      if (coeff == 0 || seen.count(y)) continue;
      if (w(y) < limit) {
        seen.insert(y);
        frontier.push_back(y);
      }
    }
  }
  return {seen.begin(), seen.end()};
}

/// Smallest integer m ≥ 0 with scale * m^degree ≥ r.
inline std::int64_t ceil_root(std::int64_t r, double degree, double scale = 1.0) {
  if (r <= 0) return 0;
  auto value = [&](std::int64_t m) {
    return static_cast<long double>(scale) * std::pow(static_cast<long double>(m), static_cast<long double>(degree));
  };
  const long double target = static_cast<long double>(r);
  auto m = static_cast<std::int64_t>(std::floor(std::pow(target / scale, 1.0L / degree)));
  if (m < 0) m = 0;
  while (m > 0 && value(m - 1) >= target) --m;
  while (value(m) < target) ++m;
  return m;
}

}  // namespace cilp
