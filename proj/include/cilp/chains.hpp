#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cilp/error.hpp"
#include "cilp/model.hpp"

namespace cilp {

template <State S>
using Transitions = std::vector<std::pair<S, double>>;

/// Discrete-time chain: out(x) lists (y, p(x, y)) and in(x) lists
/// (x', p(x', x)); both finite, self-loops allowed.
template <State S>
struct DtChain {
  std::function<Transitions<S>(const S&)> out;
  std::function<Transitions<S>(const S&)> in;
  /// Initial distribution γ, finitely supported.
  Transitions<S> initial;
  /// Starting points for sublevel-set enumeration.
  std::vector<S> seeds;
};

/// Continuous-time chain: out(x) lists (y, q(x, y)) for y ≠ x and in(x)
/// lists (x', q(x', x)) for x' ≠ x. The diagonal is -Σ_y q(x, y), so the
/// rate matrix is conservative by construction.
template <State S>
struct CtChain {
  std::function<Transitions<S>(const S&)> out;
  std::function<Transitions<S>(const S&)> in;
  Transitions<S> initial;
  std::vector<S> seeds;

  double exit_rate(const S& x) const {
    double total = 0;
    for (const auto& [y, q] : out(x))
      if (y != x) total += q;
    return total;
  }
};

template <State S>
struct Domain {
  std::function<bool(const S&)> contains;
  std::vector<S> seeds;
};

/// Checks one-step data on the given states: non-negative entries, rows of a
/// DtChain summing to one within 1e-12. Throws ModelError with a witness.
template <State S>
void validate_chain(const DtChain<S>& chain, const std::vector<S>& states) {
  for (const S& x : states) {
    double total = 0;
    for (const auto& [y, p] : chain.out(x)) {
      if (p < 0) throw ModelError("negative transition probability", state_to_string(x));
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ModelError("transition probabilities do not sum to one", state_to_string(x));
  }
}

template <State S>
void validate_chain(const CtChain<S>& chain, const std::vector<S>& states) {
  for (const S& x : states)
    for (const auto& [y, q] : chain.out(x)) {
      if (y == x) throw ModelError("rate list contains a diagonal entry", state_to_string(x));
      if (q < 0) throw ModelError("negative transition rate", state_to_string(x));
    }
}

namespace detail {

template <State S>
Transitions<S> merged(const Transitions<S>& entries) {
  std::map<S, double> acc;
  for (const auto& [x, v] : entries) acc[x] += v;
  return {acc.begin(), acc.end()};
}

template <State S>
Transitions<S> add_diagonal(Transitions<S> entries, const S& x, double diag) {
  entries.emplace_back(x, diag);
  return merged(entries);
}

template <State S>
Transitions<S> keep_inside(const Transitions<S>& entries, const Domain<S>& domain) {
  Transitions<S> kept;
  for (const auto& e : entries)
    if (domain.contains(e.first)) kept.push_back(e);
  return kept;
}

/// Sublevel enumeration over the undirected transition graph, followed by
/// the chain check on every state found.
template <class Chain, State S, class Weight>
std::function<std::vector<S>(std::int64_t)> chain_enumerator(const Chain& chain, std::vector<S> seeds, Weight w,
                                                             std::function<bool(const S&)> keep = {}) {
  return [chain, seeds = std::move(seeds), w, keep](std::int64_t r) {
    auto neighbors = [&](const S& x) {
      Transitions<S> all = chain.out(x);
      for (const auto& e : chain.in(x)) all.push_back(e);
      if (keep) {
        Transitions<S> kept;
        for (const auto& e : all)
          if (keep(e.first)) kept.push_back(e);
        return kept;
      }
      return all;
    };
    std::vector<S> start;
    for (const S& s : seeds)
      if (!keep || keep(s)) start.push_back(s);
    auto states = sublevel_bfs<S>(start, neighbors, w, r);
    validate_chain(chain, states);
    return states;
  };
}

template <State S>
std::vector<S> seeds_with_initial(std::vector<S> seeds, const Transitions<S>& initial) {
  for (const auto& [x, m] : initial) seeds.push_back(x);
  return seeds;
}

template <State S>
void require_initial_in(const Transitions<S>& initial, const Domain<S>& domain) {
  if (initial.empty()) throw PreconditionError("initial distribution is empty");
  double total = 0;
  for (const auto& [x, m] : initial) {
    if (m < 0) throw PreconditionError("initial distribution has negative mass at " + state_to_string(x));
    if (m > 0 && !domain.contains(x))
      throw PreconditionError("initial distribution puts mass outside the domain at " + state_to_string(x));
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("initial distribution does not sum to one");
}

inline void require_moment_bound(double c) {
  if (!(c > 0) || !std::isfinite(c)) throw ConfigError("moment bound c must be a positive finite number");
}

}  // namespace detail

/// Stationary distributions of a discrete-time chain: h = P - I, φ = 0,
/// G = I, a_r = 1/r.
template <State S>
CilpModel<S, S> dt_stationary(DtChain<S> chain, std::type_identity_t<std::function<double(const S&)>> w, double c) {
  detail::require_moment_bound(c);
  validate_chain(chain, chain.seeds);
  CilpModel<S, S> m;
  m.predecessors = [chain](const S& x) { return detail::add_diagonal(chain.in(x), x, -1.0); };
  m.successors = [chain](const S& x) { return detail::add_diagonal(chain.out(x), x, -1.0); };
  m.g_row = [](const S& x) { return Transitions<S>{{x, 1.0}}; };
  m.g_sum = [](const S&) { return 1.0; };
  m.phi = [](const S&) { return 0.0; };
  m.w = w;
  m.c = c;
  m.a_seq = [](std::int64_t r) { return 1.0 / static_cast<double>(r); };
  m.enumerator = detail::chain_enumerator(chain, chain.seeds, w);
  return m;
}

/// Stationary distributions of a continuous-time chain: h = Q, φ = 0, G = I,
/// a_r = 1/r.
template <State S>
CilpModel<S, S> ct_stationary(CtChain<S> chain, std::type_identity_t<std::function<double(const S&)>> w, double c) {
  detail::require_moment_bound(c);
  validate_chain(chain, chain.seeds);
  CilpModel<S, S> m;
  m.predecessors = [chain](const S& x) { return detail::add_diagonal(chain.in(x), x, -chain.exit_rate(x)); };
  m.successors = [chain](const S& x) { return detail::add_diagonal(chain.out(x), x, -chain.exit_rate(x)); };
  m.g_row = [](const S& x) { return Transitions<S>{{x, 1.0}}; };
  m.g_sum = [](const S&) { return 1.0; };
  m.phi = [](const S&) { return 0.0; };
  m.w = w;
  m.c = c;
  m.a_seq = [](std::int64_t r) { return 1.0 / static_cast<double>(r); };
  m.enumerator = detail::chain_enumerator(chain, chain.seeds, w);
  return m;
}

/// Occupation measure up to the exit time from D of a discrete-time chain:
/// 𝒳 = D, h = P - I restricted to D, φ = -γ, g(x, y) = p(x, y) for y ∉ D.
/// Rows of P are stochastic, so g ≤ 1 and a_r = 1/r.
template <State S>
CilpModel<S, S> dt_exit(DtChain<S> chain, Domain<S> domain, std::type_identity_t<std::function<double(const S&)>> w, double c) {
  detail::require_moment_bound(c);
  detail::require_initial_in(chain.initial, domain);
  validate_chain(chain, chain.seeds);
  CilpModel<S, S> m;
  m.predecessors = [chain, domain](const S& x) {
    return detail::add_diagonal(detail::keep_inside(chain.in(x), domain), x, -1.0);
  };
  m.successors = [chain, domain](const S& x) {
    return detail::add_diagonal(detail::keep_inside(chain.out(x), domain), x, -1.0);
  };
  m.g_row = [chain, domain](const S& x) {
    Transitions<S> row;
    for (const auto& [y, p] : chain.out(x))
      if (!domain.contains(y) && p != 0) row.emplace_back(y, p);
    return detail::merged(row);
  };
  m.g_sum = [g_row = m.g_row](const S& x) {
    double s = 0;
    for (const auto& [y, p] : g_row(x)) s += p;
    return s;
  };
  Transitions<S> initial = chain.initial;
  m.phi = [initial](const S& x) {
    double mass = 0;
    for (const auto& [s, p] : initial)
      if (s == x) mass += p;
    return -mass;
  };
  m.w = w;
  m.c = c;
  m.a_seq = [](std::int64_t r) { return 1.0 / static_cast<double>(r); };
  m.enumerator =
      detail::chain_enumerator(chain, detail::seeds_with_initial(domain.seeds, chain.initial), w, domain.contains);
  return m;
}

/// Occupation measure up to the exit time from D of a continuous-time chain,
/// with w(x) = (-q(x, x))^d. Since g(x) ≤ -q(x, x) = w(x)^(1/d), outside
/// {w < r} we get g/w ≤ w^((1-d)/d) ≤ r^((1-d)/d), which is the a_r used.
template <State S>
CilpModel<S, S> ct_exit(CtChain<S> chain, Domain<S> domain, double w_degree, double c) {
  if (!(w_degree > 1)) throw ConfigError("exit weight degree d must exceed 1");
  detail::require_moment_bound(c);
  detail::require_initial_in(chain.initial, domain);
  validate_chain(chain, chain.seeds);
  CilpModel<S, S> m;
  m.predecessors = [chain, domain](const S& x) {
    return detail::add_diagonal(detail::keep_inside(chain.in(x), domain), x, -chain.exit_rate(x));
  };
  m.successors = [chain, domain](const S& x) {
    return detail::add_diagonal(detail::keep_inside(chain.out(x), domain), x, -chain.exit_rate(x));
  };
  m.g_row = [chain, domain](const S& x) {
    Transitions<S> row;
    for (const auto& [y, q] : chain.out(x))
      if (!domain.contains(y) && q != 0) row.emplace_back(y, q);
    return detail::merged(row);
  };
  m.g_sum = [g_row = m.g_row](const S& x) {
    double s = 0;
    for (const auto& [y, q] : g_row(x)) s += q;
    return s;
  };
  Transitions<S> initial = chain.initial;
  m.phi = [initial](const S& x) {
    double mass = 0;
    for (const auto& [s, p] : initial)
      if (s == x) mass += p;
    return -mass;
  };
  std::function<double(const S&)> w = [chain, w_degree](const S& x) { return std::pow(chain.exit_rate(x), w_degree); };
  m.w = w;
  m.c = c;
  m.a_seq = [w_degree](std::int64_t r) { return std::pow(static_cast<double>(r), (1.0 - w_degree) / w_degree); };
  m.enumerator =
      detail::chain_enumerator(chain, detail::seeds_with_initial(domain.seeds, chain.initial), w, domain.contains);
  return m;
}

// ---------------------------------------------------------------------------
// Families on the non-negative integers.

inline Domain<std::int64_t> integers_from(std::int64_t lo) {
  return {[lo](const std::int64_t& x) { return x >= lo; }, {lo}};
}

inline Domain<std::int64_t> integer_range(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> seeds;
  for (std::int64_t x = lo; x <= hi; ++x) seeds.push_back(x);
  return {[lo, hi](const std::int64_t& x) { return x >= lo && x <= hi; }, std::move(seeds)};
}

/// Birth-death chain on {0, 1, ...} (or {0..n-1} when birth(n-1) = 0) with
/// rates birth(x) for x → x+1 and death(x) for x → x-1, death(0) ignored.
inline CtChain<std::int64_t> family_birth_death(std::function<double(std::int64_t)> birth,
                                                std::function<double(std::int64_t)> death,
                                                std::int64_t start = 0) {
  CtChain<std::int64_t> chain;
  chain.out = [birth, death](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    const double b = birth(x);
    if (b < 0) throw ModelError("negative birth rate", std::to_string(x));
    if (b > 0) t.emplace_back(x + 1, b);
    if (x > 0) {
      const double d = death(x);
      if (d < 0) throw ModelError("negative death rate", std::to_string(x));
      if (d > 0) t.emplace_back(x - 1, d);
    }
    return t;
  };
  chain.in = [birth, death](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    if (x > 0 && birth(x - 1) > 0) t.emplace_back(x - 1, birth(x - 1));
    if (death(x + 1) > 0) t.emplace_back(x + 1, death(x + 1));
    return t;
  };
  chain.initial = {{start, 1.0}};
  chain.seeds = {start};
  return chain;
}

/// Finite birth-death chain from rate tables on {0..n-1}; birth.back() and
/// death.front() are ignored.
inline CtChain<std::int64_t> family_birth_death(std::vector<double> birth, std::vector<double> death,
                                                std::int64_t start = 0) {
  if (birth.size() != death.size() || birth.empty()) throw ConfigError("birth and death tables must have equal, non-zero length");
  for (std::size_t i = 0; i < birth.size(); ++i)
    if (birth[i] < 0 || death[i] < 0) throw ConfigError("rates must be non-negative (state " + std::to_string(i) + ")");
  const auto n = static_cast<std::int64_t>(birth.size());
  auto b = [birth, n](std::int64_t x) { return x >= 0 && x < n - 1 ? birth[static_cast<std::size_t>(x)] : 0.0; };
  auto d = [death, n](std::int64_t x) { return x > 0 && x < n ? death[static_cast<std::size_t>(x)] : 0.0; };
  return family_birth_death(b, d, start);
}

/// M/M/1 queue: arrivals at rate λ, services at rate μ.
inline CtChain<std::int64_t> family_mm1(double lambda, double mu) {
  if (!(lambda > 0) || !(mu > 0)) throw ConfigError("M/M/1 rates must be positive");
  return family_birth_death([lambda](std::int64_t) { return lambda; }, [mu](std::int64_t) { return mu; });
}

/// Linear birth-death: births at rate λx, deaths at rate μx; 0 is absorbing.
inline CtChain<std::int64_t> family_linear_birth_death(double lambda, double mu, std::int64_t start) {
  if (!(lambda > 0) || !(mu > 0)) throw ConfigError("birth-death rates must be positive");
  if (start < 1) throw ConfigError("linear birth-death start state must be at least 1");
  return family_birth_death([lambda](std::int64_t x) { return lambda * static_cast<double>(x); },
                            [mu](std::int64_t x) { return mu * static_cast<double>(x); }, start);
}

/// Random walk on {0, 1, ...}: up with probability p, down with 1-p, and at
/// 0 the down move is replaced by staying put.
inline DtChain<std::int64_t> family_random_walk(double p_up, std::int64_t start = 0) {
  if (!(p_up > 0) || !(p_up < 1)) throw ConfigError("random walk p_up must lie in (0, 1)");
  if (start < 0) throw ConfigError("random walk start state must be non-negative");
  const double q = 1 - p_up;
  DtChain<std::int64_t> chain;
  chain.out = [p_up, q](const std::int64_t& x) {
    if (x == 0) return Transitions<std::int64_t>{{0, q}, {1, p_up}};
    return Transitions<std::int64_t>{{x - 1, q}, {x + 1, p_up}};
  };
  chain.in = [p_up, q](const std::int64_t& x) {
    if (x == 0) return Transitions<std::int64_t>{{0, q}, {1, q}};
    return Transitions<std::int64_t>{{x - 1, p_up}, {x + 1, q}};
  };
  chain.initial = {{start, 1.0}};
  chain.seeds = {start};
  return chain;
}

namespace detail {

inline void require_square(const std::vector<std::vector<double>>& m) {
  if (m.empty()) throw ConfigError("transition matrix is empty");
  for (const auto& row : m)
    if (row.size() != m.size()) throw ConfigError("transition matrix is not square");
}

}  // namespace detail

/// Chain on {0..n-1} from a dense row-stochastic matrix.
inline DtChain<std::int64_t> finite_dt_chain(std::vector<std::vector<double>> p,
                                             Transitions<std::int64_t> initial = {{0, 1.0}}) {
  detail::require_square(p);
  const auto n = static_cast<std::int64_t>(p.size());
  DtChain<std::int64_t> chain;
  chain.out = [p, n](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    if (x < 0 || x >= n) return t;
    for (std::int64_t y = 0; y < n; ++y)
      if (p[x][y] != 0) t.emplace_back(y, p[x][y]);
    return t;
  };
  chain.in = [p, n](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    if (x < 0 || x >= n) return t;
    for (std::int64_t y = 0; y < n; ++y)
      if (p[y][x] != 0) t.emplace_back(y, p[y][x]);
    return t;
  };
  chain.initial = std::move(initial);
  for (std::int64_t x = 0; x < n; ++x) chain.seeds.push_back(x);
  return chain;
}

/// Chain on {0..n-1} from a dense rate matrix; the diagonal is ignored and
/// recomputed from the off-diagonal rates.
inline CtChain<std::int64_t> finite_ct_chain(std::vector<std::vector<double>> q,
                                             Transitions<std::int64_t> initial = {{0, 1.0}}) {
  detail::require_square(q);
  const auto n = static_cast<std::int64_t>(q.size());
  CtChain<std::int64_t> chain;
  chain.out = [q, n](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    if (x < 0 || x >= n) return t;
    for (std::int64_t y = 0; y < n; ++y)
      if (y != x && q[x][y] != 0) t.emplace_back(y, q[x][y]);
    return t;
  };
  chain.in = [q, n](const std::int64_t& x) {
    Transitions<std::int64_t> t;
    if (x < 0 || x >= n) return t;
    for (std::int64_t y = 0; y < n; ++y)
      if (y != x && q[y][x] != 0) t.emplace_back(y, q[y][x]);
    return t;
  };
  chain.initial = std::move(initial);
  for (std::int64_t x = 0; x < n; ++x) chain.seeds.push_back(x);
  return chain;
}

/// w(x) = scale · x^degree on integer states.
inline std::function<double(const std::int64_t&)> monomial_weight(double degree, double scale = 1.0) {
  return [degree, scale](const std::int64_t& x) { return scale * std::pow(static_cast<double>(x), degree); };
}

/// Sublevel window of a monomial weight on {lo, lo+1, ...}, enumerated
/// directly; used to cross-check the breadth-first enumerators.
inline std::vector<std::int64_t> monomial_window(std::int64_t r, double degree, double scale = 1.0, std::int64_t lo = 0) {
  std::vector<std::int64_t> xs;
  const auto w = monomial_weight(degree, scale);
  for (std::int64_t x = lo; w(x) < static_cast<double>(r); ++x) xs.push_back(x);
  return xs;
}

/// b_r for a nearest-neighbour chain on the integers with increasing w: the
/// only state outside {w < r} with a transition into it is the first one
/// above the window, whose downward coefficient is at most `max_down`, and
/// its weight is at least r.
inline std::function<double(std::int64_t)> nearest_neighbour_b_seq(double max_down) {
  return [max_down](std::int64_t r) { return max_down / static_cast<double>(r); };
}

// ---------------------------------------------------------------------------
// Closed-form moments for the shipped families.

/// Eulerian numbers A(k, m), m = 0..k-1 (A(0, 0) = 1).
inline std::vector<double> eulerian_row(int k) {
  std::vector<double> row{1.0};
  for (int n = 2; n <= k; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int m = 0; m < n; ++m) {
      const double keep = m < n - 1 ? (m + 1) * row[static_cast<std::size_t>(m)] : 0.0;
      const double bump = m > 0 ? (n - m) * row[static_cast<std::size_t>(m - 1)] : 0.0;
      next[static_cast<std::size_t>(m)] = keep + bump;
    }
    row = std::move(next);
  }
  return row;
}

/// Σ_x x^k (1-ρ) ρ^x for the geometric law on {0, 1, ...}, via
/// Σ_x x^k ρ^x = ρ A_k(ρ) / (1-ρ)^(k+1) with A_k the Eulerian polynomial.
inline double geometric_moment(double rho, int k) {
  if (!(rho > 0 && rho < 1)) throw ConfigError("geometric ratio must lie in (0, 1)");
  if (k < 0) throw ConfigError("moment order must be non-negative");
  if (k == 0) return 1.0;
  const auto row = eulerian_row(k);
  double poly = 0, power = 1;
  for (double a : row) {
    poly += a * power;
    power *= rho;
  }
  return rho * poly / std::pow(1 - rho, k);
}

/// E_π[X^k] for the stationary M/M/1 queue (requires λ < μ).
inline double mm1_stationary_moment(double lambda, double mu, int k) {
  if (!(lambda < mu)) throw ConfigError("M/M/1 closed forms need lambda < mu");
  return geometric_moment(lambda / mu, k);
}

/// E_π[X^k] for the reflected random walk (requires p_up < 1/2); its
/// stationary law is geometric with ratio p/(1-p).
inline double random_walk_stationary_moment(double p_up, int k) {
  if (!(p_up > 0 && p_up < 0.5)) throw ConfigError("random walk closed forms need 0 < p_up < 1/2");
  return geometric_moment(p_up / (1 - p_up), k);
}

/// E[Σ_{t < σ} X_t^k] for the walk started at x0 ≥ 1 and stopped on hitting
/// 0, k ∈ {0, 1, 2}, p_up < 1/2. Solves V - PV = x^k with V(0) = 0 by a
/// polynomial of degree k+1 in the drift δ = 2p - 1.
inline double random_walk_exit_moment(double p_up, std::int64_t x0, int k) {
  if (!(p_up > 0 && p_up < 0.5)) throw ConfigError("random walk closed forms need 0 < p_up < 1/2");
  if (x0 < 1) throw ConfigError("exit start state must be at least 1");
  const double d = 2 * p_up - 1;
  const auto x = static_cast<double>(x0);
  switch (k) {
    case 0: return x / -d;
    case 1: {
      const double a = -1 / (2 * d), b = 1 / (2 * d * d);
      return a * x * x + b * x;
    }
    case 2: {
      const double a = -1 / (3 * d);
      const double b = -3 * a / (2 * d);
      const double e = -(a * d + b) / d;
      return a * x * x * x + b * x * x + e * x;
    }
    default: throw ConfigError("random walk exit moments are shipped for k = 0, 1, 2 only");
  }
}

/// E[∫_0^σ w(X_t) dt] for the linear birth-death chain started at x0 and
/// stopped at 0, with w(x) = ((λ+μ)x)^2 (requires λ < μ). Solves
/// QV = -w with V(0) = 0 by V(x) = a x^2 + b x.
inline double linear_birth_death_exit_moment(double lambda, double mu, std::int64_t x0) {
  if (!(lambda < mu)) throw ConfigError("linear birth-death closed forms need lambda < mu");
  const double s = lambda + mu;
  const double a = s * s / (2 * (mu - lambda));
  const double b = a * s / (mu - lambda);
  const auto x = static_cast<double>(x0);
  return a * x * x + b * x;
}

}  // namespace cilp
