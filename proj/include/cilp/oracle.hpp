#pragma once

// Ground truth for tests: dense linear solves on finite state sets and Monte
// Carlo simulation. Nothing here is used by the LP path.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <type_traits>
#include <utility>
#include <vector>

#include "cilp/chains.hpp"
#include "cilp/error.hpp"
#include "cilp/measure.hpp"
#include "cilp/parallel.hpp"

namespace cilp {

/// What happens to transitions that leave the listed states: `reflect` folds
/// them back onto the diagonal (a closed chain), `kill` drops them (a leaky
/// block for exit problems).
enum class Boundary { reflect, kill };

namespace detail {

template <State S>
std::optional<std::size_t> position(const std::vector<S>& sorted, const S& x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end() || *it != x) return std::nullopt;
  return static_cast<std::size_t>(it - sorted.begin());
}

template <State S>
std::vector<S> sorted_unique(std::vector<S> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace detail

/// The matrix H restricted to a finite state list: P - I for a discrete-time
/// chain, Q for a continuous-time one. Rows and columns follow `states`.
template <State S>
struct FiniteGenerator {
  std::vector<S> states;
  Eigen::MatrixXd h;
  bool continuous = false;
};

template <State S>
FiniteGenerator<S> finite_generator(const DtChain<S>& chain, std::vector<S> states, Boundary boundary) {
  FiniteGenerator<S> gen{detail::sorted_unique(std::move(states)), {}, false};
  const auto n = static_cast<Eigen::Index>(gen.states.size());
  gen.h = -Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [y, p] : chain.out(gen.states[static_cast<std::size_t>(i)])) {
      if (auto j = detail::position(gen.states, y))
        gen.h(i, static_cast<Eigen::Index>(*j)) += p;
      else if (boundary == Boundary::reflect)
        gen.h(i, i) += p;
    }
  }
  return gen;
}

template <State S>
FiniteGenerator<S> finite_generator(const CtChain<S>& chain, std::vector<S> states, Boundary boundary) {
  FiniteGenerator<S> gen{detail::sorted_unique(std::move(states)), {}, true};
  const auto n = static_cast<Eigen::Index>(gen.states.size());
  gen.h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [y, q] : chain.out(gen.states[static_cast<std::size_t>(i)])) {
      auto j = detail::position(gen.states, y);
      if (j) {
        gen.h(i, static_cast<Eigen::Index>(*j)) += q;
        gen.h(i, i) -= q;
      } else if (boundary == Boundary::kill) {
        gen.h(i, i) -= q;
      }
    }
  }
  return gen;
}

template <State S>
struct StationaryResult {
  /// One stationary distribution per closed communicating class, ordered by
  /// the smallest state of the class. Together they span the solution set.
  std::vector<BoundedMeasure<S>> distributions;
  bool unique = true;
  double max_residual = 0;
};

namespace detail {

/// Strongly connected components of the positive off-diagonal pattern
/// (Tarjan), returned as sorted index lists.
inline std::vector<std::vector<std::size_t>> components(const Eigen::MatrixXd& h) {
  const auto n = static_cast<std::size_t>(h.rows());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v || !(h(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) > 0)) continue;
      if (index[u] < 0) {
        visit(u);
        low[v] = std::min(low[v], low[u]);
      } else if (on_stack[u]) {
        low[v] = std::min(low[v], index[u]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t u;
      do {
        u = stack.back();
        stack.pop_back();
        on_stack[u] = false;
        comp.push_back(u);
      } while (u != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Solves πH = 0, Σπ = 1 on each closed class of a finite generator (built
/// with Boundary::reflect). Up to 10^4 states.
template <State S>
StationaryResult<S> exact_stationary(const FiniteGenerator<S>& gen) {
  const auto n = gen.h.rows();
  if (n == 0 || n > 10000) throw PreconditionError("exact_stationary needs between 1 and 10^4 states");
  StationaryResult<S> result;
  for (const auto& comp : detail::components(gen.h)) {
    bool closed = true;
    for (std::size_t v : comp) {
      for (Eigen::Index u = 0; u < n && closed; ++u)
        if (u != static_cast<Eigen::Index>(v) && gen.h(static_cast<Eigen::Index>(v), u) > 0 &&
            !std::binary_search(comp.begin(), comp.end(), static_cast<std::size_t>(u)))
          closed = false;
    }
    if (!closed) continue;
    const auto k = static_cast<Eigen::Index>(comp.size());
    // Transposed balance equations with the last one replaced by Σπ = 1.
    Eigen::MatrixXd a(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        a(i, j) = gen.h(static_cast<Eigen::Index>(comp[static_cast<std::size_t>(j)]),
                        static_cast<Eigen::Index>(comp[static_cast<std::size_t>(i)]));
    a.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1;
    Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    std::vector<std::pair<S, double>> entries;
    for (Eigen::Index i = 0; i < k; ++i) {
      const std::size_t v = comp[static_cast<std::size_t>(i)];
      full(static_cast<Eigen::Index>(v)) = pi(i);
      entries.emplace_back(gen.states[v], std::max(0.0, pi(i)));
    }
    const double residual =
        std::max((full.transpose() * gen.h).cwiseAbs().maxCoeff(), std::abs(full.sum() - 1.0));
    result.max_residual = std::max(result.max_residual, residual);
    if (residual > 1e-10) throw ModelError("stationary solve residual above 1e-10", state_to_string(gen.states[comp[0]]));
    result.distributions.emplace_back(std::move(entries));
  }
  result.unique = result.distributions.size() == 1;
  return result;
}

template <State S>
struct OccupationResult {
  /// Expected visits (discrete time) or time spent (continuous time) per
  /// domain state before exit.
  BoundedMeasure<S> nu;
  /// Exit distribution over states outside the domain.
  BoundedMeasure<S> mu;
  double max_residual = 0;
  double spectral_radius = 0;
};

namespace detail {

template <class Chain, State S>
OccupationResult<S> occupation_from(const Chain& chain, const FiniteGenerator<S>& gen) {
  const auto n = gen.h.rows();
  if (n == 0) throw PreconditionError("exit domain is empty");
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  for (const auto& [x, m] : chain.initial) {
    auto i = position(gen.states, x);
    if (!i) throw PreconditionError("initial distribution puts mass outside the domain at " + state_to_string(x));
    gamma(static_cast<Eigen::Index>(*i)) += m;
  }

  // Exit is certain when the substochastic block (uniformized in continuous
  // time) has spectral radius below one.
  Eigen::MatrixXd block;
  if (gen.continuous) {
    const double scale = std::max(1.0, (-gen.h.diagonal()).maxCoeff());
    block = Eigen::MatrixXd::Identity(n, n) + gen.h / scale;
  } else {
    block = Eigen::MatrixXd::Identity(n, n) + gen.h;
  }
  const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(block, false).eigenvalues().cwiseAbs().maxCoeff();
  if (radius >= 1 - 1e-9)
    throw PreconditionError("exit not certifiably a.s.: spectral radius of the domain block is " +
                            std::to_string(radius));

  const Eigen::MatrixXd a = -gen.h.transpose();
  const Eigen::VectorXd nu = a.partialPivLu().solve(gamma);
  const double residual = (a * nu - gamma).cwiseAbs().maxCoeff();
  if (residual > 1e-10) throw ModelError("occupation solve residual above 1e-10");

  std::map<S, double> exits;
  std::vector<std::pair<S, double>> nu_entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    const S& x = gen.states[static_cast<std::size_t>(i)];
    nu_entries.emplace_back(x, nu(i));
    for (const auto& [y, rate] : chain.out(x))
      if (y != x && !position(gen.states, y)) exits[y] += nu(i) * rate;
  }
  return {BoundedMeasure<S>(std::move(nu_entries)), BoundedMeasure<S>({exits.begin(), exits.end()}), residual,
          radius};
}

}  // namespace detail

/// Occupation measure ν and exit distribution μ = νG for a finite domain:
/// solves (-H_D)ᵀ ν = γ with H_D the domain block.
template <State S>
OccupationResult<S> exact_occupation(const DtChain<S>& chain, std::vector<S> domain) {
  return detail::occupation_from(chain, finite_generator(chain, std::move(domain), Boundary::kill));
}

template <State S>
OccupationResult<S> exact_occupation(const CtChain<S>& chain, std::vector<S> domain) {
  return detail::occupation_from(chain, finite_generator(chain, std::move(domain), Boundary::kill));
}

// ---------------------------------------------------------------------------
// Monte Carlo.

template <State S>
struct SimulationResult {
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  std::size_t censored = 0;
  /// Exit state → fraction of paths; together with censored / n_paths these
  /// sum to one.
  std::map<S, double> frequency;
  std::map<S, double> standard_error;
  /// Mean occupation (visits or time) per domain state and its standard error.
  std::map<S, double> occupation;
  std::map<S, double> occupation_error;

  double censored_fraction() const { return n_paths ? static_cast<double>(censored) / n_paths : 0.0; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

template <State S>
const S& draw(const Transitions<S>& options, double total, std::mt19937_64& eng) {
  double u = unit_uniform(eng) * total;
  for (const auto& [x, p] : options) {
    if (u < p) return x;
    u -= p;
  }
  // Round-off: fall back to the last state with positive weight.
  for (auto it = options.rbegin(); it != options.rend(); ++it)
    if (it->second > 0) return it->first;
  return options.back().first;
}

template <State S>
struct PathOutcome {
  std::optional<S> exit;
  std::map<S, double> occupation;
};

template <State S>
PathOutcome<S> run_path(const DtChain<S>& chain, const std::function<bool(const S&)>& inside, std::size_t step_cap,
                        std::mt19937_64& eng) {
  PathOutcome<S> out;
  S x = draw(chain.initial, 1.0, eng);
  for (std::size_t step = 0; step < step_cap; ++step) {
    if (!inside(x)) {
      out.exit = x;
      return out;
    }
    out.occupation[x] += 1.0;
    const auto moves = chain.out(x);
    double total = 0;
    for (const auto& m : moves) total += m.second;
    x = draw(moves, total, eng);
  }
  if (!inside(x)) out.exit = x;
  return out;
}

template <State S>
PathOutcome<S> run_path(const CtChain<S>& chain, const std::function<bool(const S&)>& inside, std::size_t step_cap,
                        std::mt19937_64& eng) {
  PathOutcome<S> out;
  S x = draw(chain.initial, 1.0, eng);
  for (std::size_t step = 0; step < step_cap; ++step) {
    if (!inside(x)) {
      out.exit = x;
      return out;
    }
    const auto moves = chain.out(x);
    double rate = 0;
    for (const auto& m : moves) rate += m.second;
    if (!(rate > 0)) {
      out.occupation[x] = INFINITY;
      return out;
    }
    out.occupation[x] += -std::log1p(-unit_uniform(eng)) / rate;
    x = draw(moves, rate, eng);
  }
  if (!inside(x)) out.exit = x;
  return out;
}

}  // namespace detail

/// Simulates n_paths independent paths from γ until they leave the domain or
/// take step_cap jumps (censored). Path i uses mt19937_64 seeded with
/// splitmix64(seed + 0x9E3779B97F4A7C15 · (i + 1)); uniforms take the top 53
/// bits of one draw; jumps pick the first listed target whose cumulative
/// weight exceeds u · total; continuous-time holding times are
/// -log(1 - u) / rate with u drawn before the jump. Paths are processed in
/// blocks of 1024 whose partial sums are merged in block order, so the
/// output depends only on (seed, n_paths).
template <class Chain, State S = typename decltype(std::declval<Chain>().initial)::value_type::first_type>
SimulationResult<S> simulate_exit(const Chain& chain, const std::type_identity_t<std::function<bool(const S&)>>& inside,
                                  std::size_t n_paths, std::uint64_t seed, std::size_t step_cap,
                                  std::size_t workers = 1) {
  if (n_paths == 0) throw PreconditionError("simulate_exit needs at least one path");
  constexpr std::size_t kBlock = 1024;
  struct Partial {
    std::size_t censored = 0;
    std::map<S, double> exits;
    std::map<S, std::pair<double, double>> occ;  // sum, sum of squares
  };
  const std::size_t blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<Partial> partial(blocks);
  parallel_for(blocks, workers, [&](std::size_t b) {
    Partial& part = partial[b];
    const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      std::mt19937_64 eng(detail::splitmix64(seed + 0x9E3779B97F4A7C15ULL * (i + 1)));
      auto path = detail::run_path(chain, inside, step_cap, eng);
      if (path.exit)
        part.exits[*path.exit] += 1;
      else
        ++part.censored;
      for (const auto& [x, t] : path.occupation) {
        auto& acc = part.occ[x];
        acc.first += t;
        acc.second += t * t;
      }
    }
  });

  SimulationResult<S> res;
  res.seed = seed;
  res.n_paths = n_paths;
  std::map<S, std::pair<double, double>> occ;
  std::map<S, double> exits;
  for (const auto& part : partial) {
    res.censored += part.censored;
    for (const auto& [y, k] : part.exits) exits[y] += k;
    for (const auto& [x, acc] : part.occ) {
      occ[x].first += acc.first;
      occ[x].second += acc.second;
    }
  }
  const auto n = static_cast<double>(n_paths);
  for (const auto& [y, k] : exits) {
    const double p = k / n;
    res.frequency[y] = p;
    res.standard_error[y] = std::sqrt(p * (1 - p) / n);
  }
  for (const auto& [x, acc] : occ) {
    const double mean = acc.first / n;
    const double var = std::max(0.0, acc.second / n - mean * mean);
    res.occupation[x] = mean;
    res.occupation_error[x] = std::sqrt(var / n);
  }
  return res;
}

}  // namespace cilp
