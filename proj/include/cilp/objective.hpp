#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cilp/error.hpp"
#include "cilp/model.hpp"

namespace cilp {

enum class SignCertificate {
  none,
  nonnegative_outside,  ///< f(x) ≥ 0 outside every window
  nonpositive_outside,  ///< f(x) ≤ 0 outside every window
};

/// A function f on the state set together with the metadata needed to bound
/// its tail mass: either a certified envelope r ↦ sup_{w(x) ≥ r} |f(x)|/w(x)
/// or a declared finite support, plus an optional sign certificate.
template <State S>
struct Objective {
  std::string name;
  std::function<double(const S&)> evaluate;
  std::function<double(std::int64_t)> envelope;
  SignCertificate sign = SignCertificate::none;
  std::optional<std::vector<S>> finite_support;

  bool has_envelope() const { return static_cast<bool>(envelope); }
};

template <State S>
Objective<S> zero_objective() {
  return {"zero", [](const S&) { return 0.0; }, [](std::int64_t) { return 0.0; }, SignCertificate::nonnegative_outside,
          std::vector<S>{}};
}

/// f ≡ 1. Outside X_r we have w ≥ r, so the envelope is 1/r.
template <State S>
Objective<S> mass_objective() {
  return {"mass", [](const S&) { return 1.0; }, [](std::int64_t r) { return 1.0 / static_cast<double>(r); },
          SignCertificate::nonnegative_outside, std::nullopt};
}

template <State S>
Objective<S> indicator(const S& x0) {
  return {"indicator " + state_to_string(x0), [x0](const S& x) { return x == x0 ? 1.0 : 0.0; }, {},
          SignCertificate::nonnegative_outside, std::vector<S>{x0}};
}

/// Indicator of a finite set of states.
template <State S>
Objective<S> set_indicator(std::vector<S> states, std::string name = "set indicator") {
  std::set<S> members(states.begin(), states.end());
  return {std::move(name), [members](const S& x) { return members.count(x) ? 1.0 : 0.0; }, {},
          SignCertificate::nonnegative_outside, std::vector<S>(members.begin(), members.end())};
}

/// Indicator of the fixed window X_R of `model`.
template <State S, State Y>
Objective<S> truncation_indicator(const CilpModel<S, Y>& model, std::int64_t big_r) {
  auto obj = set_indicator(model.enumerator(big_r), "truncation indicator R=" + std::to_string(big_r));
  return obj;
}

/// f(x) = x^k on non-negative integer states, for models whose weight is
/// w(x) = scale * x^d with k < d. Outside X_r every state satisfies x ≥ m with
/// m = ceil_root(r, d, scale), and x^k / (scale x^d) is decreasing, so the
/// envelope is m^(k-d) / scale.
inline Objective<std::int64_t> monomial_objective(int k, double w_degree, double w_scale = 1.0) {
  if (k < 0) throw ConfigError("monomial objective degree must be non-negative");
  if (static_cast<double>(k) >= w_degree)
    throw ConfigError("objective x^" + std::to_string(k) + " is not in W: its degree must be below the weight degree");
  return {"x^" + std::to_string(k),
          [k](const std::int64_t& x) { return std::pow(static_cast<double>(x), k); },
          [k, w_degree, w_scale](std::int64_t r) {
            const auto m = std::max<std::int64_t>(1, ceil_root(r, w_degree, w_scale));
            return std::pow(static_cast<double>(m), static_cast<double>(k) - w_degree) / w_scale;
          },
          SignCertificate::nonnegative_outside, std::nullopt};
}

/// sup_{x ∉ X_r} |f(x)|/w(x) when it is known: from the envelope if present,
/// otherwise exactly over the declared finite support. Empty when neither is
/// available.
template <State S, State Y>
std::optional<double> tail_sup_ratio(const CilpModel<S, Y>& model, const Objective<S>& f, std::int64_t r) {
  if (f.envelope) return f.envelope(r);
  if (f.finite_support) {
    double best = 0;
    for (const S& x : *f.finite_support) {
      const double wx = model.w(x);
      if (wx < static_cast<double>(r)) continue;
      best = std::max(best, std::abs(f.evaluate(x)) / wx);
    }
    return best;
  }
  return std::nullopt;
}

template <State S, State Y>
double require_tail_sup_ratio(const CilpModel<S, Y>& model, const Objective<S>& f, std::int64_t r) {
  auto t = tail_sup_ratio(model, f, r);
  if (!t)
    throw EnvelopeRequired("objective '" + f.name +
                           "' has neither a tail envelope nor a finite support; a two-sided bound needs one");
  return *t;
}

}  // namespace cilp
