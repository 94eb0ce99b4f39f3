#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cilp/state.hpp"

namespace cilp {

/// Finitely supported non-negative measure. Entries are kept sorted by the
/// state order with duplicates merged; zero-mass entries are retained so a
/// window's full layout survives into output tables.
template <State T>
class BoundedMeasure {
 public:
  using Entry = std::pair<T, double>;

  /// Masses in [-kNegativeSlack, 0) are clamped to zero; these arise from LP
  /// round-off. Anything more negative is rejected.
  static constexpr double kNegativeSlack = 1e-9;

  BoundedMeasure() = default;

  explicit BoundedMeasure(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (auto& [s, m] : entries_) {
      if (!std::isfinite(m)) throw std::invalid_argument("measure mass is not finite at " + state_to_string(s));
      if (m < 0) {
        if (m < -kNegativeSlack)
          throw std::invalid_argument("negative measure mass at " + state_to_string(s));
        m = 0;
      }
      if (!merged.empty() && merged.back().first == s) {
        merged.back().second += m;
      } else {
        merged.emplace_back(s, m);
      }
    }
    entries_ = std::move(merged);
    for (const auto& e : entries_) total_mass_ += e.second;
  }

  /// Builds the measure and records ρ(w) and ρ(g) against `model`.
  template <class Model>
  static BoundedMeasure over(const Model& model, std::vector<Entry> entries) {
    BoundedMeasure m(std::move(entries));
    double wm = 0, gm = 0;
    for (const auto& [s, mass] : m.entries_) {
      wm += mass * model.w(s);
      gm += mass * model.g_sum(s);
    }
    m.w_moment_ = wm;
    m.g_mass_ = gm;
    return m;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double total_mass() const { return total_mass_; }
  std::optional<double> w_moment() const { return w_moment_; }
  std::optional<double> g_mass() const { return g_mass_; }

  double mass_at(const T& s) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, const T& key) { return e.first < key; });
    return (it != entries_.end() && it->first == s) ? it->second : 0.0;
  }

  template <class F>
  double integral(F&& f) const {
    double sum = 0;
    for (const auto& [s, m] : entries_) sum += m * f(s);
    return sum;
  }

 private:
  std::vector<Entry> entries_;
  double total_mass_ = 0;
  std::optional<double> w_moment_;
  std::optional<double> g_mass_;
};

namespace detail {

template <State T, class Visit>
void merge_walk(const BoundedMeasure<T>& a, const BoundedMeasure<T>& b, Visit&& visit) {
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
      visit(ea[i].second, 0.0);
      ++i;
    } else if (i == ea.size() || eb[j].first < ea[i].first) {
      visit(0.0, eb[j].second);
      ++j;
    } else {
      visit(ea[i].second, eb[j].second);
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

/// sup_A |a(A) - b(A)|: the larger of the positive and negative parts of a-b.
/// For an unsigned difference this is simply its mass.
template <State T>
double tv_distance(const BoundedMeasure<T>& a, const BoundedMeasure<T>& b) {
  double pos = 0, neg = 0;
  detail::merge_walk(a, b, [&](double x, double y) {
    if (x > y)
      pos += x - y;
    else
      neg += y - x;
  });
  return std::max(pos, neg);
}

/// Σ |a(x) - b(x)|.
template <State T>
double difference_mass(const BoundedMeasure<T>& a, const BoundedMeasure<T>& b) {
  double sum = 0;
  detail::merge_walk(a, b, [&](double x, double y) { sum += std::abs(x - y); });
  return sum;
}

}  // namespace cilp
