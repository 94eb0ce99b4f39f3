#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

namespace cilp {

/// Canonical integer-tuple encoding of a state or output identifier.
using StateCode = std::vector<std::int64_t>;

/// Specialize to make a type usable as a state. `encode` must be injective.
template <class T>
struct state_traits;

template <std::integral T>
struct state_traits<T> {
  static StateCode encode(T x) { return {static_cast<std::int64_t>(x)}; }
};

template <std::size_t N>
struct state_traits<std::array<std::int64_t, N>> {
  static StateCode encode(const std::array<std::int64_t, N>& x) { return StateCode(x.begin(), x.end()); }
};

template <>
struct state_traits<StateCode> {
  static StateCode encode(const StateCode& x) { return x; }
};

template <class T>
concept State = std::totally_ordered<T> && std::copyable<T> && requires(const T& s) {
  { state_traits<T>::encode(s) } -> std::same_as<StateCode>;
};

template <State T>
StateCode encode_state(const T& s) {
  return state_traits<T>::encode(s);
}

/// "7" for scalar codes, "(1,2)" for tuples.
inline std::string to_string(const StateCode& code) {
  if (code.size() == 1) return std::to_string(code.front());
  std::string out = "(";
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(code[i]);
  }
  return out + ")";
}

template <State T>
std::string state_to_string(const T& s) {
  return to_string(encode_state(s));
}

}  // namespace cilp
