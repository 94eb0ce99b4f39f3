#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace cilp {

/// Model accessors returned data that violates the model contract.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, std::string witness = {})
      : std::runtime_error(witness.empty() ? what : what + " (witness: " + witness + ")"),
        witness_(std::move(witness)) {}

  const std::string& witness() const { return witness_; }

 private:
  std::string witness_;
};

/// Invalid user configuration: bad parameters, missing certificates, etc.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A two-sided tail correction was requested for an objective that carries
/// neither a tail envelope nor a finite support.
class EnvelopeRequired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationTooSmall : public std::runtime_error {
 public:
  TruncationTooSmall(std::int64_t r, std::optional<std::int64_t> minimal_r)
      : std::runtime_error(message(r, minimal_r)), r_(r), minimal_r_(minimal_r) {}

  std::int64_t r() const { return r_; }
  /// Smallest r with a non-empty window, if the probe found one.
  std::optional<std::int64_t> minimal_r() const { return minimal_r_; }

 private:
  static std::string message(std::int64_t r, std::optional<std::int64_t> minimal_r) {
    std::string m = "truncation too small: sublevel set for r=" + std::to_string(r) + " is empty";
    if (minimal_r) m += "; smallest non-empty window at r=" + std::to_string(*minimal_r);
    return m;
  }

  std::int64_t r_;
  std::optional<std::int64_t> minimal_r_;
};

}  // namespace cilp
