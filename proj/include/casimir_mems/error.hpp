#pragma once

#include <stdexcept>
#include <string>

namespace casimir_mems {

/// Base of every error raised by the toolkit. `code()` is a short
/// machine-parsable tag used by the CLI's single-line error output.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// An input lies outside the physical domain of an operation.
class DomainError : public Error {
public:
  DomainError(std::string field, const std::string& what)
      : Error("domain", field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class UnsupportedOrderError : public Error {
public:
  explicit UnsupportedOrderError(int order)
      : Error("unsupported_order",
              "derivative order " + std::to_string(order) + " outside [1, 6]"),
        order_(order) {}

  int order() const noexcept { return order_; }

private:
  int order_;
};

/// Effective torsional stiffness is not positive: the plate snaps toward the sphere.
class InstabilityError : public Error {
public:
  explicit InstabilityError(const std::string& what) : Error("instability", what) {}
};

/// The gap closed below the contact threshold during integration.
class PullInError : public Error {
public:
  PullInError(double time_s, double gap_m, const std::string& what)
      : Error("pull_in", what), time_(time_s), gap_(gap_m) {}

  double time() const noexcept { return time_; }
  double gap() const noexcept { return gap_; }

private:
  double time_;
  double gap_;
};

class StiffnessError : public Error {
public:
  StiffnessError(double time_s, const std::string& what)
      : Error("stiffness", what), time_(time_s) {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& what) : Error("insufficient_data", what) {}
};

/// Least-squares problem is rank deficient or has the wrong curvature.
class FitError : public Error {
public:
  FitError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

class ConfigError : public Error {
public:
  ConfigError(int line, std::string key, const std::string& what)
      : Error("config", (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                            (key.empty() ? std::string() : "key '" + key + "': ") + what),
        line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

private:
  int line_;
  std::string key_;
};

}  // namespace casimir_mems
