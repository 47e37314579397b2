#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nanolaser {

/// Input for which the requested quantity is undefined (e.g. x at zero field).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside the domain of a closed-form relation.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced during time stepping.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_ns)
      : std::runtime_error(what), time_ns_(time_ns) {}
  double time_ns() const noexcept { return time_ns_; }

 private:
  double time_ns_;
};

struct TrajectoryFailure {
  std::size_t trajectory;
  double time_ns;
  std::string message;
};

/// All failed trajectories of an ensemble run, by trajectory index.
class EnsembleError : public std::runtime_error {
 public:
  explicit EnsembleError(std::vector<TrajectoryFailure> failures);
  const std::vector<TrajectoryFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<TrajectoryFailure> failures_;
};

/// Too few samples, or a series too short for the requested estimate.
class InsufficientData : public std::length_error {
 public:
  using std::length_error::length_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration problem; line is 0 when not tied to a file line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace nanolaser
