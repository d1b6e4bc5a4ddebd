#pragma once

#include <stdexcept>
#include <string>

namespace spinpurge {

// Bad argument to a library call (out-of-range site, non-Hermitian generator, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request exceeds a documented size ceiling (qubit count, factorial search, superoperator size).
class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state or channel drifted outside its numerical tolerances.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent scenario / graph input.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ScenarioError {
 public:
  ParseError(const std::string& source, long line, const std::string& message)
      : ScenarioError(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace spinpurge
