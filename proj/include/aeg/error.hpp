#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aeg {

/// Bad arguments or violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; the message names the offending line.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A loss or iterate became non-finite during an iterative solve.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

private:
  long iteration_;
};

/// The robust l1 objective kept decreasing as the weights grew without bound.
class UnboundedMinimizer : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An attack artifact was built from a target the attacker must not see.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// An internal invariant was breached. Always a bug.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class Unsupported : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace aeg
