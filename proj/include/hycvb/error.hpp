#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hycvb {

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid argument to an operation (fraction out of range, empty batch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A document too short to be split for fold-in evaluation.
class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sufficient statistics went negative beyond rounding: a bookkeeping bug.
class AccountingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Held-out evaluation had nothing to score.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hycvb
