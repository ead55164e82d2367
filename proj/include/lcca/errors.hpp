#pragma once

#include <stdexcept>
#include <string>

namespace lcca {

/// Malformed input that could not be read at all (bad CSV row, bad config).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Structurally readable input that violates a dataset or config invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (singular system, empty spectrum, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lcca
