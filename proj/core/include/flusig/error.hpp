#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flusig {

// Base class for everything this library throws.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input could not be parsed. Carries the 1-based line (and column, when
// meaningful) of the offending input.
class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t line, std::size_t column = 0)
      : error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", col " + std::to_string(column);
    out += ": " + what;
    return out;
  }

  std::size_t line_;
  std::size_t column_;
};

// Inputs parsed fine but violate a semantic contract (dimension mismatch,
// unresolved reference, infeasible fold count, ...).
class validation_error : public error {
 public:
  using error::error;
};

}  // namespace flusig
