#pragma once

#include <stdexcept>
#include <string>

namespace tlcg {

/// Raised when an operation's input violates the model (bad p, blocked OD pair,
/// dominance violated, ...). The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file could not be parsed. Carries the position when known.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : DomainError(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                   std::to_string(column) + ")"
                             : what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace tlcg
