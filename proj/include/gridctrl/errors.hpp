#pragma once

#include <stdexcept>
#include <string>

namespace gridctrl {

// Bad input data: malformed files, unknown ids, invalid arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line, int column)
      : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// The network cannot be solved as stated (disconnected, islanding outage).
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An optimization problem has no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridctrl
