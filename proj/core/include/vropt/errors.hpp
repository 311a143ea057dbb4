#pragma once

#include <stdexcept>
#include <string>

namespace vropt {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: dimensions, ranges, malformed configuration values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file; remembers the 1-based line that failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A run produced a non-finite iterate or direction.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(long iteration)
      : Error("non-finite iterate at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Exhaustive enumeration would exceed the configured outcome budget.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

// A named data file could not be found or opened.
class DataNotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace vropt
