#pragma once

#include <stdexcept>
#include <string>

namespace pff {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

struct UnsupportedModel : Error {
  using Error::Error;
};

struct SolverError : Error {
  using Error::Error;
  int step = -1;
};

struct ParseError : Error {
  ParseError(const std::string& what, int line_no)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no) {}
  int line = 0;
};

}  // namespace pff
