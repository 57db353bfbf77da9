#pragma once

#include <stdexcept>
#include <string>

namespace sasa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or stream.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sasa
