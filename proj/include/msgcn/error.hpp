#pragma once

#include <stdexcept>
#include <string>

namespace msgcn {

// Domain failure: bad inputs, invalid networks, missing data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents. The message carries file/line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A structurally well-formed network that breaks a multiplex invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace msgcn
