#pragma once

#include <stdexcept>
#include <string>

namespace pmifact {

// Base for everything the library throws on bad input or failed numerics.
// The CLI maps the subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller asked for something that makes no sense (bad option, bad mode).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed, missing, or outside the model's support.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values showed up during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmifact
