#pragma once

#include <stdexcept>
#include <string>

namespace qpqc {

/// Base for every error raised by the library. The CLI maps ConfigError to
/// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested size exceeds what the simulator or generator supports.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Vector/tensor lengths or indices are inconsistent.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input cannot be embedded (e.g. all-zero amplitude vector).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Parameterized gate kind without a shift rule.
class UnsupportedGateError : public Error {
 public:
  using Error::Error;
};

/// Cache or optimizer state does not match the call it is used with.
class StateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset manifest or tensor file problems. Message always names the file.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpqc
