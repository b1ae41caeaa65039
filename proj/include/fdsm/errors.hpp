#pragma once

#include <stdexcept>
#include <string>

namespace fdsm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (case files, config files).
struct ParseError : Error {
  using Error::Error;
};

// Input parsed but violates a model invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Structurally broken MDP or optimisation model.
struct ModelError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

// Message exchange between coordinator and entities broke its contract.
struct ProtocolError : Error {
  using Error::Error;
};

struct IntractableError : Error {
  IntractableError(const std::string& what, std::size_t size) : Error(what), state_count(size) {}
  std::size_t state_count;
};

}  // namespace fdsm
