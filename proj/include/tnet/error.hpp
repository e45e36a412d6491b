#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not satisfy a primitive's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated an API precondition (e.g. backward on a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The finite-difference oracle saw two different losses at the same point.
class OracleInvalidError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NanLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace tnet
