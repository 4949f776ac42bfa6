#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hiertask {

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a documented precondition (dimension mismatch,
/// emitting from a non-converged tree, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Bad or missing configuration (empty registry, unknown scenario, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A fixture or data file failed to load or violated its schema.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// The decomposition planner failed; carries the raw response for traces.
class PlannerError : public Error {
 public:
  PlannerError(const std::string& what, std::string raw)
      : Error(what), raw_response(std::move(raw)) {}
  std::string raw_response;
};

/// Instruction parameter grounding failed; names the offending node.
class GroundingError : public Error {
 public:
  using Error::Error;
};

/// A strategy rule could not be applied to the fleet.
class StrategyError : public Error {
 public:
  using Error::Error;
};

/// Wire decode failure; byte_offset points at the offending input byte.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what), byte_offset(offset) {}
  std::size_t byte_offset = 0;
};

}  // namespace hiertask
