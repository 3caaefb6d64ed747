#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace spc {

enum class ErrorCode {
  EmptyData,
  NonFiniteValue,
  NonMonotoneIndex,
  ShapeMismatch,
  DivisionByZero,
  InsufficientData,
  DegenerateSplit,
  TooManyFolds,
  TooFewSegments,
  InvalidParameter,
  SingularMatrix,
  EssUndefined,
  TruthUnavailable,
  OutOfRange,
  ParseError,
  SchemaMismatch,
  ConfigError,
};

/// Library-wide error. `position()` carries an element/line index where one
/// makes sense (NonFiniteValue, NonMonotoneIndex, ParseError).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(ErrorCode code, const std::string& message, std::size_t position)
      : std::runtime_error(message), code_(code), position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace spc
