#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pacer {

struct PacerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeError : PacerError {
  using PacerError::PacerError;
};
struct ConfigError : PacerError {
  using PacerError::PacerError;
};
struct TemplateTooEager : PacerError {
  using PacerError::PacerError;
};
struct PrefixViolation : PacerError {
  using PacerError::PacerError;
};
struct OrderingViolation : PacerError {
  using PacerError::PacerError;
};
struct MaskingViolation : PacerError {
  using PacerError::PacerError;
};
struct BatchOverflow : PacerError {
  using PacerError::PacerError;
};
struct ConformanceViolation : PacerError {
  using PacerError::PacerError;
};
struct InsufficientData : PacerError {
  using PacerError::PacerError;
};

struct ParseError : PacerError {
  ParseError(std::size_t line, const std::string& what)
      : PacerError("line " + std::to_string(line) + ": " + what), line_no(line) {}
  std::size_t line_no;
};

}  // namespace pacer
