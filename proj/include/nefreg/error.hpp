#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nefreg {

enum class ErrorKind {
  UnsupportedVariant,
  UnsupportedFamily,
  UnsupportedSampling,
  DomainError,
  SupportError,
  TooFewObservations,
  BadShape,
  BadLength,
  FilterTooLongForLevel,
  LengthMismatch,
  BadRange,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library. The kind is the stable classification;
// index and step are attached when the failure is tied to one bin or one
// pipeline stage.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  Error(ErrorKind kind, const std::string& what, std::size_t index);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  const std::string& step() const noexcept { return step_; }

  // Copy of this error with a pipeline step label prefixed to the message.
  Error with_step(std::string step) const;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
  std::string step_;
};

}  // namespace nefreg
