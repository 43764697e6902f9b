#include "nefreg/error.hpp"

namespace nefreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorKind::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorKind::UnsupportedSampling: return "UnsupportedSampling";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SupportError: return "SupportError";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::BadLength: return "BadLength";
    case ErrorKind::FilterTooLongForLevel: return "FilterTooLongForLevel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& what, std::size_t index)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what + " (index " +
                         std::to_string(index) + ")"),
      kind_(kind),
      index_(index) {}

Error Error::with_step(std::string step) const {
  Error e = *this;
  static_cast<std::runtime_error&>(e) = std::runtime_error("[" + step + "] " + what());
  e.step_ = std::move(step);
  return e;
}

}  // namespace nefreg
