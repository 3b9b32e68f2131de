#ifndef WSMA_ERROR_HPP
#define WSMA_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace wsma {

enum class ErrorCode {
  EmptyAfterClamp,
  DimensionMismatch,
  BadThreshold,
  RowOutOfRange,
  BadKernel,
  ShapeMismatch,
  PlacementFailure,
  UnsortedInput,
  BadArgument,
  Io,
  Parse,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyAfterClamp: return "EmptyAfterClamp";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::RowOutOfRange: return "RowOutOfRange";
    case ErrorCode::BadKernel: return "BadKernel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Library-wide exception. Every throwing operation reports one of the
/// codes above so callers (the CLI in particular) can map failures to exit
/// codes without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace wsma

#endif  // WSMA_ERROR_HPP
